#pragma once

// Corpus orchestration: manifest ingestion, per-image analysis and record
// emission. Every manifest entry yields exactly one record or skip entry.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "skintone/config.hpp"
#include "skintone/error.hpp"
#include "skintone/face.hpp"
#include "skintone/image.hpp"
#include "skintone/image_io.hpp"
#include "skintone/mask.hpp"
#include "skintone/normalize.hpp"
#include "skintone/record.hpp"
#include "skintone/scales.hpp"
#include "skintone/tone.hpp"

namespace skintone {

struct ManifestEntry {
  std::string image_id;
  std::filesystem::path image_path;
  std::filesystem::path sidecar_path;
  std::string model;
  std::string prompt;
  std::map<std::string, std::string> metadata;
};

struct CorpusManifest {
  std::vector<ManifestEntry> entries;
};

/// Splits CSV text into records of fields (RFC 4180 quoting).
inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field.push_back(c);
      any = true;
    }
  }
  if (quoted) throw Error(ErrorCode::validation, "unterminated quoted CSV field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace detail {

inline ManifestEntry manifest_entry(const std::map<std::string, std::string>& fields,
                                    const std::filesystem::path& base, std::size_t line) {
  static const std::set<std::string> known{"image_id", "image_path", "sidecar_path", "model", "prompt"};
  auto need = [&](const char* k) -> const std::string& {
    auto it = fields.find(k);
    if (it == fields.end() || it->second.empty()) {
      throw Error(ErrorCode::validation,
                  "manifest entry " + std::to_string(line) + ": missing '" + k + "'");
    }
    return it->second;
  };
  ManifestEntry e;
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
  };
  e.image_path = resolve(need("image_path"));
  e.sidecar_path = resolve(need("sidecar_path"));
  e.model = need("model");
  e.prompt = need("prompt");
  auto id = fields.find("image_id");
  e.image_id = id != fields.end() && !id->second.empty() ? id->second : e.image_path.stem().string();
  for (const auto& [k, v] : fields) {
    if (!known.contains(k)) e.metadata[k] = v;
  }
  return e;
}

}  // namespace detail

/// Reads a CSV (header row required) or JSON Lines manifest. Relative paths
/// resolve against the manifest's directory. Missing files and duplicate
/// ids are fatal.
inline CorpusManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, path.string() + ": cannot open manifest");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto base = path.parent_path();
  CorpusManifest m;

  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".jsonl" || ext == ".ndjson") {
    std::istringstream lines(text);
    std::string line;
    std::size_t n = 0;
    while (std::getline(lines, line)) {
      ++n;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      std::map<std::string, std::string> fields;
      try {
        const auto doc = nlohmann::json::parse(line);
        for (const auto& [k, v] : doc.items()) {
          fields[k] = v.is_string() ? v.get<std::string>() : v.dump();
        }
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::validation, path.string() + ":" + std::to_string(n) + ": " + e.what());
      }
      m.entries.push_back(detail::manifest_entry(fields, base, n));
    }
  } else {
    const auto rows = parse_csv(text);
    if (!rows.empty()) {
      const auto& header = rows.front();
      for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != header.size()) {
          throw Error(ErrorCode::validation,
                      path.string() + ": row " + std::to_string(r + 1) + " has " +
                          std::to_string(rows[r].size()) + " fields, header has " +
                          std::to_string(header.size()));
        }
        std::map<std::string, std::string> fields;
        for (std::size_t c = 0; c < header.size(); ++c) fields[header[c]] = rows[r][c];
        m.entries.push_back(detail::manifest_entry(fields, base, r + 1));
      }
    }
  }

  std::set<std::string> ids;
  for (const auto& e : m.entries) {
    if (!ids.insert(e.image_id).second) {
      throw Error(ErrorCode::validation, "duplicate image_id '" + e.image_id + "' in manifest");
    }
    for (const auto& p : {e.image_path, e.sidecar_path}) {
      if (!std::filesystem::exists(p)) {
        throw Error(ErrorCode::io, "manifest path does not exist: " + p.string());
      }
    }
  }
  return m;
}

/// Immutable state shared by all workers of a run.
struct AnalysisContext {
  PipelineConfig config;
  PaletteSet palettes;
  LandmarkTopology topology;
  std::string config_hash;

  AnalysisContext(PipelineConfig c, PaletteSet p, LandmarkTopology t)
      : config(std::move(c)), palettes(std::move(p)), topology(std::move(t)),
        config_hash(skintone::config_hash(config)) {
    config.validate();
    for (const char* name : {"MST", "PERLA", "FST"}) palettes.get(name);
  }
};

inline constexpr const char* kFlagNoBackgroundReference = "no_background_reference";
inline constexpr const char* kFlagDarkPixelsExcluded = "dark_pixels_excluded";

/// Measures one image already in memory against its parsed sidecar.
inline AnalysisRecord analyze_loaded(const ImageBuffer& image, const FaceSidecar& sidecar,
                                     const std::string& image_id, const std::string& model,
                                     const std::string& prompt, const AnalysisContext& ctx) {
  if (sidecar.width != image.width() || sidecar.height != image.height()) {
    throw Error(ErrorCode::sidecar_image_mismatch,
                "sidecar says " + std::to_string(sidecar.width) + "x" + std::to_string(sidecar.height) +
                    ", image is " + std::to_string(image.width()) + "x" + std::to_string(image.height()));
  }
  const Face& face = select_primary_face(sidecar);
  const auto& cfg = ctx.config;

  AnalysisRecord rec;
  rec.image_id = image_id;
  rec.model = model;
  rec.prompt = prompt;
  rec.face_bbox = face.bbox();

  const NormalizedImage norm = normalize_image(image, face.landmarks, cfg.normalization);
  rec.wb_gains = norm.gains;
  if (!norm.background_reference) rec.flags.push_back(kFlagNoBackgroundReference);

  SkinMask mask = build_skin_mask(face.landmarks, image.width(), image.height(), ctx.topology, cfg.mask);
  const LabImage lab = map_pixels<Lab>(norm.image, [](const Rgb& p) { return srgb_to_lab(p); });
  if (cfg.mask.exclude_dark_pixels) {
    drop_dark_pixels(mask, lab, cfg.mask.dark_lightness_threshold);
    rec.flags.push_back(kFlagDarkPixelsExcluded);
    const std::size_t floor = cfg.mask.required_pixels(image.width(), image.height());
    if (mask.skin_pixel_count < floor) {
      throw Error(ErrorCode::insufficient_skin_area,
                  std::to_string(mask.skin_pixel_count) + " skin pixels after dark-pixel removal, need " +
                      std::to_string(floor));
    }
  }
  rec.skin_pixels = mask.skin_pixel_count;
  rec.mask_coverage = face.bbox().area() > 0.0 ? mask_coverage(mask, face.bbox()) : 0.0;

  const auto pixels = extract_masked_pixels(lab, mask);
  rec.tone = representative_tone(pixels, cfg.tone);
  rec.mst = classify(rec.tone.representative, ctx.palettes.get("MST"), cfg.metric);
  rec.perla = classify(rec.tone.representative, ctx.palettes.get("PERLA"), cfg.metric);
  rec.fst = classify(rec.tone.representative, ctx.palettes.get("FST"), cfg.metric);

  const auto& attr = face.attributes;
  rec.gender = attr.gender.label;
  rec.gender_confidence = attr.gender.confidence;
  rec.race = attr.race;
  rec.age = attr.age;
  rec.expression = attr.expression;
  rec.palette_hash = ctx.palettes.hash;
  rec.config_hash = ctx.config_hash;
  return rec;
}

inline bool is_skip_reason(ErrorCode c) {
  switch (c) {
    case ErrorCode::image_decode_error:
    case ErrorCode::sidecar_parse_error:
    case ErrorCode::sidecar_image_mismatch:
    case ErrorCode::no_face_detected:
    case ErrorCode::insufficient_skin_area:
    case ErrorCode::insufficient_pixels:
      return true;
    default:
      return false;
  }
}

/// Full per-image analysis. Decode, parse and measurement failures become
/// skip entries; anything else propagates.
inline Outcome analyze_image(const ManifestEntry& entry, const AnalysisContext& ctx) {
  Outcome out;
  out.image_id = entry.image_id;
  try {
    const ImageBuffer image = read_image(entry.image_path);
    const FaceSidecar sidecar = read_sidecar(entry.sidecar_path);
    AnalysisRecord rec = analyze_loaded(image, sidecar, entry.image_id, entry.model, entry.prompt, ctx);
    rec.metadata = entry.metadata;
    out.record = std::move(rec);
  } catch (const Error& e) {
    if (!is_skip_reason(e.code())) throw;
    out.skip = SkipEntry{entry.image_id, entry.model, entry.prompt,
                         std::string(e.reason()), e.what(), ctx.config_hash};
  }
  return out;
}

struct RunSummary {
  std::size_t total{0};
  std::size_t records{0};
  std::size_t skipped{0};
  std::map<std::string, std::size_t> skip_reasons;
  std::map<std::string, std::size_t> flags;
};

struct RunResult {
  std::vector<Outcome> outcomes;  // sorted by image_id
  RunSummary summary;
};

inline RunSummary summarize_run(const std::vector<Outcome>& outcomes) {
  RunSummary s;
  s.total = outcomes.size();
  for (const auto& o : outcomes) {
    if (o.record) {
      ++s.records;
      for (const auto& f : o.record->flags) ++s.flags[f];
    } else {
      ++s.skipped;
      ++s.skip_reasons[o.skip->reason];
    }
  }
  return s;
}

/// Analyzes every entry on `jobs` worker threads. Results are merged in
/// image_id order, so the output does not depend on scheduling.
inline RunResult run_corpus(const CorpusManifest& manifest, const AnalysisContext& ctx, unsigned jobs = 1) {
  const std::size_t n = manifest.entries.size();
  std::vector<Outcome> outcomes(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        outcomes[i] = analyze_image(manifest.entries[i], ctx);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, unsigned(std::max<std::size_t>(n, 1))));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  std::sort(outcomes.begin(), outcomes.end(),
            [](const Outcome& a, const Outcome& b) { return a.image_id < b.image_id; });
  RunResult res;
  res.summary = summarize_run(outcomes);
  res.outcomes = std::move(outcomes);
  return res;
}

inline nlohmann::json to_json(const RunSummary& s) {
  return {{"total", s.total},
          {"records", s.records},
          {"skipped", s.skipped},
          {"skip_reasons", s.skip_reasons},
          {"flags", s.flags}};
}

/// Writes <out> (JSON Lines), <out stem>.csv and <out stem>.summary.json.
inline void write_run(const RunResult& run, const AnalysisContext& ctx, const std::filesystem::path& out) {
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  auto open = [](const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error(ErrorCode::io, p.string() + ": cannot write");
    return f;
  };
  {
    auto f = open(out);
    for (const auto& o : run.outcomes) f << to_json(o).dump() << '\n';
  }
  {
    auto csv_path = out;
    csv_path.replace_extension(".csv");
    auto f = open(csv_path);
    const auto& cols = csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) f << (i ? "," : "") << cols[i];
    f << '\n';
    for (const auto& o : run.outcomes) f << to_csv_row(o) << '\n';
  }
  {
    auto summary_path = out;
    summary_path.replace_extension(".summary.json");
    auto f = open(summary_path);
    const nlohmann::json j{{"summary", to_json(run.summary)},
                           {"config_hash", ctx.config_hash},
                           {"palette_hash", ctx.palettes.hash},
                           {"topology", ctx.topology.name},
                           {"config", to_json(ctx.config)}};
    f << j.dump(2) << '\n';
  }
}

}  // namespace skintone
