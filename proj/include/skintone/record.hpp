#pragma once

// Per-image audit records and their JSON Lines / CSV encodings.

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "skintone/error.hpp"
#include "skintone/geometry.hpp"
#include "skintone/normalize.hpp"
#include "skintone/scales.hpp"
#include "skintone/tone.hpp"

namespace skintone {

struct AnalysisRecord {
  std::string image_id;
  std::string model;
  std::string prompt;
  Rect face_bbox;
  WhiteBalanceGains wb_gains;
  std::size_t skin_pixels{0};
  double mask_coverage{0.0};
  ToneEstimate tone;
  ScaleAssignment mst;
  ScaleAssignment perla;
  ScaleAssignment fst;
  std::string gender;
  double gender_confidence{0.0};
  std::string race;
  std::optional<double> age;
  std::string expression;
  std::vector<std::string> flags;
  std::string palette_hash;
  std::string config_hash;
  std::map<std::string, std::string> metadata;
};

struct SkipEntry {
  std::string image_id;
  std::string model;
  std::string prompt;
  std::string reason;
  std::string detail;
  std::string config_hash;
};

/// One line of a records file: either a record or a skip.
struct Outcome {
  std::string image_id;
  std::optional<AnalysisRecord> record;
  std::optional<SkipEntry> skip;

  bool ok() const noexcept { return record.has_value(); }
};

namespace detail {

inline nlohmann::json lab_json(const Lab& c) { return nlohmann::json::array({c.L, c.a, c.b}); }

inline Lab lab_from(const nlohmann::json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

inline nlohmann::json assignment_json(const ScaleAssignment& a) {
  return {{"index", a.index},
          {"label", a.label},
          {"distance", a.distance},
          {"runner_up_margin", a.runner_up_margin},
          {"metric", std::string(to_string(a.metric))}};
}

inline ScaleAssignment assignment_from(const nlohmann::json& j, const std::string& scale) {
  ScaleAssignment a;
  a.scale = scale;
  a.index = j.at("index").get<int>();
  a.label = j.at("label").get<std::string>();
  a.distance = j.at("distance").get<double>();
  a.runner_up_margin = j.at("runner_up_margin").get<double>();
  a.metric = parse_metric(j.at("metric").get<std::string>());
  return a;
}

}  // namespace detail

inline nlohmann::json to_json(const AnalysisRecord& r) {
  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& c : r.tone.clusters) {
    clusters.push_back({{"centroid", detail::lab_json(c.centroid)}, {"pixel_count", c.pixel_count}});
  }
  return {
      {"image_id", r.image_id},
      {"status", "ok"},
      {"model", r.model},
      {"prompt", r.prompt},
      {"face_bbox", {r.face_bbox.x, r.face_bbox.y, r.face_bbox.w, r.face_bbox.h}},
      {"wb_gains", {r.wb_gains.r, r.wb_gains.g, r.wb_gains.b}},
      {"skin_pixels", r.skin_pixels},
      {"mask_coverage", r.mask_coverage},
      {"tone",
       {{"representative", detail::lab_json(r.tone.representative)},
        {"clusters", std::move(clusters)},
        {"included_cluster_count", r.tone.included_cluster_count},
        {"coverage", r.tone.coverage},
        {"total_pixels", r.tone.total_pixels}}},
      {"mst", detail::assignment_json(r.mst)},
      {"perla", detail::assignment_json(r.perla)},
      {"fst", detail::assignment_json(r.fst)},
      {"gender", {{"label", r.gender}, {"confidence", r.gender_confidence}}},
      {"race", r.race},
      {"age", r.age ? nlohmann::json(*r.age) : nlohmann::json()},
      {"expression", r.expression},
      {"flags", r.flags},
      {"palette_hash", r.palette_hash},
      {"config_hash", r.config_hash},
      {"metadata", r.metadata},
  };
}

inline nlohmann::json to_json(const SkipEntry& s) {
  return {{"image_id", s.image_id}, {"status", "skipped"}, {"model", s.model},
          {"prompt", s.prompt},     {"reason", s.reason},  {"detail", s.detail},
          {"config_hash", s.config_hash}};
}

inline nlohmann::json to_json(const Outcome& o) {
  return o.record ? to_json(*o.record) : to_json(*o.skip);
}

inline AnalysisRecord record_from_json(const nlohmann::json& j) {
  AnalysisRecord r;
  r.image_id = j.at("image_id").get<std::string>();
  r.model = j.at("model").get<std::string>();
  r.prompt = j.at("prompt").get<std::string>();
  if (j.contains("face_bbox")) {
    const auto& b = j.at("face_bbox");
    r.face_bbox = {b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
                   b.at(3).get<double>()};
  }
  if (j.contains("wb_gains")) {
    const auto& g = j.at("wb_gains");
    r.wb_gains = {g.at(0).get<double>(), g.at(1).get<double>(), g.at(2).get<double>()};
  }
  r.skin_pixels = j.value("skin_pixels", std::size_t{0});
  r.mask_coverage = j.value("mask_coverage", 0.0);
  if (j.contains("tone")) {
    const auto& t = j.at("tone");
    r.tone.representative = detail::lab_from(t.at("representative"));
    for (const auto& c : t.at("clusters")) {
      r.tone.clusters.push_back({detail::lab_from(c.at("centroid")), c.at("pixel_count").get<std::size_t>()});
    }
    r.tone.included_cluster_count = t.at("included_cluster_count").get<std::size_t>();
    r.tone.coverage = t.at("coverage").get<double>();
    r.tone.total_pixels = t.value("total_pixels", std::size_t{0});
  }
  r.mst = detail::assignment_from(j.at("mst"), "MST");
  r.perla = detail::assignment_from(j.at("perla"), "PERLA");
  r.fst = detail::assignment_from(j.at("fst"), "FST");
  r.gender = j.at("gender").at("label").get<std::string>();
  r.gender_confidence = j.at("gender").value("confidence", 0.0);
  r.race = j.value("race", "");
  if (j.contains("age") && !j.at("age").is_null()) r.age = j.at("age").get<double>();
  r.expression = j.value("expression", "");
  r.flags = j.value("flags", std::vector<std::string>{});
  r.palette_hash = j.value("palette_hash", "");
  r.config_hash = j.value("config_hash", "");
  r.metadata = j.value("metadata", std::map<std::string, std::string>{});
  return r;
}

inline Outcome outcome_from_json(const nlohmann::json& j) {
  Outcome o;
  o.image_id = j.at("image_id").get<std::string>();
  const auto status = j.at("status").get<std::string>();
  if (status == "ok") {
    o.record = record_from_json(j);
  } else if (status == "skipped") {
    SkipEntry s;
    s.image_id = o.image_id;
    s.model = j.value("model", "");
    s.prompt = j.value("prompt", "");
    s.reason = j.at("reason").get<std::string>();
    s.detail = j.value("detail", "");
    s.config_hash = j.value("config_hash", "");
    o.skip = std::move(s);
  } else {
    throw Error(ErrorCode::validation, "unknown record status '" + status + "'");
  }
  return o;
}

inline std::vector<Outcome> read_outcomes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, path.string() + ": cannot open records file");
  std::vector<Outcome> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(outcome_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::validation,
                  path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

/// Successful records only.
inline std::vector<AnalysisRecord> read_records(const std::filesystem::path& path) {
  std::vector<AnalysisRecord> out;
  for (auto& o : read_outcomes(path)) {
    if (o.record) out.push_back(std::move(*o.record));
  }
  return out;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{
      "image_id", "status", "reason",  "model",   "prompt",  "gender",     "race",
      "age",      "expression", "mst", "perla",   "fst",     "tone_L",     "tone_a",
      "tone_b",   "coverage", "wb_r",  "wb_g",    "wb_b",    "flags",      "config_hash",
      "palette_hash"};
  return cols;
}

/// Flat CSV projection of one outcome, columns as in csv_columns().
inline std::string to_csv_row(const Outcome& o) {
  std::vector<std::string> f;
  auto num = [](double v) { return fmt::format("{}", v); };
  if (o.record) {
    const auto& r = *o.record;
    std::string flags;
    for (std::size_t i = 0; i < r.flags.size(); ++i) flags += (i ? ";" : "") + r.flags[i];
    f = {r.image_id, "ok", "", r.model, r.prompt, r.gender, r.race,
         r.age ? num(*r.age) : "", r.expression, std::to_string(r.mst.index),
         std::to_string(r.perla.index), r.fst.label, num(r.tone.representative.L),
         num(r.tone.representative.a), num(r.tone.representative.b), num(r.tone.coverage),
         num(r.wb_gains.r), num(r.wb_gains.g), num(r.wb_gains.b), flags, r.config_hash,
         r.palette_hash};
  } else {
    const auto& s = *o.skip;
    f = {s.image_id, "skipped", s.reason, s.model, s.prompt, "", "", "", "", "", "", "",
         "", "", "", "", "", "", "", "", s.config_hash, ""};
  }
  std::string line;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (i) line.push_back(',');
    line += csv_escape(f[i]);
  }
  return line;
}

}  // namespace skintone
