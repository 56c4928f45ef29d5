#pragma once

// Nearest-reference mapping onto the Monk (MST), PERLA and Fitzpatrick (FST)
// skin tone scales. Reference colors come from a versioned palette file whose
// hash travels with every record.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skintone/color.hpp"
#include "skintone/error.hpp"
#include "skintone/hash.hpp"

namespace skintone {

inline constexpr int kPaletteSchemaVersion = 1;

enum class Orientation { higher_is_darker, higher_is_lighter };

struct PaletteEntry {
  std::string label;
  Lab reference;
};

struct ScalePalette {
  std::string name;  // MST, PERLA or FST
  Orientation orientation{Orientation::higher_is_darker};
  double lightness_tolerance{0.0};
  std::vector<PaletteEntry> entries;

  std::size_t size() const noexcept { return entries.size(); }
};

struct ScaleAssignment {
  std::string scale;
  int index{0};  // 1-based
  std::string label;
  double distance{0.0};
  double runner_up_margin{0.0};
  DeltaEMetric metric{DeltaEMetric::de2000};
};

struct PaletteSet {
  std::vector<ScalePalette> palettes;
  std::string hash;

  const ScalePalette& get(const std::string& name) const {
    for (const auto& p : palettes) {
      if (p.name == name) return p;
    }
    throw Error(ErrorCode::validation, "palette set has no scale '" + name + "'");
  }
};

inline std::size_t expected_entry_count(const std::string& name) {
  if (name == "MST") return 10;
  if (name == "PERLA") return 11;
  if (name == "FST") return 6;
  throw Error(ErrorCode::validation, "unknown scale '" + name + "'");
}

/// Checks entry count, label uniqueness and L* monotonicity. A reversal of
/// L* between neighbours is tolerated only if it is smaller than the
/// palette's declared lightness_tolerance.
inline void validate_palette(const ScalePalette& p) {
  auto bad = [&](const std::string& m) {
    throw Error(ErrorCode::validation, "palette " + p.name + ": " + m);
  };
  const std::size_t want = expected_entry_count(p.name);
  if (p.entries.size() != want) {
    bad("expected " + std::to_string(want) + " entries, found " + std::to_string(p.entries.size()));
  }
  std::set<std::string> labels;
  for (const auto& e : p.entries) {
    if (!labels.insert(e.label).second) bad("duplicate label '" + e.label + "'");
  }
  if (!(p.lightness_tolerance >= 0.0)) bad("lightness_tolerance must be non-negative");
  for (std::size_t i = 1; i < p.entries.size(); ++i) {
    const double prev = p.entries[i - 1].reference.L;
    const double cur = p.entries[i].reference.L;
    // Step along the scale in the "darker" direction must lower L*.
    const double rise = p.orientation == Orientation::higher_is_darker ? cur - prev : prev - cur;
    if (rise >= p.lightness_tolerance) {
      std::ostringstream os;
      os << "L* not monotone at entry '" << p.entries[i].label << "' (" << prev << " -> " << cur << ")";
      bad(os.str());
    }
  }
}

inline PaletteSet parse_palettes(const nlohmann::json& j) {
  PaletteSet set;
  try {
    if (j.at("schema_version").get<int>() != kPaletteSchemaVersion) {
      throw Error(ErrorCode::validation, "unsupported palette schema_version");
    }
    for (const auto& jp : j.at("palettes")) {
      ScalePalette p;
      p.name = jp.at("name").get<std::string>();
      const auto orient = jp.at("orientation").get<std::string>();
      if (orient == "higher_is_darker") {
        p.orientation = Orientation::higher_is_darker;
      } else if (orient == "higher_is_lighter") {
        p.orientation = Orientation::higher_is_lighter;
      } else {
        throw Error(ErrorCode::validation, "palette " + p.name + ": bad orientation '" + orient + "'");
      }
      p.lightness_tolerance = jp.value("lightness_tolerance", 0.0);
      for (const auto& je : jp.at("entries")) {
        PaletteEntry e;
        e.label = je.at("label").get<std::string>();
        if (je.contains("lab")) {
          const auto v = je.at("lab").get<std::vector<double>>();
          if (v.size() != 3) throw Error(ErrorCode::validation, "lab entry must have 3 components");
          e.reference = {v[0], v[1], v[2]};
        } else if (je.contains("hex")) {
          e.reference = srgb_to_lab(parse_hex(je.at("hex").get<std::string>()));
        } else {
          throw Error(ErrorCode::validation, "palette " + p.name + ": entry '" + e.label + "' has no color");
        }
        p.entries.push_back(std::move(e));
      }
      validate_palette(p);
      set.palettes.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::validation, std::string("palette file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorCode::validation, std::string("palette file: ") + e.what());
  }
  std::set<std::string> names;
  for (const auto& p : set.palettes) {
    if (!names.insert(p.name).second) throw Error(ErrorCode::validation, "duplicate palette " + p.name);
  }
  set.hash = json_hash(j);
  return set;
}

inline PaletteSet load_palettes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, path.string() + ": cannot open palette file");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::validation, path.string() + ": " + e.what());
  }
  return parse_palettes(j);
}

/// Distances closer than this are treated as ties.
inline constexpr double kTieTolerance = 1e-9;

/// Nearest reference entry under the chosen metric. Ties go to the lighter
/// entry: the lower index on darkening scales, the higher index on
/// lightening scales.
inline ScaleAssignment classify(const Lab& tone, const ScalePalette& palette, DeltaEMetric metric) {
  if (palette.entries.empty()) throw Error(ErrorCode::invalid_argument, "empty palette");
  const bool prefer_high = palette.orientation == Orientation::higher_is_lighter;
  std::vector<double> d(palette.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = delta_e(metric, tone, palette.entries[i].reference);

  std::size_t best = 0;
  for (std::size_t i = 1; i < d.size(); ++i) {
    const double diff = d[i] - d[best];
    if (diff < -kTieTolerance || (std::abs(diff) <= kTieTolerance && prefer_high)) best = i;
  }
  double second = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (i != best) second = std::min(second, d[i]);
  }
  ScaleAssignment a;
  a.scale = palette.name;
  a.index = int(best) + 1;
  a.label = palette.entries[best].label;
  a.distance = d[best];
  a.runner_up_margin = std::isfinite(second) ? std::max(0.0, second - d[best]) : 0.0;
  a.metric = metric;
  return a;
}

}  // namespace skintone
