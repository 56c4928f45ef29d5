#pragma once

// Shipped palette, topology and config documents, compiled in.

#include <nlohmann/json.hpp>

#include "skintone/config.hpp"
#include "skintone/defaults.hpp"
#include "skintone/mask.hpp"
#include "skintone/scales.hpp"

namespace skintone {

inline const PaletteSet& default_palettes() {
  static const PaletteSet p = parse_palettes(nlohmann::json::parse(defaults::kPalettesJson));
  return p;
}

inline const LandmarkTopology& default_topology() {
  static const LandmarkTopology t = parse_topology(nlohmann::json::parse(defaults::kTopologyJson));
  return t;
}

inline PipelineConfig default_config() {
  return config_from_json(nlohmann::json::parse(defaults::kConfigJson));
}

}  // namespace skintone
