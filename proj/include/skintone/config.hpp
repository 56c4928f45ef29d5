#pragma once

// Pipeline configuration: every tunable parameter in one JSON document whose
// hash stamps each emitted record.

#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "skintone/color.hpp"
#include "skintone/error.hpp"
#include "skintone/hash.hpp"
#include "skintone/mask.hpp"
#include "skintone/normalize.hpp"
#include "skintone/tone.hpp"

namespace skintone {

inline constexpr int kConfigSchemaVersion = 1;

struct PipelineConfig {
  NormalizationParams normalization;
  MaskParams mask;
  ToneParams tone;
  DeltaEMetric metric{DeltaEMetric::de2000};

  void validate() const {
    normalization.validate();
    mask.validate();
    tone.validate();
  }
};

inline nlohmann::json to_json(const PipelineConfig& c) {
  const auto& n = c.normalization;
  const auto& m = c.mask;
  const auto& t = c.tone;
  return {
      {"schema_version", kConfigSchemaVersion},
      {"metric", std::string(to_string(c.metric))},
      {"normalization",
       {{"enabled", n.enabled},
        {"clahe_clip_limit", n.clahe_clip_limit},
        {"clahe_tile_grid", {n.tiles_x, n.tiles_y}},
        {"blend_alpha", n.blend_alpha},
        {"bright_fraction", n.bright_fraction},
        {"gain_clamp", {n.gain_min, n.gain_max}},
        {"min_background_pixels", n.min_background_pixels},
        {"face_dilation", n.face_dilation}}},
      {"mask",
       {{"forehead_scale", m.forehead_scale},
        {"forehead_taper", m.forehead_taper},
        {"feature_dilation_px", m.feature_dilation_px},
        {"min_skin_pixels", m.min_skin_pixels},
        {"exclude_dark_pixels", m.exclude_dark_pixels},
        {"dark_lightness_threshold", m.dark_lightness_threshold}}},
      {"tone",
       {{"k", t.k},
        {"coverage_threshold", t.coverage_threshold},
        {"max_iterations", t.max_iterations},
        {"convergence_epsilon", t.convergence_epsilon},
        {"seed", t.seed}}},
  };
}

/// Missing keys keep their defaults; unknown sections are rejected.
inline PipelineConfig config_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  try {
    if (j.value("schema_version", kConfigSchemaVersion) != kConfigSchemaVersion) {
      throw Error(ErrorCode::validation, "unsupported config schema_version");
    }
    for (const auto& [key, _] : j.items()) {
      if (key != "schema_version" && key != "metric" && key != "normalization" && key != "mask" &&
          key != "tone") {
        throw Error(ErrorCode::validation, "unknown config key '" + key + "'");
      }
    }
    if (j.contains("metric")) c.metric = parse_metric(j.at("metric").get<std::string>());
    if (j.contains("normalization")) {
      const auto& s = j.at("normalization");
      auto& n = c.normalization;
      n.enabled = s.value("enabled", n.enabled);
      n.clahe_clip_limit = s.value("clahe_clip_limit", n.clahe_clip_limit);
      if (s.contains("clahe_tile_grid")) {
        n.tiles_x = s.at("clahe_tile_grid").at(0).get<int>();
        n.tiles_y = s.at("clahe_tile_grid").at(1).get<int>();
      }
      n.blend_alpha = s.value("blend_alpha", n.blend_alpha);
      n.bright_fraction = s.value("bright_fraction", n.bright_fraction);
      if (s.contains("gain_clamp")) {
        n.gain_min = s.at("gain_clamp").at(0).get<double>();
        n.gain_max = s.at("gain_clamp").at(1).get<double>();
      }
      n.min_background_pixels = s.value("min_background_pixels", n.min_background_pixels);
      n.face_dilation = s.value("face_dilation", n.face_dilation);
    }
    if (j.contains("mask")) {
      const auto& s = j.at("mask");
      auto& m = c.mask;
      m.forehead_scale = s.value("forehead_scale", m.forehead_scale);
      m.forehead_taper = s.value("forehead_taper", m.forehead_taper);
      m.feature_dilation_px = s.value("feature_dilation_px", m.feature_dilation_px);
      m.min_skin_pixels = s.value("min_skin_pixels", m.min_skin_pixels);
      m.exclude_dark_pixels = s.value("exclude_dark_pixels", m.exclude_dark_pixels);
      m.dark_lightness_threshold = s.value("dark_lightness_threshold", m.dark_lightness_threshold);
    }
    if (j.contains("tone")) {
      const auto& s = j.at("tone");
      auto& t = c.tone;
      t.k = s.value("k", t.k);
      t.coverage_threshold = s.value("coverage_threshold", t.coverage_threshold);
      t.max_iterations = s.value("max_iterations", t.max_iterations);
      t.convergence_epsilon = s.value("convergence_epsilon", t.convergence_epsilon);
      t.seed = s.value("seed", t.seed);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::validation, std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorCode::validation, std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, path.string() + ": cannot open config file");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::validation, path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

/// Hash over the fully expanded config, so files that differ only in
/// omitted defaults hash alike.
inline std::string config_hash(const PipelineConfig& c) { return json_hash(to_json(c)); }

}  // namespace skintone
