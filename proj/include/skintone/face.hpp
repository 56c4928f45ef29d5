#pragma once

// Face sidecar contract: per-image detector output (bounding boxes, the
// 468-point dense landmark mesh, perceived demographic attributes) produced
// by an external extractor and consumed here as JSON.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skintone/error.hpp"
#include "skintone/geometry.hpp"

namespace skintone {

inline constexpr std::size_t kLandmarkCount = 468;
inline constexpr int kSidecarSchemaVersion = 1;

/// Dense landmarks of one face. Points are normalized to [0, 1] relative to
/// the image; the bounding box is in pixels.
struct LandmarkSet {
  std::vector<Point> points;
  Rect face_bbox;
  double confidence{1.0};

  /// Landmarks scaled to pixel coordinates.
  std::vector<Point> to_pixels(int width, int height) const {
    std::vector<Point> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back({p.x * width, p.y * height});
    return out;
  }
};

struct LabeledScore {
  std::string label;
  double confidence{0.0};
};

struct FaceAttributes {
  LabeledScore gender;
  std::string race;
  std::map<std::string, double> race_probs;
  std::optional<double> age;
  std::string expression;
};

struct Face {
  LandmarkSet landmarks;
  FaceAttributes attributes;

  const Rect& bbox() const noexcept { return landmarks.face_bbox; }
  double confidence() const noexcept { return landmarks.confidence; }
};

struct FaceSidecar {
  int schema_version{kSidecarSchemaVersion};
  std::string image_id;
  int width{0};
  int height{0};
  std::vector<Face> faces;
};

namespace detail {

[[noreturn]] inline void sidecar_fail(const std::string& msg) {
  throw Error(ErrorCode::sidecar_parse_error, msg);
}

inline double unit_interval(const nlohmann::json& j, const char* what) {
  if (!j.is_number()) sidecar_fail(std::string(what) + " must be a number");
  const double v = j.get<double>();
  if (!(v >= 0.0 && v <= 1.0)) sidecar_fail(std::string(what) + " outside [0,1]");
  return v;
}

}  // namespace detail

inline FaceSidecar parse_sidecar(const nlohmann::json& j) {
  using detail::sidecar_fail;
  if (!j.is_object()) sidecar_fail("sidecar must be a JSON object");
  FaceSidecar s;
  try {
    s.schema_version = j.at("schema_version").get<int>();
    if (s.schema_version != kSidecarSchemaVersion) {
      sidecar_fail("unsupported sidecar schema_version " + std::to_string(s.schema_version));
    }
    s.image_id = j.at("image_id").get<std::string>();
    s.width = j.at("width").get<int>();
    s.height = j.at("height").get<int>();
    if (s.width <= 0 || s.height <= 0) sidecar_fail("sidecar dimensions must be positive");

    for (const auto& jf : j.at("faces")) {
      Face f;
      const auto& bb = jf.at("bbox");
      if (!bb.is_array() || bb.size() != 4) sidecar_fail("bbox must be [x,y,w,h]");
      Rect r{bb[0].get<double>(), bb[1].get<double>(), bb[2].get<double>(),
             bb[3].get<double>()};
      // Clamp to image bounds.
      const double x0 = std::clamp(r.x, 0.0, double(s.width));
      const double y0 = std::clamp(r.y, 0.0, double(s.height));
      const double x1 = std::clamp(r.x + r.w, 0.0, double(s.width));
      const double y1 = std::clamp(r.y + r.h, 0.0, double(s.height));
      f.landmarks.face_bbox = {x0, y0, std::max(0.0, x1 - x0), std::max(0.0, y1 - y0)};
      f.landmarks.confidence = detail::unit_interval(jf.at("confidence"), "face confidence");

      const auto& lm = jf.at("landmarks");
      if (!lm.is_array() || lm.size() != kLandmarkCount) {
        sidecar_fail("face must carry exactly 468 landmarks");
      }
      f.landmarks.points.reserve(kLandmarkCount);
      for (const auto& p : lm) {
        if (!p.is_array() || p.size() < 2) sidecar_fail("landmark must be [x,y] or [x,y,z]");
        const double x = p[0].get<double>();
        const double y = p[1].get<double>();
        if (!std::isfinite(x) || !std::isfinite(y)) sidecar_fail("non-finite landmark");
        f.landmarks.points.push_back({x, y});
      }

      if (jf.contains("attributes")) {
        const auto& a = jf.at("attributes");
        if (a.contains("gender")) {
          f.attributes.gender.label = a.at("gender").at("label").get<std::string>();
          f.attributes.gender.confidence =
              detail::unit_interval(a.at("gender").at("confidence"), "gender confidence");
        }
        if (a.contains("race")) {
          f.attributes.race = a.at("race").at("label").get<std::string>();
          if (a.at("race").contains("probs")) {
            for (const auto& [k, v] : a.at("race").at("probs").items()) {
              f.attributes.race_probs[k] = detail::unit_interval(v, "race probability");
            }
          }
        }
        if (a.contains("age") && !a.at("age").is_null()) {
          f.attributes.age = a.at("age").get<double>();
        }
        if (a.contains("expression") && !a.at("expression").is_null()) {
          f.attributes.expression = a.at("expression").get<std::string>();
        }
      }
      s.faces.push_back(std::move(f));
    }
  } catch (const nlohmann::json::exception& e) {
    sidecar_fail(std::string("malformed sidecar: ") + e.what());
  }
  return s;
}

inline FaceSidecar read_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::sidecar_parse_error, path.string() + ": cannot open");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::sidecar_parse_error, path.string() + ": " + e.what());
  }
  return parse_sidecar(j);
}

inline nlohmann::json to_json(const FaceSidecar& s) {
  nlohmann::json faces = nlohmann::json::array();
  for (const auto& f : s.faces) {
    nlohmann::json lm = nlohmann::json::array();
    for (const auto& p : f.landmarks.points) lm.push_back({p.x, p.y});
    const auto& bb = f.landmarks.face_bbox;
    nlohmann::json attrs = {
        {"gender", {{"label", f.attributes.gender.label},
                    {"confidence", f.attributes.gender.confidence}}},
        {"race", {{"label", f.attributes.race}, {"probs", f.attributes.race_probs}}},
        {"age", f.attributes.age ? nlohmann::json(*f.attributes.age) : nlohmann::json()},
        {"expression", f.attributes.expression},
    };
    faces.push_back({{"bbox", {bb.x, bb.y, bb.w, bb.h}},
                     {"confidence", f.landmarks.confidence},
                     {"landmarks", std::move(lm)},
                     {"attributes", std::move(attrs)}});
  }
  return {{"schema_version", s.schema_version},
          {"image_id", s.image_id},
          {"width", s.width},
          {"height", s.height},
          {"faces", std::move(faces)}};
}

/// The face with the largest bounding-box area; ties go to the higher
/// detection confidence, then to the earlier list position.
inline const Face& select_primary_face(const FaceSidecar& sidecar) {
  if (sidecar.faces.empty()) {
    throw Error(ErrorCode::no_face_detected, "no face in sidecar for " + sidecar.image_id);
  }
  const Face* best = &sidecar.faces.front();
  for (const auto& f : sidecar.faces) {
    const double a = f.bbox().area();
    const double b = best->bbox().area();
    if (a > b || (a == b && f.confidence() > best->confidence())) best = &f;
  }
  return *best;
}

}  // namespace skintone
