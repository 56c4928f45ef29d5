#pragma once

// Landmark-driven skin mask: convex hull of the skin-bearing landmarks plus
// a tapered forehead extension, minus dilated eye/brow/nostril/lip regions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skintone/error.hpp"
#include "skintone/face.hpp"
#include "skintone/geometry.hpp"
#include "skintone/image.hpp"

namespace skintone {

inline constexpr int kTopologySchemaVersion = 1;

/// Named landmark index sets over the 468-point mesh.
struct LandmarkTopology {
  std::string name;
  std::map<std::string, std::vector<int>> sets;         // face_oval + feature sets
  std::map<std::string, std::vector<int>> basis_groups;  // contributes to the skin hull
  std::vector<int> skin_hull_basis;                      // union of basis_groups, sorted

  static const std::vector<std::string>& feature_names() {
    static const std::vector<std::string> names{"left_eye",  "right_eye",  "left_brow",
                                                "right_brow", "lips_outer", "nostrils"};
    return names;
  }

  const std::vector<int>& set(const std::string& key) const {
    if (auto it = sets.find(key); it != sets.end()) return it->second;
    if (auto it = basis_groups.find(key); it != basis_groups.end()) return it->second;
    throw Error(ErrorCode::validation, "topology has no index set '" + key + "'");
  }
};

inline LandmarkTopology parse_topology(const nlohmann::json& j) {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::validation, "topology: " + m); };
  LandmarkTopology t;
  try {
    if (j.at("schema_version").get<int>() != kTopologySchemaVersion) bad("unsupported schema_version");
    t.name = j.value("name", "");
    for (const auto& [k, v] : j.at("sets").items()) t.sets[k] = v.get<std::vector<int>>();
    for (const auto& [k, v] : j.at("skin_hull_basis").items()) {
      t.basis_groups[k] = v.get<std::vector<int>>();
    }
  } catch (const nlohmann::json::exception& e) {
    bad(e.what());
  }
  std::set<int> basis;
  for (const auto& [k, v] : t.basis_groups) basis.insert(v.begin(), v.end());
  if (basis.empty()) bad("skin_hull_basis is empty");
  t.skin_hull_basis.assign(basis.begin(), basis.end());

  auto check_range = [&](const std::string& k, const std::vector<int>& v) {
    for (int i : v) {
      if (i < 0 || std::size_t(i) >= kLandmarkCount) {
        bad("index " + std::to_string(i) + " in '" + k + "' out of range");
      }
    }
  };
  for (const auto& [k, v] : t.sets) check_range(k, v);
  for (const auto& [k, v] : t.basis_groups) check_range(k, v);
  for (const auto& f : LandmarkTopology::feature_names()) {
    auto it = t.sets.find(f);
    if (it == t.sets.end() || it->second.empty()) bad("missing feature set '" + f + "'");
    for (int i : it->second) {
      if (basis.contains(i)) {
        bad("index " + std::to_string(i) + " of '" + f + "' is also in skin_hull_basis");
      }
    }
  }
  return t;
}

inline LandmarkTopology load_topology(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, path.string() + ": cannot open topology");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::validation, path.string() + ": " + e.what());
  }
  return parse_topology(j);
}

struct MaskParams {
  double forehead_scale{0.25};     // fraction of face height extended upward
  double forehead_taper{0.70};     // top-edge width / base width
  int feature_dilation_px{3};
  std::size_t min_skin_pixels{500};  // at 1024x1024, scaled by area
  bool exclude_dark_pixels{false};   // facial-hair proxy
  double dark_lightness_threshold{25.0};

  void validate() const {
    if (!(forehead_scale >= 0.0)) throw Error(ErrorCode::validation, "forehead_scale must be >= 0");
    if (!(forehead_taper > 0.0 && forehead_taper <= 1.0)) {
      throw Error(ErrorCode::validation, "forehead_taper must lie in (0,1]");
    }
    if (feature_dilation_px < 0) throw Error(ErrorCode::validation, "feature_dilation_px must be >= 0");
  }

  /// Pixel floor for an image of the given size.
  std::size_t required_pixels(int width, int height) const {
    const double scaled = double(min_skin_pixels) * double(width) * double(height) / (1024.0 * 1024.0);
    return std::max<std::size_t>(1, std::size_t(std::ceil(scaled)));
  }
};

struct SkinMask {
  int width{0};
  int height{0};
  std::vector<std::uint8_t> bits;
  std::size_t skin_pixel_count{0};

  SkinMask() = default;
  SkinMask(int w, int h) : width(w), height(h), bits(std::size_t(w) * h, 0) {}

  bool at(int x, int y) const { return bits[std::size_t(y) * width + x] != 0; }
  void set(int x, int y, bool v) { bits[std::size_t(y) * width + x] = v ? 1 : 0; }

  void recount() {
    skin_pixel_count = std::size_t(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
  }

  friend bool operator==(const SkinMask&, const SkinMask&) = default;
};

inline std::vector<Point> gather(const std::vector<Point>& px, const std::vector<int>& idx) {
  std::vector<Point> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(px[std::size_t(i)]);
  return out;
}

/// Trapezoid above the skin hull. The base runs between the leftmost and
/// rightmost of the uppermost 10% of hull landmarks; the top edge sits
/// forehead_scale * face height above the base midpoint and is
/// forehead_taper times as wide. Clipped to the image.
inline Polygon forehead_quad(std::span<const Point> hull_points, double face_height,
                             const MaskParams& params, int width, int height) {
  if (params.forehead_scale <= 0.0 || hull_points.size() < 2) return {};
  if (!(face_height > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "forehead_quad: face height must be positive");
  }
  std::vector<Point> pts(hull_points.begin(), hull_points.end());
  std::sort(pts.begin(), pts.end(),
            [](const Point& a, const Point& b) { return a.y < b.y || (a.y == b.y && a.x < b.x); });
  const std::size_t n_top =
      std::clamp<std::size_t>(std::size_t(std::ceil(0.1 * double(pts.size()))), 2, pts.size());
  Point left = pts[0];
  Point right = pts[0];
  for (std::size_t i = 0; i < n_top; ++i) {
    if (pts[i].x < left.x) left = pts[i];
    if (pts[i].x > right.x) right = pts[i];
  }
  const double base_w = right.x - left.x;
  if (base_w <= 0.0) return {};
  const double cx = 0.5 * (left.x + right.x);
  const double top_y = 0.5 * (left.y + right.y) - params.forehead_scale * face_height;
  const double half_top = 0.5 * params.forehead_taper * base_w;
  const Polygon quad{left, {cx - half_top, top_y}, {cx + half_top, top_y}, right};
  return clip_to_box(quad, 0.0, 0.0, double(width), double(height));
}

inline Polygon forehead_quad(const LandmarkSet& lm, const LandmarkTopology& topo,
                             const MaskParams& params, int width, int height) {
  const auto px = lm.to_pixels(width, height);
  const auto basis = gather(px, topo.skin_hull_basis);
  return forehead_quad(basis, lm.face_bbox.h, params, width, height);
}

/// Hull of the skin basis landmarks united with the forehead trapezoid,
/// minus each feature region (convex hull of its landmarks, dilated).
/// Throws insufficient_skin_area when the result is below the scaled floor.
inline SkinMask build_skin_mask(const LandmarkSet& lm, int width, int height,
                                const LandmarkTopology& topo, const MaskParams& params) {
  if (width <= 0 || height <= 0) throw Error(ErrorCode::invalid_argument, "mask dimensions must be positive");
  if (lm.points.size() != kLandmarkCount) {
    throw Error(ErrorCode::invalid_argument, "landmark set must have 468 points");
  }
  params.validate();
  const auto px = lm.to_pixels(width, height);
  const auto basis = gather(px, topo.skin_hull_basis);

  SkinMask mask(width, height);
  const Polygon hull = convex_hull(basis);
  for_each_covered_pixel(hull, 0.0, width, height, [&](int x, int y) { mask.set(x, y, true); });
  if (lm.face_bbox.h > 0.0) {
    const Polygon forehead = forehead_quad(basis, lm.face_bbox.h, params, width, height);
    for_each_covered_pixel(forehead, 0.0, width, height, [&](int x, int y) { mask.set(x, y, true); });
  }
  for (const auto& name : LandmarkTopology::feature_names()) {
    const Polygon feature = convex_hull(gather(px, topo.set(name)));
    for_each_covered_pixel(feature, double(params.feature_dilation_px), width, height,
                           [&](int x, int y) { mask.set(x, y, false); });
  }
  mask.recount();
  const std::size_t floor = params.required_pixels(width, height);
  if (mask.skin_pixel_count < floor) {
    throw Error(ErrorCode::insufficient_skin_area,
                std::to_string(mask.skin_pixel_count) + " skin pixels, need " + std::to_string(floor));
  }
  return mask;
}

/// Drops masked pixels darker than the threshold (facial-hair proxy).
inline void drop_dark_pixels(SkinMask& mask, const LabImage& lab, double threshold) {
  if (mask.width != lab.width() || mask.height != lab.height()) {
    throw Error(ErrorCode::invalid_argument, "drop_dark_pixels: dimension mismatch");
  }
  for (std::size_t i = 0; i < mask.bits.size(); ++i) {
    if (mask.bits[i] && lab[i].L < threshold) mask.bits[i] = 0;
  }
  mask.recount();
}

inline double mask_coverage(const SkinMask& mask, const Rect& face_bbox) {
  const double area = face_bbox.area();
  if (!(area > 0.0)) throw Error(ErrorCode::invalid_argument, "mask_coverage: zero-area bbox");
  return double(mask.skin_pixel_count) / area;
}

}  // namespace skintone
