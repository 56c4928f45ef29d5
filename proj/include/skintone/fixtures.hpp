#pragma once

// Synthetic frontal-face fixtures: a flat skin ellipse with painted
// features on a uniform background, plus a matching landmark sidecar.

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "skintone/color.hpp"
#include "skintone/face.hpp"
#include "skintone/geometry.hpp"
#include "skintone/image.hpp"
#include "skintone/image_io.hpp"
#include "skintone/mask.hpp"
#include "skintone/normalize.hpp"
#include "skintone/scales.hpp"

namespace skintone::fixtures {

struct FaceLayout {
  double cx{128.0};
  double cy{132.0};
  double rx{60.0};
  double ry{80.0};
};

struct FixtureSpec {
  std::string image_id{"fixture"};
  int width{256};
  int height{256};
  FaceLayout layout;
  Rgb8 skin{200, 160, 130};
  Rgb8 background{200, 200, 200};
  WhiteBalanceGains cast{1.0, 1.0, 1.0};  // multiplies encoded channels
  bool paint_features{true};
  std::string gender{"Woman"};
  double gender_confidence{0.95};
  std::string race{"White"};
  double age{30.0};
  std::string expression{"neutral"};
};

struct Fixture {
  ImageBuffer image;
  FaceSidecar sidecar;
};

namespace detail {

inline std::vector<Point> ring(std::size_t n, double cx, double cy, double rx, double ry) {
  std::vector<Point> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2.0 * std::numbers::pi * double(i) / double(n);
    out.push_back({cx + rx * std::sin(t), cy - ry * std::cos(t)});
  }
  return out;
}

inline void place(std::vector<Point>& px, const std::vector<int>& idx, const std::vector<Point>& pts) {
  for (std::size_t i = 0; i < idx.size(); ++i) px[std::size_t(idx[i])] = pts[i];
}

}  // namespace detail

/// Pixel-space landmarks for the layout. The oval runs clockwise from the
/// top of the face; the subject's left eye sits on the image right.
inline std::vector<Point> layout_landmarks(const FaceLayout& f, const LandmarkTopology& topo) {
  using detail::place;
  using detail::ring;
  std::vector<Point> px(kLandmarkCount, Point{f.cx, f.cy + 0.1 * f.ry});
  const auto& oval = topo.set("face_oval");
  place(px, oval, ring(oval.size(), f.cx, f.cy, f.rx, f.ry));

  auto set_ring = [&](const std::string& name, double cx, double cy, double rx, double ry) {
    const auto& idx = topo.set(name);
    place(px, idx, ring(idx.size(), cx, cy, rx, ry));
  };
  set_ring("left_eye", f.cx + 0.35 * f.rx, f.cy - 0.15 * f.ry, 0.15 * f.rx, 0.06 * f.ry);
  set_ring("right_eye", f.cx - 0.35 * f.rx, f.cy - 0.15 * f.ry, 0.15 * f.rx, 0.06 * f.ry);
  set_ring("left_brow", f.cx + 0.35 * f.rx, f.cy - 0.32 * f.ry, 0.2 * f.rx, 0.03 * f.ry);
  set_ring("right_brow", f.cx - 0.35 * f.rx, f.cy - 0.32 * f.ry, 0.2 * f.rx, 0.03 * f.ry);
  set_ring("lips_outer", f.cx, f.cy + 0.45 * f.ry, 0.3 * f.rx, 0.08 * f.ry);
  set_ring("nostrils", f.cx, f.cy + 0.2 * f.ry, 0.2 * f.rx, 0.05 * f.ry);
  set_ring("left_cheek", f.cx + 0.45 * f.rx, f.cy + 0.15 * f.ry, 0.12 * f.rx, 0.12 * f.rx);
  set_ring("right_cheek", f.cx - 0.45 * f.rx, f.cy + 0.15 * f.ry, 0.12 * f.rx, 0.12 * f.rx);
  const auto& bridge = topo.set("nasal_bridge");
  for (std::size_t i = 0; i < bridge.size(); ++i) {
    const double t = bridge.size() > 1 ? double(i) / double(bridge.size() - 1) : 0.0;
    px[std::size_t(bridge[i])] = {f.cx, f.cy - 0.2 * f.ry + t * 0.25 * f.ry};
  }
  return px;
}

/// Multiplies each encoded channel by the cast factor, rounding and clamping.
inline ImageBuffer apply_cast(const ImageBuffer& img, const WhiteBalanceGains& cast) {
  return map_pixels<Rgb8>(img, [&](const Rgb8& p) {
    return Rgb8{quantize_channel(p.r * cast.r), quantize_channel(p.g * cast.g),
                quantize_channel(p.b * cast.b)};
  });
}

inline Fixture make_fixture(const FixtureSpec& spec, const LandmarkTopology& topo) {
  const auto& f = spec.layout;
  ImageBuffer img(spec.width, spec.height, spec.background);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const double dx = (x + 0.5 - f.cx) / f.rx;
      const double dy = (y + 0.5 - f.cy) / f.ry;
      if (dx * dx + dy * dy <= 1.0) img.at(x, y) = spec.skin;
    }
  }
  const auto px = layout_landmarks(f, topo);
  if (spec.paint_features) {
    const std::array<std::pair<const char*, Rgb8>, 6> paint{{
        {"left_eye", {40, 30, 30}},
        {"right_eye", {40, 30, 30}},
        {"left_brow", {60, 40, 30}},
        {"right_brow", {60, 40, 30}},
        {"lips_outer", {150, 60, 70}},
        {"nostrils", {70, 45, 40}},
    }};
    for (const auto& [name, color] : paint) {
      const Polygon hull = convex_hull(gather(px, topo.set(name)));
      for_each_covered_pixel(hull, 0.0, spec.width, spec.height,
                             [&, c = color](int x, int y) { img.at(x, y) = c; });
    }
  }
  if (spec.cast != WhiteBalanceGains::identity()) img = apply_cast(img, spec.cast);

  Face face;
  face.landmarks.confidence = 0.99;
  face.landmarks.face_bbox = {f.cx - f.rx, f.cy - f.ry, 2.0 * f.rx, 2.0 * f.ry};
  for (const auto& p : px) face.landmarks.points.push_back({p.x / spec.width, p.y / spec.height});
  face.attributes.gender = {spec.gender, spec.gender_confidence};
  face.attributes.race = spec.race;
  face.attributes.race_probs = {{spec.race, 1.0}};
  face.attributes.age = spec.age;
  face.attributes.expression = spec.expression;

  Fixture out{std::move(img), {}};
  out.sidecar.image_id = spec.image_id;
  out.sidecar.width = spec.width;
  out.sidecar.height = spec.height;
  out.sidecar.faces.push_back(std::move(face));
  return out;
}

inline void write_fixture(const Fixture& fx, const std::filesystem::path& image_path,
                          const std::filesystem::path& sidecar_path) {
  write_image(image_path, fx.image);
  std::ofstream out(sidecar_path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, sidecar_path.string() + ": cannot write");
  out << to_json(fx.sidecar).dump(2) << '\n';
}

inline constexpr std::array<const char*, 4> kPrompts{"a human being", "a person", "an individual",
                                                     "someone"};

/// Ten fixtures whose skin tones walk the MST palette. Odd entries carry a
/// mild warm or cool cast. Writes PNG images, sidecars and manifest.csv.
inline std::filesystem::path write_corpus(const std::filesystem::path& dir, const PaletteSet& palettes,
                                          const LandmarkTopology& topo) {
  std::filesystem::create_directories(dir);
  const auto& mst = palettes.get("MST");
  static constexpr std::array<WhiteBalanceGains, 5> casts{{
      {1.06, 1.0, 0.94},
      {0.95, 1.0, 1.05},
      {1.08, 1.02, 0.92},
      {0.97, 1.03, 1.0},
      {1.04, 0.97, 0.95},
  }};
  const auto manifest = dir / "manifest.csv";
  std::ofstream m(manifest, std::ios::binary);
  if (!m) throw Error(ErrorCode::io, manifest.string() + ": cannot write");
  m << "image_id,image_path,sidecar_path,model,prompt\n";
  for (std::size_t i = 0; i < 10; ++i) {
    FixtureSpec spec;
    spec.image_id = fmt::format("fx{:02d}", i);
    spec.skin = lab_to_srgb(mst.entries[i % mst.size()].reference);
    if (i % 2 == 1) spec.cast = casts[i / 2];
    spec.gender = i % 3 == 0 ? "Man" : "Woman";
    spec.age = 22.0 + 3.0 * double(i);
    const std::string model = i % 2 == 0 ? "GPT" : "NanoBanana";
    const std::string prompt = kPrompts[(i / 2) % kPrompts.size()];
    const auto fx = make_fixture(spec, topo);
    write_fixture(fx, dir / (spec.image_id + ".png"), dir / (spec.image_id + ".json"));
    m << spec.image_id << ',' << spec.image_id << ".png," << spec.image_id << ".json," << model << ','
      << prompt << '\n';
  }
  return manifest;
}

}  // namespace skintone::fixtures
