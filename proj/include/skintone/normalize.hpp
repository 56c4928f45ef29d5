#pragma once

// Illumination normalization: CLAHE on L*, equal-weight blend with the
// original, then a background-referenced white balance that ignores the
// face region.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <type_traits>
#include <vector>

#include "skintone/color.hpp"
#include "skintone/error.hpp"
#include "skintone/face.hpp"
#include "skintone/geometry.hpp"
#include "skintone/image.hpp"

namespace skintone {

struct NormalizationParams {
  bool enabled{true};
  double clahe_clip_limit{2.0};
  int tiles_x{8};
  int tiles_y{8};
  double blend_alpha{0.5};
  double bright_fraction{0.05};
  double gain_min{0.5};
  double gain_max{2.0};
  std::size_t min_background_pixels{1000};
  double face_dilation{0.10};  // fraction of face height

  void validate() const {
    auto bad = [](const char* m) { throw Error(ErrorCode::validation, m); };
    if (!(clahe_clip_limit > 0.0)) bad("clahe_clip_limit must be positive");
    if (tiles_x < 1 || tiles_y < 1) bad("clahe tile grid must be at least 1x1");
    if (!(blend_alpha >= 0.0 && blend_alpha <= 1.0)) bad("blend_alpha must lie in [0,1]");
    if (!(bright_fraction > 0.0 && bright_fraction <= 1.0)) bad("bright_fraction must lie in (0,1]");
    if (!(gain_min > 0.0 && gain_min <= 1.0 && gain_max >= 1.0)) bad("gain clamp must bracket 1.0");
    if (!(face_dilation >= 0.0)) bad("face_dilation must be non-negative");
  }
};

struct WhiteBalanceGains {
  double r{1.0};
  double g{1.0};
  double b{1.0};

  static constexpr WhiteBalanceGains identity() { return {}; }
  friend constexpr bool operator==(const WhiteBalanceGains&, const WhiteBalanceGains&) = default;
};

/// Region excluded from the background sample: the convex hull of the face
/// landmarks grown by `margin` pixels.
struct FaceExclusion {
  Polygon hull;
  double margin{0.0};

  bool excludes(const Point& p) const { return contains_dilated(hull, p, margin); }
};

inline FaceExclusion make_face_exclusion(const LandmarkSet& face, int width, int height,
                                         double dilation_fraction) {
  const auto px = face.to_pixels(width, height);
  return {convex_hull(px), dilation_fraction * face.face_bbox.h};
}

namespace detail {

inline constexpr int kClaheBins = 256;

inline int lightness_bin(double L) {
  return std::clamp(int(std::lround(L * (kClaheBins - 1) / 100.0)), 0, kClaheBins - 1);
}

using Histogram = std::array<double, kClaheBins>;

// Clips a tile histogram at `clip` and spreads the excess evenly over all
// bins, so the tile mass is preserved exactly.
inline void clip_histogram(Histogram& hist, double clip) {
  double excess = 0.0;
  for (auto& h : hist) {
    if (h > clip) {
      excess += h - clip;
      h = clip;
    }
  }
  const double share = excess / kClaheBins;
  for (auto& h : hist) h += share;
}

// Mid-rank equalization: a bin maps to the centre of its cumulative mass,
// so a uniform histogram maps to the identity.
inline std::array<double, kClaheBins> equalization_lut(const Histogram& hist, double total) {
  std::array<double, kClaheBins> lut{};
  double below = 0.0;
  for (int v = 0; v < kClaheBins; ++v) {
    const double mid = below + 0.5 * hist[v];
    lut[v] = std::clamp(mid * kClaheBins / total - 0.5, 0.0, double(kClaheBins - 1));
    below += hist[v];
  }
  return lut;
}

}  // namespace detail

/// Contrast-limited adaptive histogram equalization of the L* plane.
/// a* and b* pass through untouched. L* is binned into 256 levels; tile
/// lookup tables are bilinearly interpolated between tile centres. Images
/// narrower or shorter than the tile grid are treated as a single tile along
/// that axis.
inline LabImage clahe_lightness(const LabImage& img, const NormalizationParams& params) {
  using detail::kClaheBins;
  const int W = img.width();
  const int H = img.height();
  const int gx = W >= params.tiles_x ? params.tiles_x : 1;
  const int gy = H >= params.tiles_y ? params.tiles_y : 1;

  std::vector<int> bins(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) bins[i] = detail::lightness_bin(img[i].L);

  std::vector<std::array<double, kClaheBins>> luts(std::size_t(gx) * gy);
  for (int ty = 0; ty < gy; ++ty) {
    const int y0 = int(std::int64_t(ty) * H / gy);
    const int y1 = int(std::int64_t(ty + 1) * H / gy);
    for (int tx = 0; tx < gx; ++tx) {
      const int x0 = int(std::int64_t(tx) * W / gx);
      const int x1 = int(std::int64_t(tx + 1) * W / gx);
      detail::Histogram hist{};
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) hist[bins[std::size_t(y) * W + x]] += 1.0;
      }
      const double total = double(x1 - x0) * double(y1 - y0);
      const double clip = std::max(params.clahe_clip_limit * total / kClaheBins, 1.0);
      detail::clip_histogram(hist, clip);
      luts[std::size_t(ty) * gx + tx] = detail::equalization_lut(hist, total);
    }
  }

  const double tile_w = double(W) / gx;
  const double tile_h = double(H) / gy;
  LabImage out = img;
  for (int y = 0; y < H; ++y) {
    const double fy = (y + 0.5) / tile_h - 0.5;
    const int ty1 = std::clamp(int(std::floor(fy)), 0, gy - 1);
    const int ty2 = std::clamp(int(std::floor(fy)) + 1, 0, gy - 1);
    const double wy = std::clamp(fy - std::floor(fy), 0.0, 1.0);
    for (int x = 0; x < W; ++x) {
      const double fx = (x + 0.5) / tile_w - 0.5;
      const int tx1 = std::clamp(int(std::floor(fx)), 0, gx - 1);
      const int tx2 = std::clamp(int(std::floor(fx)) + 1, 0, gx - 1);
      const double wx = std::clamp(fx - std::floor(fx), 0.0, 1.0);
      const int v = bins[std::size_t(y) * W + x];
      const double top = (1.0 - wx) * luts[std::size_t(ty1) * gx + tx1][v] +
                         wx * luts[std::size_t(ty1) * gx + tx2][v];
      const double bottom = (1.0 - wx) * luts[std::size_t(ty2) * gx + tx1][v] +
                            wx * luts[std::size_t(ty2) * gx + tx2][v];
      const double mapped = (1.0 - wy) * top + wy * bottom;
      out.at(x, y).L = mapped * 100.0 / (kClaheBins - 1);
    }
  }
  return out;
}

/// 8-bit convenience overload; quantizes the result back to sRGB.
inline ImageBuffer clahe_lightness(const ImageBuffer& img, const NormalizationParams& params) {
  return to_rgb8(clahe_lightness(to_lab(img), params));
}

namespace detail {

inline double mix(double a, double b, double alpha) { return (1.0 - alpha) * a + alpha * b; }

inline std::uint8_t mix(std::uint8_t a, std::uint8_t b, double alpha) {
  // std::round rounds half away from zero.
  return static_cast<std::uint8_t>(
      std::clamp(std::round((1.0 - alpha) * a + alpha * b), 0.0, 255.0));
}

inline Rgb8 mix(const Rgb8& x, const Rgb8& y, double alpha) {
  return {mix(x.r, y.r, alpha), mix(x.g, y.g, alpha), mix(x.b, y.b, alpha)};
}

inline Rgb mix(const Rgb& x, const Rgb& y, double alpha) {
  return {mix(x.r, y.r, alpha), mix(x.g, y.g, alpha), mix(x.b, y.b, alpha)};
}

inline Lab mix(const Lab& x, const Lab& y, double alpha) {
  return {mix(x.L, y.L, alpha), mix(x.a, y.a, alpha), mix(x.b, y.b, alpha)};
}

}  // namespace detail

/// Per-channel convex combination (1 - alpha) * base + alpha * processed.
/// 8-bit pixels round half away from zero.
template <typename Pixel>
Image<Pixel> blend(const Image<Pixel>& base, const Image<Pixel>& processed, double alpha) {
  if (!base.same_shape(processed)) {
    throw Error(ErrorCode::invalid_argument, "blend: image dimensions differ");
  }
  if (alpha == 0.0) return base;
  if (alpha == 1.0) return processed;
  Image<Pixel> out = base;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = detail::mix(base[i], processed[i], alpha);
  return out;
}

namespace detail {

inline Rgb as_rgb(const Rgb& p) { return p; }
inline Rgb as_rgb(const Rgb8& p) { return {double(p.r), double(p.g), double(p.b)}; }

}  // namespace detail

/// Estimates the scene illuminant from the brightest background pixels and
/// returns gains that lift it to its own maximum channel, clamped to
/// [gain_min, gain_max]. Throws no_background_reference when fewer than
/// `min_background_pixels` pixels lie outside the exclusion region.
template <typename Pixel>
WhiteBalanceGains estimate_illuminant(const Image<Pixel>& img, const FaceExclusion& exclusion,
                                      const NormalizationParams& params) {
  struct Candidate {
    double luminance;
    std::size_t index;
  };
  std::vector<Candidate> background;
  background.reserve(img.size());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (exclusion.excludes({x + 0.5, y + 0.5})) continue;
      const std::size_t i = std::size_t(y) * img.width() + x;
      background.push_back({relative_luminance(img[i]), i});
    }
  }
  if (background.size() < params.min_background_pixels || background.empty()) {
    throw Error(ErrorCode::no_background_reference,
                "only " + std::to_string(background.size()) + " background pixels");
  }
  const std::size_t top = std::clamp<std::size_t>(
      std::size_t(std::ceil(params.bright_fraction * double(background.size()))), 1,
      background.size());
  std::partial_sort(background.begin(), background.begin() + std::ptrdiff_t(top),
                    background.end(), [](const Candidate& a, const Candidate& b) {
                      return a.luminance > b.luminance ||
                             (a.luminance == b.luminance && a.index < b.index);
                    });
  Rgb sum;
  for (std::size_t k = 0; k < top; ++k) {
    const Rgb p = detail::as_rgb(img[background[k].index]);
    sum.r += p.r;
    sum.g += p.g;
    sum.b += p.b;
  }
  const Rgb ill{sum.r / double(top), sum.g / double(top), sum.b / double(top)};
  const double peak = std::max({ill.r, ill.g, ill.b});
  auto gain = [&](double c) {
    if (peak <= 0.0) return 1.0;
    if (c <= 0.0) return params.gain_max;
    return std::clamp(peak / c, params.gain_min, params.gain_max);
  };
  return {gain(ill.r), gain(ill.g), gain(ill.b)};
}

/// Multiplies every channel by its gain, clamping to [0, 255].
template <typename Pixel>
Image<Pixel> apply_white_balance(const Image<Pixel>& img, const WhiteBalanceGains& gains) {
  Image<Pixel> out = img;
  for (auto& p : out.pixels()) {
    if constexpr (std::is_same_v<Pixel, Rgb8>) {
      p = quantize(Rgb{p.r * gains.r, p.g * gains.g, p.b * gains.b});
    } else {
      p = {std::clamp(p.r * gains.r, 0.0, 255.0), std::clamp(p.g * gains.g, 0.0, 255.0),
           std::clamp(p.b * gains.b, 0.0, 255.0)};
    }
  }
  return out;
}

struct NormalizedImage {
  RgbImage image;  // sRGB-encoded, unquantized
  WhiteBalanceGains gains;
  bool background_reference{true};  // false: identity gains were substituted
};

/// CLAHE(L*) -> blend with the original -> background white balance.
/// The intermediate image stays in double precision.
inline NormalizedImage normalize_image(const ImageBuffer& img, const LandmarkSet& face,
                                       const NormalizationParams& params) {
  if (!params.enabled) return {to_rgb(img), WhiteBalanceGains::identity(), true};
  const LabImage lab = to_lab(img);
  const LabImage blended = blend(lab, clahe_lightness(lab, params), params.blend_alpha);
  RgbImage rgb = to_rgb(blended);
  const auto exclusion = make_face_exclusion(face, img.width(), img.height(), params.face_dilation);
  try {
    const auto gains = estimate_illuminant(rgb, exclusion, params);
    return {apply_white_balance(rgb, gains), gains, true};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::no_background_reference) throw;
    return {std::move(rgb), WhiteBalanceGains::identity(), false};
  }
}

}  // namespace skintone
