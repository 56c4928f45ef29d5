#pragma once

// sRGB <-> CIELAB conversion and color difference metrics.
//
// All conversions use the IEC 61966-2-1 sRGB transfer curve and a D65 white
// point taken as the XYZ image of linear RGB (1, 1, 1), so pure white maps to
// a* = b* = 0 exactly. Arithmetic is double precision throughout; 8-bit
// quantization only happens in lab_to_srgb().

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace skintone {

/// 8-bit sRGB-encoded color.
struct Rgb8 {
  std::uint8_t r{0};
  std::uint8_t g{0};
  std::uint8_t b{0};

  friend constexpr bool operator==(const Rgb8&, const Rgb8&) = default;
};

/// sRGB-encoded color on the [0, 255] scale without quantization.
struct Rgb {
  double r{0.0};
  double g{0.0};
  double b{0.0};

  friend constexpr bool operator==(const Rgb&, const Rgb&) = default;
};

/// CIELAB color (D65, 2 degree observer).
struct Lab {
  double L{0.0};
  double a{0.0};
  double b{0.0};

  friend constexpr bool operator==(const Lab&, const Lab&) = default;
};

namespace detail {

inline constexpr std::array<std::array<double, 3>, 3> kRgbToXyz{{
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
}};

constexpr std::array<std::array<double, 3>, 3> invert3(
    const std::array<std::array<double, 3>, 3>& m) {
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  std::array<std::array<double, 3>, 3> r{};
  r[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
  r[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
  r[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
  r[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
  r[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
  r[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
  r[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
  r[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
  r[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
  return r;
}

inline constexpr auto kXyzToRgb = invert3(kRgbToXyz);

inline constexpr std::array<double, 3> kWhite{
    kRgbToXyz[0][0] + kRgbToXyz[0][1] + kRgbToXyz[0][2],
    kRgbToXyz[1][0] + kRgbToXyz[1][1] + kRgbToXyz[1][2],
    kRgbToXyz[2][0] + kRgbToXyz[2][1] + kRgbToXyz[2][2],
};

inline constexpr double kEpsilon = 216.0 / 24389.0;  // (6/29)^3
inline constexpr double kKappa = 24389.0 / 27.0;

inline double srgb_decode(double v01) {
  return v01 <= 0.04045 ? v01 / 12.92 : std::pow((v01 + 0.055) / 1.055, 2.4);
}

inline double srgb_encode(double lin) {
  return lin <= 0.0031308 ? 12.92 * lin
                          : 1.055 * std::pow(lin, 1.0 / 2.4) - 0.055;
}

inline double lab_f(double t) {
  return t > kEpsilon ? std::cbrt(t) : (kKappa * t + 16.0) / 116.0;
}

inline double lab_f_inv(double f) {
  const double f3 = f * f * f;
  return f3 > kEpsilon ? f3 : (116.0 * f - 16.0) / kKappa;
}

inline Lab linear_to_lab(double r, double g, double b) {
  const auto& m = kRgbToXyz;
  const double x = (m[0][0] * r + m[0][1] * g + m[0][2] * b) / kWhite[0];
  const double y = (m[1][0] * r + m[1][1] * g + m[1][2] * b) / kWhite[1];
  const double z = (m[2][0] * r + m[2][1] * g + m[2][2] * b) / kWhite[2];
  const double fx = lab_f(x);
  const double fy = lab_f(y);
  const double fz = lab_f(z);
  return {std::clamp(116.0 * fy - 16.0, 0.0, 100.0), 500.0 * (fx - fy),
          200.0 * (fy - fz)};
}

}  // namespace detail

inline Lab srgb_to_lab(const Rgb& c) {
  return detail::linear_to_lab(detail::srgb_decode(c.r / 255.0),
                               detail::srgb_decode(c.g / 255.0),
                               detail::srgb_decode(c.b / 255.0));
}

inline Lab srgb_to_lab(const Rgb8& c) {
  return srgb_to_lab(Rgb{double(c.r), double(c.g), double(c.b)});
}

/// Inverse conversion without quantization; each channel clamped to [0, 255].
inline Rgb lab_to_rgb(const Lab& c) {
  const double fy = (c.L + 16.0) / 116.0;
  const double fx = fy + c.a / 500.0;
  const double fz = fy - c.b / 200.0;
  const double x = detail::lab_f_inv(fx) * detail::kWhite[0];
  const double y = detail::lab_f_inv(fy) * detail::kWhite[1];
  const double z = detail::lab_f_inv(fz) * detail::kWhite[2];
  const auto& m = detail::kXyzToRgb;
  auto channel = [&](int i) {
    const double lin = m[i][0] * x + m[i][1] * y + m[i][2] * z;
    return std::clamp(detail::srgb_encode(std::clamp(lin, 0.0, 1.0)) * 255.0,
                      0.0, 255.0);
  };
  return {channel(0), channel(1), channel(2)};
}

inline std::uint8_t quantize_channel(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}

inline Rgb8 quantize(const Rgb& c) {
  return {quantize_channel(c.r), quantize_channel(c.g), quantize_channel(c.b)};
}

inline Rgb8 lab_to_srgb(const Lab& c) { return quantize(lab_to_rgb(c)); }

/// Rec. 709 relative luminance of an sRGB-encoded color, in [0, 1].
inline double relative_luminance(const Rgb& c) {
  return 0.2126 * detail::srgb_decode(c.r / 255.0) +
         0.7152 * detail::srgb_decode(c.g / 255.0) +
         0.0722 * detail::srgb_decode(c.b / 255.0);
}

inline double relative_luminance(const Rgb8& c) {
  return relative_luminance(Rgb{double(c.r), double(c.g), double(c.b)});
}

inline double delta_e_76(const Lab& x, const Lab& y) {
  const double dL = x.L - y.L;
  const double da = x.a - y.a;
  const double db = x.b - y.b;
  return std::sqrt(dL * dL + da * da + db * db);
}

/// CIEDE2000 color difference with kL = kC = kH = 1.
inline double delta_e_2000(const Lab& x, const Lab& y) {
  using std::atan2;
  using std::cos;
  using std::exp;
  using std::sin;
  using std::sqrt;
  constexpr double pi = std::numbers::pi;
  constexpr double deg = pi / 180.0;
  constexpr double pow25_7 = 6103515625.0;  // 25^7

  const double c1 = sqrt(x.a * x.a + x.b * x.b);
  const double c2 = sqrt(y.a * y.a + y.b * y.b);
  const double c_bar = 0.5 * (c1 + c2);
  const double c_bar7 = std::pow(c_bar, 7.0);
  const double g = 0.5 * (1.0 - sqrt(c_bar7 / (c_bar7 + pow25_7)));

  const double a1p = (1.0 + g) * x.a;
  const double a2p = (1.0 + g) * y.a;
  const double c1p = sqrt(a1p * a1p + x.b * x.b);
  const double c2p = sqrt(a2p * a2p + y.b * y.b);

  auto hue = [&](double b, double ap) {
    if (b == 0.0 && ap == 0.0) return 0.0;
    double h = atan2(b, ap);
    if (h < 0.0) h += 2.0 * pi;
    return h;
  };
  const double h1p = hue(x.b, a1p);
  const double h2p = hue(y.b, a2p);

  const double dLp = y.L - x.L;
  const double dCp = c2p - c1p;

  double dhp = 0.0;
  if (c1p * c2p != 0.0) {
    dhp = h2p - h1p;
    if (dhp > pi) {
      dhp -= 2.0 * pi;
    } else if (dhp < -pi) {
      dhp += 2.0 * pi;
    }
  }
  const double dHp = 2.0 * sqrt(c1p * c2p) * sin(0.5 * dhp);

  const double L_bar_p = 0.5 * (x.L + y.L);
  const double c_bar_p = 0.5 * (c1p + c2p);

  double h_bar_p = h1p + h2p;
  if (c1p * c2p != 0.0) {
    if (std::abs(h1p - h2p) <= pi) {
      h_bar_p *= 0.5;
    } else if (h1p + h2p < 2.0 * pi) {
      h_bar_p = 0.5 * (h_bar_p + 2.0 * pi);
    } else {
      h_bar_p = 0.5 * (h_bar_p - 2.0 * pi);
    }
  }

  const double t = 1.0 - 0.17 * cos(h_bar_p - 30.0 * deg) +
                   0.24 * cos(2.0 * h_bar_p) +
                   0.32 * cos(3.0 * h_bar_p + 6.0 * deg) -
                   0.20 * cos(4.0 * h_bar_p - 63.0 * deg);
  const double d_theta =
      30.0 * deg * exp(-std::pow((h_bar_p / deg - 275.0) / 25.0, 2.0));
  const double c_bar_p7 = std::pow(c_bar_p, 7.0);
  const double rc = 2.0 * sqrt(c_bar_p7 / (c_bar_p7 + pow25_7));
  const double l50 = (L_bar_p - 50.0) * (L_bar_p - 50.0);
  const double sl = 1.0 + 0.015 * l50 / sqrt(20.0 + l50);
  const double sc = 1.0 + 0.045 * c_bar_p;
  const double sh = 1.0 + 0.015 * c_bar_p * t;
  const double rt = -sin(2.0 * d_theta) * rc;

  const double tl = dLp / sl;
  const double tc = dCp / sc;
  const double th = dHp / sh;
  return sqrt(tl * tl + tc * tc + th * th + rt * tc * th);
}

enum class DeltaEMetric { de2000, de76 };

inline double delta_e(DeltaEMetric metric, const Lab& x, const Lab& y) {
  return metric == DeltaEMetric::de2000 ? delta_e_2000(x, y) : delta_e_76(x, y);
}

inline std::string_view to_string(DeltaEMetric m) {
  return m == DeltaEMetric::de2000 ? "de2000" : "de76";
}

inline DeltaEMetric parse_metric(std::string_view s) {
  if (s == "de2000") return DeltaEMetric::de2000;
  if (s == "de76") return DeltaEMetric::de76;
  throw std::invalid_argument("unknown color metric '" + std::string(s) + "'");
}

/// Parses "#rrggbb" or "rrggbb".
inline Rgb8 parse_hex(std::string_view hex) {
  if (!hex.empty() && hex.front() == '#') hex.remove_prefix(1);
  if (hex.size() != 6) {
    throw std::invalid_argument("bad hex color '" + std::string(hex) + "'");
  }
  auto nibble = [&](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::invalid_argument("bad hex color '" + std::string(hex) + "'");
  };
  auto byte = [&](std::size_t i) {
    return static_cast<std::uint8_t>(nibble(hex[i]) * 16 + nibble(hex[i + 1]));
  };
  return {byte(0), byte(2), byte(4)};
}

}  // namespace skintone
