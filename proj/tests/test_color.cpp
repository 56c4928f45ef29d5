#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "skintone/color.hpp"
#include "support.hpp"

using namespace skintone;

namespace {

// Straight-line CIEDE2000 evaluated in degrees, written independently of
// the library version.
double ciede2000_oracle(double L1, double a1, double b1, double L2, double a2, double b2) {
  const double rad = std::numbers::pi / 180.0;
  const double Cab = (std::hypot(a1, b1) + std::hypot(a2, b2)) / 2.0;
  const double G = 0.5 * (1.0 - std::sqrt(std::pow(Cab, 7) / (std::pow(Cab, 7) + std::pow(25.0, 7))));
  const double ap1 = a1 * (1 + G), ap2 = a2 * (1 + G);
  const double Cp1 = std::hypot(ap1, b1), Cp2 = std::hypot(ap2, b2);
  double hp1 = (ap1 == 0 && b1 == 0) ? 0 : std::atan2(b1, ap1) / rad;
  double hp2 = (ap2 == 0 && b2 == 0) ? 0 : std::atan2(b2, ap2) / rad;
  if (hp1 < 0) hp1 += 360;
  if (hp2 < 0) hp2 += 360;
  const double dL = L2 - L1, dC = Cp2 - Cp1;
  double dh = 0;
  if (Cp1 * Cp2 != 0) {
    dh = hp2 - hp1;
    if (dh > 180) dh -= 360;
    if (dh < -180) dh += 360;
  }
  const double dH = 2 * std::sqrt(Cp1 * Cp2) * std::sin(dh / 2 * rad);
  const double Lm = (L1 + L2) / 2, Cm = (Cp1 + Cp2) / 2;
  double hm = hp1 + hp2;
  if (Cp1 * Cp2 != 0) {
    if (std::fabs(hp1 - hp2) <= 180) hm /= 2;
    else if (hp1 + hp2 < 360) hm = (hm + 360) / 2;
    else hm = (hm - 360) / 2;
  }
  const double T = 1 - 0.17 * std::cos((hm - 30) * rad) + 0.24 * std::cos(2 * hm * rad) +
                   0.32 * std::cos((3 * hm + 6) * rad) - 0.20 * std::cos((4 * hm - 63) * rad);
  const double dTheta = 30 * std::exp(-((hm - 275) / 25) * ((hm - 275) / 25));
  const double Rc = 2 * std::sqrt(std::pow(Cm, 7) / (std::pow(Cm, 7) + std::pow(25.0, 7)));
  const double Sl = 1 + 0.015 * (Lm - 50) * (Lm - 50) / std::sqrt(20 + (Lm - 50) * (Lm - 50));
  const double Sc = 1 + 0.045 * Cm;
  const double Sh = 1 + 0.015 * Cm * T;
  const double Rt = -std::sin(2 * dTheta * rad) * Rc;
  return std::sqrt((dL / Sl) * (dL / Sl) + (dC / Sc) * (dC / Sc) + (dH / Sh) * (dH / Sh) +
                   Rt * (dC / Sc) * (dH / Sh));
}

// sRGB gray to L* by hand: decode, Y = linear value, cube-root formula.
double gray_lightness(int v) {
  const double c = v / 255.0;
  const double lin = c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
  return lin > 216.0 / 24389.0 ? 116.0 * std::cbrt(lin) - 16.0 : lin * 24389.0 / 27.0;
}

}  // namespace

TEST(SrgbToLab, WhiteIsReferenceWhite) {
  const Lab w = srgb_to_lab(Rgb8{255, 255, 255});
  EXPECT_NEAR(w.L, 100.0, 1e-9);
  EXPECT_LE(std::abs(w.a), 0.01);
  EXPECT_LE(std::abs(w.b), 0.01);
}

TEST(SrgbToLab, BlackIsZero) {
  const Lab k = srgb_to_lab(Rgb8{0, 0, 0});
  EXPECT_EQ(k.L, 0.0);
  EXPECT_NEAR(k.a, 0.0, 1e-12);
  EXPECT_NEAR(k.b, 0.0, 1e-12);
}

TEST(SrgbToLab, MidGrayMatchesHandEvaluation) {
  const Lab g = srgb_to_lab(Rgb8{119, 119, 119});
  EXPECT_NEAR(g.L, 50.1, 0.2);
  EXPECT_NEAR(g.L, gray_lightness(119), 1e-9);
  EXPECT_LE(std::abs(g.a), 0.01);
  EXPECT_LE(std::abs(g.b), 0.01);
}

TEST(SrgbToLab, GrayRampMatchesHandEvaluation) {
  for (int v = 0; v < 256; ++v) {
    const Lab g = srgb_to_lab(Rgb8{std::uint8_t(v), std::uint8_t(v), std::uint8_t(v)});
    EXPECT_NEAR(g.L, gray_lightness(v), 1e-9) << v;
    EXPECT_LE(std::abs(g.a), 1e-9);
    EXPECT_LE(std::abs(g.b), 1e-9);
  }
}

TEST(SrgbToLab, LightnessInRangeOverCube) {
  for (int r = 0; r < 256; r += 3) {
    for (int g = 0; g < 256; g += 3) {
      for (int b = 0; b < 256; b += 3) {
        const Lab c = srgb_to_lab(Rgb8{std::uint8_t(r), std::uint8_t(g), std::uint8_t(b)});
        ASSERT_GE(c.L, 0.0);
        ASSERT_LE(c.L, 100.0);
      }
    }
  }
}

TEST(LabToSrgb, Extremes) {
  EXPECT_EQ(lab_to_srgb({100, 0, 0}), (Rgb8{255, 255, 255}));
  EXPECT_EQ(lab_to_srgb({0, 0, 0}), (Rgb8{0, 0, 0}));
}

TEST(LabToSrgb, OutOfGamutClampsPerChannel) {
  const Rgb c = lab_to_rgb({60, 120, -120});
  for (double v : {c.r, c.g, c.b}) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 255.0);
  }
}

TEST(LabToSrgb, RoundTripOver16CubeGrid) {
  int worst = 0;
  for (int r = 0; r < 16; ++r) {
    for (int g = 0; g < 16; ++g) {
      for (int b = 0; b < 16; ++b) {
        const Rgb8 in{std::uint8_t(r * 17), std::uint8_t(g * 17), std::uint8_t(b * 17)};
        const Rgb8 out = lab_to_srgb(srgb_to_lab(in));
        worst = std::max({worst, std::abs(in.r - out.r), std::abs(in.g - out.g), std::abs(in.b - out.b)});
      }
    }
  }
  EXPECT_LE(worst, 1);
}

TEST(DeltaE2000, IdentityIsZero) {
  const Lab x{50, 2.5, -80};
  EXPECT_EQ(delta_e_2000(x, x), 0.0);
}

TEST(DeltaE2000, SymmetricAndNonNegative) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> L(0, 100), ab(-100, 100);
  for (int i = 0; i < 1000; ++i) {
    const Lab x{L(rng), ab(rng), ab(rng)};
    const Lab y{L(rng), ab(rng), ab(rng)};
    const double d = delta_e_2000(x, y);
    EXPECT_GE(d, 0.0);
    EXPECT_DOUBLE_EQ(d, delta_e_2000(y, x));
    EXPECT_GT(d, 0.0);
  }
}

TEST(DeltaE2000, ConformancePairs) {
  const auto rows = testing_support::read_numeric_csv(testing_support::data_dir() / "ciede2000_pairs.csv");
  ASSERT_EQ(rows.size(), 34u);
  for (const auto& r : rows) {
    const Lab x{r[0], r[1], r[2]};
    const Lab y{r[3], r[4], r[5]};
    EXPECT_NEAR(delta_e_2000(x, y), r[6], 1e-4);
    EXPECT_NEAR(delta_e_2000(y, x), r[6], 1e-4);
  }
  EXPECT_NEAR(delta_e_2000({50, 2.6772, -79.7751}, {50, 0, -82.7485}), 2.0425, 1e-4);
}

TEST(DeltaE2000, MatchesIndependentTranscription) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> L(0, 100), ab(-110, 110);
  for (int i = 0; i < 5000; ++i) {
    const Lab x{L(rng), ab(rng), ab(rng)};
    const Lab y{L(rng), ab(rng), ab(rng)};
    EXPECT_NEAR(delta_e_2000(x, y), ciede2000_oracle(x.L, x.a, x.b, y.L, y.a, y.b), 1e-9);
  }
}

TEST(DeltaE76, Examples) {
  EXPECT_EQ(delta_e_76({50, 1, 1}, {50, 1, 1}), 0.0);
  EXPECT_DOUBLE_EQ(delta_e_76({50, 0, 0}, {53, 4, 0}), 5.0);
}

// Near L* = 50 the CIEDE2000 lightness weight is 1 and small b* steps at
// low chroma are barely compressed, so the two metrics agree closely.
TEST(DeltaE76, AgreesWithDe2000ForSmallNearNeutralSteps) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> L(48, 52), b(-0.5, 0.5), step(-0.6, 0.6);
  int checked = 0;
  for (int i = 0; i < 2000; ++i) {
    const Lab x{L(rng), 0.0, b(rng)};
    const Lab y{x.L + step(rng), 0.0, x.b + step(rng)};
    const double d76 = delta_e_76(x, y);
    if (d76 >= 1.0 || d76 < 1e-3) continue;
    ++checked;
    EXPECT_NEAR(delta_e_2000(x, y), d76, 0.05 * d76);
  }
  EXPECT_GT(checked, 500);
}

TEST(Metric, ParseAndName) {
  EXPECT_EQ(parse_metric("de2000"), DeltaEMetric::de2000);
  EXPECT_EQ(parse_metric("de76"), DeltaEMetric::de76);
  EXPECT_EQ(to_string(DeltaEMetric::de76), "de76");
  EXPECT_THROW(parse_metric("cie94"), std::invalid_argument);
}

TEST(ParseHex, AcceptsHashPrefix) {
  EXPECT_EQ(parse_hex("#f6ede4"), (Rgb8{0xf6, 0xed, 0xe4}));
  EXPECT_EQ(parse_hex("3A312A"), (Rgb8{0x3a, 0x31, 0x2a}));
  EXPECT_THROW(parse_hex("12345"), std::invalid_argument);
}
