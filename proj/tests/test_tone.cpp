#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "kmeans_oracle.hpp"
#include "skintone/tone.hpp"

using namespace skintone;

namespace {

std::vector<Lab> groups(const std::vector<std::pair<Lab, std::size_t>>& spec, double jitter, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> j(-jitter, jitter);
  std::vector<Lab> out;
  for (const auto& [c, n] : spec) {
    for (std::size_t i = 0; i < n; ++i) out.push_back({c.L + j(rng), c.a + j(rng), c.b + j(rng)});
  }
  return out;
}

double d2(const Lab& x, const Lab& y) {
  return (x.L - y.L) * (x.L - y.L) + (x.a - y.a) * (x.a - y.a) + (x.b - y.b) * (x.b - y.b);
}

void expect_matches_oracle(const std::vector<Lab>& px, const ToneParams& params) {
  const auto got = representative_tone(px, params);
  const auto want = oracle::tone(px, params);
  EXPECT_EQ(got.representative, want.representative);
  EXPECT_EQ(got.coverage, want.coverage);
  EXPECT_EQ(got.included_cluster_count, want.included);
  ASSERT_EQ(got.clusters.size(), want.sizes.size());
  for (std::size_t i = 0; i < want.sizes.size(); ++i) {
    EXPECT_EQ(got.clusters[i].pixel_count, want.sizes[i]);
    EXPECT_EQ(got.clusters[i].centroid, want.centroids[i]);
  }
}

std::vector<std::size_t> sizes_of(const ToneEstimate& t) {
  std::vector<std::size_t> s;
  for (const auto& c : t.clusters) s.push_back(c.pixel_count);
  return s;
}

}  // namespace

TEST(Tone, IdenticalPixels) {
  const std::vector<Lab> px(50, Lab{55.0, 12.0, 18.0});
  const auto t = representative_tone(px, ToneParams{});
  EXPECT_EQ(t.representative, (Lab{55.0, 12.0, 18.0}));
  EXPECT_EQ(t.coverage, 1.0);
  EXPECT_EQ(t.included_cluster_count, 1u);
  ASSERT_EQ(t.clusters.size(), 1u);
  EXPECT_EQ(t.clusters[0].pixel_count, 50u);
}

TEST(Tone, DominantColorWins) {
  std::vector<Lab> px(80, Lab{60, 10, 15});
  px.insert(px.end(), 20, Lab{40, 5, 8});
  const auto t = representative_tone(px, ToneParams{});
  EXPECT_LE(delta_e_76(t.representative, Lab{60, 10, 15}), 0.5);
  EXPECT_EQ(t.included_cluster_count, 1u);
  EXPECT_DOUBLE_EQ(t.coverage, 0.8);
}

TEST(Tone, FourEqualGroupsTakeTwoLightest) {
  const auto px = groups({{{20, 5, 5}, 100}, {{40, 5, 5}, 100}, {{60, 5, 5}, 100}, {{80, 5, 5}, 100}}, 0.0, 1);
  const auto t = representative_tone(px, ToneParams{});
  EXPECT_EQ(t.included_cluster_count, 2u);
  EXPECT_DOUBLE_EQ(t.coverage, 0.5);
  EXPECT_NEAR(t.representative.L, 70.0, 1e-9);
  EXPECT_NEAR(t.representative.a, 5.0, 1e-9);
  ASSERT_EQ(t.clusters.size(), 4u);
  EXPECT_GT(t.clusters[0].centroid.L, t.clusters[1].centroid.L);
  EXPECT_GT(t.clusters[1].centroid.L, t.clusters[2].centroid.L);
}

TEST(Tone, TooFewPixels) {
  const std::vector<Lab> px(3, Lab{50, 0, 0});
  try {
    representative_tone(px, ToneParams{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::insufficient_pixels);
  }
  EXPECT_THROW(representative_tone(std::vector<Lab>{}, ToneParams{}), Error);
}

TEST(Tone, ParamsValidated) {
  ToneParams p;
  p.k = 0;
  EXPECT_THROW(representative_tone(std::vector<Lab>(10), p), Error);
  p = {};
  p.coverage_threshold = 1.5;
  EXPECT_THROW(representative_tone(std::vector<Lab>(10), p), Error);
}

TEST(Tone, DeterministicAndCoverageProperty) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> L(20, 90), ab(-5, 30);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Lab> px(300);
    for (auto& p : px) p = {L(rng), ab(rng), ab(rng)};
    const ToneParams params;
    const auto a = representative_tone(px, params);
    const auto b = representative_tone(px, params);
    EXPECT_EQ(a, b);
    EXPECT_GE(a.coverage, params.coverage_threshold);
    std::size_t total = 0;
    for (std::size_t i = 0; i < a.clusters.size(); ++i) {
      total += a.clusters[i].pixel_count;
      if (i > 0) {
        EXPECT_GE(a.clusters[i - 1].pixel_count, a.clusters[i].pixel_count);
      }
    }
    EXPECT_EQ(total, px.size());

    // Representative is the size-weighted mean of the included centroids,
    // hence inside their bounding box.
    Lab lo{1e9, 1e9, 1e9}, hi{-1e9, -1e9, -1e9}, sum{0, 0, 0};
    double w = 0;
    for (std::size_t i = 0; i < a.included_cluster_count; ++i) {
      const auto& c = a.clusters[i];
      lo = {std::min(lo.L, c.centroid.L), std::min(lo.a, c.centroid.a), std::min(lo.b, c.centroid.b)};
      hi = {std::max(hi.L, c.centroid.L), std::max(hi.a, c.centroid.a), std::max(hi.b, c.centroid.b)};
      sum.L += double(c.pixel_count) * c.centroid.L;
      sum.a += double(c.pixel_count) * c.centroid.a;
      sum.b += double(c.pixel_count) * c.centroid.b;
      w += double(c.pixel_count);
    }
    EXPECT_NEAR(a.representative.L, sum.L / w, 1e-9);
    EXPECT_NEAR(a.representative.b, sum.b / w, 1e-9);
    EXPECT_GE(a.representative.L, lo.L - 1e-9);
    EXPECT_LE(a.representative.L, hi.L + 1e-9);
    EXPECT_GE(a.representative.a, lo.a - 1e-9);
    EXPECT_LE(a.representative.a, hi.a + 1e-9);

    // Every centroid lies inside the Lab bounding box of the input.
    for (const auto& c : a.clusters) {
      EXPECT_GE(c.centroid.L, 20.0);
      EXPECT_LE(c.centroid.L, 90.0);
      EXPECT_GE(c.centroid.a, -5.0);
      EXPECT_LE(c.centroid.b, 30.0);
    }
  }
}

TEST(Tone, CentroidsInsideMemberBoundingBox) {
  const auto px = groups({{{30, 10, 10}, 120}, {{55, 20, 25}, 90}, {{75, 5, 15}, 60}, {{90, 0, 0}, 30}}, 2.0, 4);
  const auto t = representative_tone(px, ToneParams{});
  ASSERT_EQ(t.clusters.size(), 4u);
  for (const auto& c : t.clusters) {
    // Assign members by nearest final centroid and bound the centroid by them.
    Lab lo{1e9, 1e9, 1e9}, hi{-1e9, -1e9, -1e9};
    for (const auto& p : px) {
      const Cluster* best = &t.clusters[0];
      for (const auto& o : t.clusters) {
        if (d2(p, o.centroid) < d2(p, best->centroid)) best = &o;
      }
      if (best != &c) continue;
      lo = {std::min(lo.L, p.L), std::min(lo.a, p.a), std::min(lo.b, p.b)};
      hi = {std::max(hi.L, p.L), std::max(hi.a, p.a), std::max(hi.b, p.b)};
    }
    EXPECT_GE(c.centroid.L, lo.L);
    EXPECT_LE(c.centroid.L, hi.L);
    EXPECT_GE(c.centroid.a, lo.a);
    EXPECT_LE(c.centroid.a, hi.a);
    EXPECT_GE(c.centroid.b, lo.b);
    EXPECT_LE(c.centroid.b, hi.b);
  }
}

TEST(Tone, MatchesLloydOracleAndPermutationInvariant) {
  const ToneParams params;
  std::mt19937 shuffle_rng(9);
  for (unsigned seed = 0; seed < 10; ++seed) {
    const std::size_t a = 100 + 37 * seed % 200, b = 50 + 13 * seed % 150, c = 30 + 7 * seed % 90,
                      d = 20 + 3 * seed % 40;
    auto px = groups({{{25, 15, 20}, a}, {{45, 25, 30}, b}, {{65, 10, 20}, c}, {{85, 2, 10}, d}}, 3.0, seed);
    ASSERT_LE(px.size(), 1000u);
    const auto expected = oracle::tone(px, params).sizes;
    EXPECT_EQ(sizes_of(representative_tone(px, params)), expected);
    for (int perm = 0; perm < 3; ++perm) {
      std::shuffle(px.begin(), px.end(), shuffle_rng);
      const auto got = sizes_of(representative_tone(px, params));
      EXPECT_EQ(got, oracle::tone(px, params).sizes);
      EXPECT_EQ(got, expected);
    }
  }
}

TEST(ExtractMasked, EmptyAndFull) {
  const ImageBuffer img(7, 5, Rgb8{10, 20, 30});
  SkinMask m(7, 5);
  EXPECT_TRUE(extract_masked_pixels(img, m).empty());
  std::fill(m.bits.begin(), m.bits.end(), 1);
  m.recount();
  const auto px = extract_masked_pixels(img, m);
  EXPECT_EQ(px.size(), 35u);
  EXPECT_EQ(px[0], srgb_to_lab(img[0]));
}

TEST(ExtractMasked, CheckerboardRowMajor) {
  ImageBuffer img(9, 6);
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 9; ++x) img.at(x, y) = {std::uint8_t(x * 20), std::uint8_t(y * 30), 77};
  }
  SkinMask m(9, 6);
  std::vector<Lab> oracle;
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 9; ++x) {
      if ((x + y) % 2 == 0) {
        m.set(x, y, true);
        oracle.push_back(srgb_to_lab(img.at(x, y)));
      }
    }
  }
  m.recount();
  const auto px = extract_masked_pixels(img, m);
  EXPECT_EQ(px.size(), 27u);
  EXPECT_EQ(px, oracle);
}

TEST(ExtractMasked, DimensionMismatchThrows) {
  EXPECT_THROW(extract_masked_pixels(ImageBuffer(4, 4), SkinMask(4, 5)), Error);
}

TEST(Tone, BitExactAgainstOracle) {
  const ToneParams params;
  std::vector<Lab> two(800, Lab{60, 10, 15});
  two.insert(two.end(), 200, Lab{40, 5, 8});
  expect_matches_oracle(two, params);
  expect_matches_oracle(groups({{{20, 5, 5}, 250}, {{40, 5, 5}, 250}, {{60, 5, 5}, 250}, {{80, 5, 5}, 250}}, 0.0, 1),
                        params);
  for (unsigned seed = 0; seed < 20; ++seed) {
    expect_matches_oracle(groups({{{30, 12, 18}, 300}, {{55, 15, 22}, 200}, {{70, 8, 14}, 100}}, 6.0, seed), params);
  }
  std::vector<Lab> few{{50, 0, 0}, {50, 0, 0}, {70, 1, 1}, {70, 1, 1}, {90, 2, 2}};
  expect_matches_oracle(few, params);
}
