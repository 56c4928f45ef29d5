#include <algorithm>
#include <numeric>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "skintone/builtin.hpp"
#include "skintone/fixtures.hpp"
#include "skintone/mask.hpp"

using namespace skintone;

namespace {

struct Frontal {
  fixtures::Fixture fx = fixtures::make_fixture(fixtures::FixtureSpec{}, default_topology());
  const LandmarkSet& lm() const { return fx.sidecar.faces[0].landmarks; }
  int w() const { return fx.image.width(); }
  int h() const { return fx.image.height(); }
  std::vector<Point> px() const { return lm().to_pixels(w(), h()); }
};

Point mean_of(const std::vector<Point>& pts) {
  Point c{0, 0};
  for (const auto& p : pts) {
    c.x += p.x;
    c.y += p.y;
  }
  return {c.x / double(pts.size()), c.y / double(pts.size())};
}

bool has_vertex(const Polygon& poly, Point p) {
  return std::any_of(poly.begin(), poly.end(), [&](const Point& q) {
    return std::abs(q.x - p.x) < 1e-9 && std::abs(q.y - p.y) < 1e-9;
  });
}

}  // namespace

TEST(SkinMask, EyeCentroidExcluded) {
  const Frontal f;
  const auto mask = build_skin_mask(f.lm(), f.w(), f.h(), default_topology(), MaskParams{});
  for (const char* eye : {"left_eye", "right_eye"}) {
    const Point c = mean_of(gather(f.px(), default_topology().set(eye)));
    EXPECT_FALSE(mask.at(int(c.x), int(c.y))) << eye;
  }
}

TEST(SkinMask, CheekCentroidIncluded) {
  const Frontal f;
  const auto mask = build_skin_mask(f.lm(), f.w(), f.h(), default_topology(), MaskParams{});
  for (const char* cheek : {"left_cheek", "right_cheek"}) {
    const Point c = mean_of(gather(f.px(), default_topology().set(cheek)));
    EXPECT_TRUE(mask.at(int(c.x), int(c.y))) << cheek;
  }
}

TEST(SkinMask, CollapsedLandmarksHaveNoArea) {
  LandmarkSet lm;
  lm.points.assign(kLandmarkCount, Point{0.5, 0.5});
  lm.face_bbox = {100, 100, 0, 0};
  try {
    build_skin_mask(lm, 256, 256, default_topology(), MaskParams{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::insufficient_skin_area);
  }
}

TEST(SkinMask, PopcountMatchesBits) {
  const Frontal f;
  const auto mask = build_skin_mask(f.lm(), f.w(), f.h(), default_topology(), MaskParams{});
  EXPECT_EQ(mask.skin_pixel_count, std::size_t(std::accumulate(mask.bits.begin(), mask.bits.end(), 0)));
  EXPECT_EQ(mask.bits.size(), std::size_t(f.w()) * f.h());
  EXPECT_GT(mask.skin_pixel_count, 0u);
}

TEST(SkinMask, Deterministic) {
  const Frontal f;
  EXPECT_EQ(build_skin_mask(f.lm(), f.w(), f.h(), default_topology(), MaskParams{}),
            build_skin_mask(f.lm(), f.w(), f.h(), default_topology(), MaskParams{}));
}

TEST(SkinMask, NoPixelInsideDilatedFeatures) {
  const Frontal f;
  const MaskParams p;
  const auto mask = build_skin_mask(f.lm(), f.w(), f.h(), default_topology(), p);
  const auto px = f.px();
  for (const auto& name : LandmarkTopology::feature_names()) {
    const Polygon feature = convex_hull(gather(px, default_topology().set(name)));
    for (int y = 0; y < f.h(); ++y) {
      for (int x = 0; x < f.w(); ++x) {
        if (contains_dilated(feature, {x + 0.5, y + 0.5}, p.feature_dilation_px)) {
          ASSERT_FALSE(mask.at(x, y)) << name << " at " << x << "," << y;
        }
      }
    }
  }
}

TEST(SkinMask, SubsetOfHullAndForehead) {
  const Frontal f;
  const MaskParams p;
  const auto mask = build_skin_mask(f.lm(), f.w(), f.h(), default_topology(), p);
  const auto basis = gather(f.px(), default_topology().skin_hull_basis);
  const Polygon hull = convex_hull(basis);
  const Polygon forehead = forehead_quad(basis, f.lm().face_bbox.h, p, f.w(), f.h());
  for (int y = 0; y < f.h(); ++y) {
    for (int x = 0; x < f.w(); ++x) {
      if (!mask.at(x, y)) continue;
      const Point c{x + 0.5, y + 0.5};
      ASSERT_TRUE(contains(hull, c) || contains(forehead, c)) << x << "," << y;
    }
  }
}

TEST(SkinMask, MonotoneInForeheadScale) {
  const Frontal f;
  SkinMask prev;
  for (double s : {0.0, 0.1, 0.25, 0.4}) {
    MaskParams p;
    p.forehead_scale = s;
    const auto m = build_skin_mask(f.lm(), f.w(), f.h(), default_topology(), p);
    if (!prev.bits.empty()) {
      for (std::size_t i = 0; i < m.bits.size(); ++i) {
        if (prev.bits[i]) {
          ASSERT_TRUE(m.bits[i]) << "scale " << s << " pixel " << i;
        }
      }
    }
    prev = m;
  }
}

TEST(SkinMask, ZeroForeheadIsHullMinusFeatures) {
  const Frontal f;
  MaskParams p;
  p.forehead_scale = 0.0;
  const auto mask = build_skin_mask(f.lm(), f.w(), f.h(), default_topology(), p);
  const auto px = f.px();
  const Polygon hull = convex_hull(gather(px, default_topology().skin_hull_basis));
  std::vector<Polygon> features;
  for (const auto& name : LandmarkTopology::feature_names()) {
    features.push_back(convex_hull(gather(px, default_topology().set(name))));
  }
  for (int y = 0; y < f.h(); ++y) {
    for (int x = 0; x < f.w(); ++x) {
      const Point c{x + 0.5, y + 0.5};
      bool expect = contains(hull, c);
      for (const auto& ft : features) expect = expect && !contains_dilated(ft, c, p.feature_dilation_px);
      ASSERT_EQ(mask.at(x, y), expect) << x << "," << y;
    }
  }
}

TEST(SkinMask, FloorScalesWithResolution) {
  const MaskParams p;
  EXPECT_EQ(p.required_pixels(1024, 1024), 500u);
  EXPECT_EQ(p.required_pixels(512, 512), 125u);
  EXPECT_EQ(p.required_pixels(2048, 1024), 1000u);
}

TEST(ForeheadQuad, HandGeometry) {
  const std::vector<Point> chord{{100, 200}, {300, 200}};
  const Polygon q = forehead_quad(chord, 400.0, MaskParams{}, 512, 512);
  ASSERT_EQ(q.size(), 4u);
  EXPECT_TRUE(has_vertex(q, {100, 200}));
  EXPECT_TRUE(has_vertex(q, {300, 200}));
  EXPECT_TRUE(has_vertex(q, {130, 100}));
  EXPECT_TRUE(has_vertex(q, {270, 100}));
}

TEST(ForeheadQuad, ZeroScaleIsEmpty) {
  MaskParams p;
  p.forehead_scale = 0.0;
  EXPECT_TRUE(forehead_quad(std::vector<Point>{{100, 200}, {300, 200}}, 400.0, p, 512, 512).empty());
}

TEST(ForeheadQuad, ClippedAtTopOfFrame) {
  const Polygon q = forehead_quad(std::vector<Point>{{100, 10}, {300, 10}}, 400.0, MaskParams{}, 512, 512);
  ASSERT_FALSE(q.empty());
  for (const auto& p : q) EXPECT_GE(p.y, 0.0);
  EXPECT_TRUE(std::any_of(q.begin(), q.end(), [](const Point& p) { return p.y == 0.0; }));
}

TEST(ForeheadQuad, NonPositiveFaceHeightThrows) {
  EXPECT_THROW(forehead_quad(std::vector<Point>{{100, 200}, {300, 200}}, 0.0, MaskParams{}, 512, 512), Error);
}

TEST(MaskCoverage, Examples) {
  SkinMask m(10, 10);
  const Rect box{0, 0, 10, 10};
  EXPECT_EQ(mask_coverage(m, box), 0.0);
  std::fill(m.bits.begin(), m.bits.end(), 1);
  m.recount();
  EXPECT_EQ(mask_coverage(m, box), 1.0);
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < 5; ++x) m.set(x, y, false);
  }
  m.recount();
  EXPECT_NEAR(mask_coverage(m, box), 0.5, 1.0 / box.area());
  EXPECT_THROW(mask_coverage(m, Rect{0, 0, 0, 10}), Error);
}

TEST(Topology, ShippedIsValid) {
  const auto& t = default_topology();
  EXPECT_EQ(t.name, "mesh468");
  for (const auto& f : LandmarkTopology::feature_names()) {
    for (int i : t.set(f)) {
      EXPECT_FALSE(std::binary_search(t.skin_hull_basis.begin(), t.skin_hull_basis.end(), i)) << f << " " << i;
    }
  }
  for (int i : t.skin_hull_basis) {
    EXPECT_GE(i, 0);
    EXPECT_LT(i, int(kLandmarkCount));
  }
}

namespace {

nlohmann::json minimal_topology() {
  nlohmann::json j{{"schema_version", 1}, {"name", "t"}, {"sets", nlohmann::json::object()}};
  int next = 0;
  for (const auto& f : LandmarkTopology::feature_names()) j["sets"][f] = {next++, next++, next++};
  j["skin_hull_basis"] = {{"cheeks", {100, 101, 102}}};
  return j;
}

}  // namespace

TEST(Topology, ParseAndReject) {
  EXPECT_NO_THROW(parse_topology(minimal_topology()));

  auto overlap = minimal_topology();
  overlap["skin_hull_basis"]["cheeks"].push_back(0);
  EXPECT_THROW(parse_topology(overlap), Error);

  auto range = minimal_topology();
  range["sets"]["nostrils"].push_back(468);
  EXPECT_THROW(parse_topology(range), Error);

  auto missing = minimal_topology();
  missing["sets"].erase("lips_outer");
  EXPECT_THROW(parse_topology(missing), Error);

  auto version = minimal_topology();
  version["schema_version"] = 2;
  EXPECT_THROW(parse_topology(version), Error);
}

TEST(DarkPixels, DroppedBelowThreshold) {
  SkinMask m(2, 1);
  std::fill(m.bits.begin(), m.bits.end(), 1);
  m.recount();
  LabImage lab(2, 1);
  lab[0] = {20.0, 0, 0};
  lab[1] = {60.0, 0, 0};
  drop_dark_pixels(m, lab, 25.0);
  EXPECT_FALSE(m.at(0, 0));
  EXPECT_TRUE(m.at(1, 0));
  EXPECT_EQ(m.skin_pixel_count, 1u);
}
