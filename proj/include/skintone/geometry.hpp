#pragma once

// Planar polygon helpers for landmark geometry. Coordinates are continuous
// pixel units; pixel (x, y) has its center at (x + 0.5, y + 0.5).

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace skintone {

struct Point {
  double x{0.0};
  double y{0.0};

  friend constexpr bool operator==(const Point&, const Point&) = default;
};

using Polygon = std::vector<Point>;

struct Rect {
  double x{0.0};
  double y{0.0};
  double w{0.0};
  double h{0.0};

  double area() const noexcept { return w * h; }
  friend constexpr bool operator==(const Rect&, const Rect&) = default;
};

namespace detail {

inline double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

}  // namespace detail

/// Andrew's monotone chain. Returns vertices counter-clockwise (in a y-up
/// frame) with collinear points dropped; fewer than 3 vertices means the
/// hull is degenerate and encloses nothing.
inline Polygon convex_hull(std::span<const Point> pts) {
  Polygon p(pts.begin(), pts.end());
  std::sort(p.begin(), p.end(), [](const Point& a, const Point& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  p.erase(std::unique(p.begin(), p.end()), p.end());
  if (p.size() < 3) return p;
  Polygon h(2 * p.size());
  std::size_t k = 0;
  for (const auto& q : p) {
    while (k >= 2 && detail::cross(h[k - 2], h[k - 1], q) <= 0) --k;
    h[k++] = q;
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && detail::cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  h.resize(k - 1);
  return h;
}

/// Even-odd point-in-polygon test.
inline bool contains(const Polygon& poly, const Point& p) {
  if (poly.size() < 3) return false;
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Point& a = poly[i];
    const Point& b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double xi = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
      if (p.x < xi) inside = !inside;
    }
  }
  return inside;
}

inline double segment_distance(const Point& p, const Point& a, const Point& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

/// Distance from p to the polygon boundary (or the single point / segment
/// for degenerate input).
inline double boundary_distance(const Polygon& poly, const Point& p) {
  if (poly.empty()) return std::numeric_limits<double>::infinity();
  if (poly.size() == 1) return std::hypot(p.x - poly[0].x, p.y - poly[0].y);
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    d = std::min(d, segment_distance(p, poly[j], poly[i]));
  }
  return d;
}

/// Inside the polygon or within `margin` of its boundary.
inline bool contains_dilated(const Polygon& poly, const Point& p, double margin) {
  if (contains(poly, p)) return true;
  return margin > 0.0 && boundary_distance(poly, p) <= margin;
}

/// Sutherland-Hodgman clip against the axis-aligned box [x0,x1] x [y0,y1].
inline Polygon clip_to_box(const Polygon& poly, double x0, double y0, double x1, double y1) {
  Polygon out = poly;
  auto clip_edge = [&](auto inside, auto intersect) {
    if (out.empty()) return;
    Polygon in = std::move(out);
    out.clear();
    Point prev = in.back();
    for (const Point& cur : in) {
      const bool ci = inside(cur);
      const bool pi = inside(prev);
      if (ci) {
        if (!pi) out.push_back(intersect(prev, cur));
        out.push_back(cur);
      } else if (pi) {
        out.push_back(intersect(prev, cur));
      }
      prev = cur;
    }
  };
  auto at_x = [](double x) {
    return [x](const Point& a, const Point& b) {
      const double t = (x - a.x) / (b.x - a.x);
      return Point{x, a.y + t * (b.y - a.y)};
    };
  };
  auto at_y = [](double y) {
    return [y](const Point& a, const Point& b) {
      const double t = (y - a.y) / (b.y - a.y);
      return Point{a.x + t * (b.x - a.x), y};
    };
  };
  clip_edge([&](const Point& p) { return p.x >= x0; }, at_x(x0));
  clip_edge([&](const Point& p) { return p.x <= x1; }, at_x(x1));
  clip_edge([&](const Point& p) { return p.y >= y0; }, at_y(y0));
  clip_edge([&](const Point& p) { return p.y <= y1; }, at_y(y1));
  return out;
}

inline Point centroid(std::span<const Point> pts) {
  Point c;
  if (pts.empty()) return c;
  for (const auto& p : pts) {
    c.x += p.x;
    c.y += p.y;
  }
  c.x /= double(pts.size());
  c.y /= double(pts.size());
  return c;
}

/// Calls fn(x, y) for every pixel whose center lies inside `poly` or within
/// `margin` of it, scanning only the polygon's bounding box.
template <typename Fn>
void for_each_covered_pixel(const Polygon& poly, double margin, int width, int height, Fn&& fn) {
  if (poly.empty()) return;
  double minx = poly[0].x, maxx = poly[0].x, miny = poly[0].y, maxy = poly[0].y;
  for (const auto& p : poly) {
    minx = std::min(minx, p.x);
    maxx = std::max(maxx, p.x);
    miny = std::min(miny, p.y);
    maxy = std::max(maxy, p.y);
  }
  const int x0 = std::max(0, int(std::floor(minx - margin - 0.5)));
  const int x1 = std::min(width - 1, int(std::ceil(maxx + margin)));
  const int y0 = std::max(0, int(std::floor(miny - margin - 0.5)));
  const int y1 = std::min(height - 1, int(std::ceil(maxy + margin)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const Point c{x + 0.5, y + 0.5};
      if (contains_dilated(poly, c, margin)) fn(x, y);
    }
  }
}

}  // namespace skintone
