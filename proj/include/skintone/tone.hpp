#pragma once

// Representative skin tone: k-means in CIELAB over the masked pixels, then
// the largest clusters are accumulated until they cover the configured share
// of pixels and their centroids are averaged by size.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <tuple>
#include <vector>

#include "skintone/color.hpp"
#include "skintone/error.hpp"
#include "skintone/image.hpp"
#include "skintone/mask.hpp"

namespace skintone {

struct ToneParams {
  int k{4};
  double coverage_threshold{0.36};
  int max_iterations{100};
  double convergence_epsilon{1e-3};
  std::uint64_t seed{42};

  void validate() const {
    if (k < 1) throw Error(ErrorCode::validation, "k must be >= 1");
    if (!(coverage_threshold > 0.0 && coverage_threshold <= 1.0)) {
      throw Error(ErrorCode::validation, "coverage_threshold must lie in (0,1]");
    }
    if (max_iterations < 1) throw Error(ErrorCode::validation, "max_iterations must be >= 1");
  }
};

struct Cluster {
  Lab centroid;
  std::size_t pixel_count{0};

  friend bool operator==(const Cluster&, const Cluster&) = default;
};

struct ToneEstimate {
  Lab representative;
  std::vector<Cluster> clusters;  // pixel_count descending
  std::size_t included_cluster_count{0};
  double coverage{0.0};
  std::size_t total_pixels{0};

  friend bool operator==(const ToneEstimate&, const ToneEstimate&) = default;
};

namespace detail {

inline double sq_dist(const Lab& x, const Lab& y) {
  const double dL = x.L - y.L;
  const double da = x.a - y.a;
  const double db = x.b - y.b;
  return dL * dL + da * da + db * db;
}

// Uniform double in [0, 1) from the top 53 bits; avoids the
// implementation-defined std::uniform_real_distribution.
inline double unit_draw(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

inline std::size_t nearest(std::span<const Lab> centroids, const std::vector<bool>& active,
                           const Lab& p, double& best_d) {
  std::size_t best = 0;
  best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < centroids.size(); ++j) {
    if (!active[j]) continue;
    const double d = sq_dist(p, centroids[j]);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

}  // namespace detail

/// k-means++ seeding. Fewer than k distinct seeds (all remaining mass at
/// distance zero) are padded with copies of the first seed.
inline std::vector<Lab> kmeans_plus_plus(std::span<const Lab> pixels, int k, std::mt19937_64& rng) {
  const std::size_t n = pixels.size();
  std::vector<Lab> centers;
  centers.reserve(std::size_t(k));
  const std::size_t first = std::min(n - 1, std::size_t(detail::unit_draw(rng) * double(n)));
  centers.push_back(pixels[first]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = detail::sq_dist(pixels[i], centers[0]);
  while (centers.size() < std::size_t(k)) {
    double total = 0.0;
    for (double d : d2) total += d;
    if (total <= 0.0) break;
    const double target = detail::unit_draw(rng) * total;
    double cum = 0.0;
    std::size_t pick = n;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] > 0.0) last_positive = i;
      cum += d2[i];
      if (cum > target) {
        pick = i;
        break;
      }
    }
    if (pick == n) pick = last_positive;
    centers.push_back(pixels[pick]);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], detail::sq_dist(pixels[i], centers.back()));
    }
  }
  while (centers.size() < std::size_t(k)) centers.push_back(centers.front());
  return centers;
}

/// Lloyd iterations from k-means++ seeds. Ties in assignment go to the lower
/// cluster index. A cluster that empties is re-seeded once at the pixel
/// farthest from its current centroid; if it empties again it is dropped.
/// Returned clusters are the means of their final members, in cluster-index
/// order (not yet ranked).
inline std::vector<Cluster> kmeans(std::span<const Lab> pixels, const ToneParams& params) {
  std::mt19937_64 rng(params.seed);
  std::vector<Lab> centroids = kmeans_plus_plus(pixels, params.k, rng);
  const std::size_t k = centroids.size();
  std::vector<bool> active(k, true);
  std::vector<bool> reseeded(k, false);
  std::vector<std::size_t> label(pixels.size());
  std::vector<double> dist(pixels.size());

  auto assign = [&](std::vector<Lab>& sums, std::vector<std::size_t>& counts) {
    sums.assign(k, Lab{});
    counts.assign(k, 0);
    for (std::size_t i = 0; i < pixels.size(); ++i) {
      label[i] = detail::nearest(centroids, active, pixels[i], dist[i]);
      auto& s = sums[label[i]];
      s.L += pixels[i].L;
      s.a += pixels[i].a;
      s.b += pixels[i].b;
      ++counts[label[i]];
    }
  };

  std::vector<Lab> sums;
  std::vector<std::size_t> counts;
  for (int iter = 0; iter < params.max_iterations; ++iter) {
    assign(sums, counts);
    bool reseed = false;
    for (std::size_t j = 0; j < k; ++j) {
      if (!active[j] || counts[j] > 0) continue;
      std::size_t far = 0;
      for (std::size_t i = 1; i < pixels.size(); ++i) {
        if (dist[i] > dist[far]) far = i;
      }
      if (!reseeded[j] && dist[far] > 0.0) {
        centroids[j] = pixels[far];
        dist[far] = 0.0;
        reseeded[j] = true;
        reseed = true;
      } else {
        active[j] = false;
      }
    }
    if (reseed) continue;
    double shift = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (!active[j]) continue;
      const double c = double(counts[j]);
      const Lab next{sums[j].L / c, sums[j].a / c, sums[j].b / c};
      shift = std::max(shift, std::sqrt(detail::sq_dist(next, centroids[j])));
      centroids[j] = next;
    }
    if (shift < params.convergence_epsilon) break;
  }

  assign(sums, counts);
  std::vector<Cluster> out;
  for (std::size_t j = 0; j < k; ++j) {
    if (!active[j] || counts[j] == 0) continue;
    const double c = double(counts[j]);
    out.push_back({{sums[j].L / c, sums[j].a / c, sums[j].b / c}, counts[j]});
  }
  return out;
}

/// Ranks clusters (size descending, then centroid L* descending, then
/// original order) and averages the largest ones until their combined size
/// reaches coverage_threshold of all pixels.
inline ToneEstimate accumulate_clusters(std::vector<Cluster> clusters, const ToneParams& params) {
  std::stable_sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
    if (a.pixel_count != b.pixel_count) return a.pixel_count > b.pixel_count;
    return a.centroid.L > b.centroid.L;
  });
  std::size_t total = 0;
  for (const auto& c : clusters) total += c.pixel_count;

  ToneEstimate est;
  est.total_pixels = total;
  std::size_t included = 0;
  Lab sum;
  for (const auto& c : clusters) {
    const double w = double(c.pixel_count);
    sum.L += w * c.centroid.L;
    sum.a += w * c.centroid.a;
    sum.b += w * c.centroid.b;
    included += c.pixel_count;
    ++est.included_cluster_count;
    if (double(included) >= params.coverage_threshold * double(total)) break;
  }
  const double w = double(included);
  est.representative = {sum.L / w, sum.a / w, sum.b / w};
  est.coverage = double(included) / double(total);
  est.clusters = std::move(clusters);
  return est;
}

inline ToneEstimate representative_tone(std::span<const Lab> pixels, const ToneParams& params) {
  params.validate();
  if (pixels.empty()) throw Error(ErrorCode::insufficient_pixels, "no pixels to cluster");
  if (pixels.size() < std::size_t(params.k)) {
    throw Error(ErrorCode::insufficient_pixels, "fewer pixels than clusters");
  }
  // Cluster a canonical ordering so the result depends only on the multiset.
  std::vector<Lab> sorted(pixels.begin(), pixels.end());
  std::sort(sorted.begin(), sorted.end(), [](const Lab& x, const Lab& y) {
    return std::tie(x.L, x.a, x.b) < std::tie(y.L, y.a, y.b);
  });
  return accumulate_clusters(kmeans(sorted, params), params);
}

/// CIELAB values of the masked pixels in row-major order.
template <typename Pixel>
std::vector<Lab> extract_masked_pixels(const Image<Pixel>& img, const SkinMask& mask) {
  if (img.width() != mask.width || img.height() != mask.height) {
    throw Error(ErrorCode::invalid_argument, "extract_masked_pixels: dimension mismatch");
  }
  std::vector<Lab> out;
  out.reserve(mask.skin_pixel_count);
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (!mask.bits[i]) continue;
    if constexpr (std::is_same_v<Pixel, Lab>) {
      out.push_back(img[i]);
    } else {
      out.push_back(srgb_to_lab(img[i]));
    }
  }
  return out;
}

}  // namespace skintone
