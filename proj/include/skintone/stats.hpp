#pragma once

// Hypothesis tests used for corpus comparisons: chi-square independence
// (optional Yates correction on 2x2), Mann-Whitney U with midranks and
// Welch / pooled t-tests. Distribution tails come from Boost.Math.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "skintone/error.hpp"

namespace skintone::stats {

struct ContingencyTable {
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<std::vector<std::int64_t>> counts;  // rows x cols

  std::size_t rows() const noexcept { return counts.size(); }
  std::size_t cols() const noexcept { return counts.empty() ? 0 : counts.front().size(); }
};

struct TestResult {
  std::string method;
  double statistic{0.0};
  double p_value{1.0};
  double df{std::numeric_limits<double>::quiet_NaN()};
  std::size_t n1{0};
  std::size_t n2{0};
  double statistic_b{std::numeric_limits<double>::quiet_NaN()};  // U for the second sample
};

/// Upper tail of the chi-square distribution.
inline double chi_square_sf(double x, double df) {
  if (x <= 0.0) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(df), x));
}

inline double normal_sf(double z) {
  return boost::math::cdf(boost::math::complement(boost::math::normal_distribution<double>(), z));
}

/// Pearson chi-square test of independence. With `yates`, 2x2 tables use
/// (|O - E| - 0.5)^2 / E; larger tables ignore the flag.
inline TestResult chi_square(const ContingencyTable& t, bool yates) {
  const std::size_t r = t.rows();
  const std::size_t c = t.cols();
  if (r < 2 || c < 2) throw Error(ErrorCode::invalid_argument, "chi_square needs at least a 2x2 table");
  std::vector<double> row(r, 0.0), col(c, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    if (t.counts[i].size() != c) throw Error(ErrorCode::invalid_argument, "ragged contingency table");
    for (std::size_t j = 0; j < c; ++j) {
      if (t.counts[i][j] < 0) throw Error(ErrorCode::invalid_argument, "negative count");
      row[i] += double(t.counts[i][j]);
      col[j] += double(t.counts[i][j]);
      total += double(t.counts[i][j]);
    }
  }
  for (double m : row) {
    if (m <= 0.0) throw Error(ErrorCode::invalid_argument, "chi_square: zero row marginal");
  }
  for (double m : col) {
    if (m <= 0.0) throw Error(ErrorCode::invalid_argument, "chi_square: zero column marginal");
  }
  const bool correct = yates && r == 2 && c == 2;
  double stat = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const double e = row[i] * col[j] / total;
      double d = std::abs(double(t.counts[i][j]) - e);
      if (correct) d = std::max(0.0, d - 0.5);
      stat += d * d / e;
    }
  }
  TestResult res;
  res.method = correct ? "chi_square_yates" : "chi_square_pearson";
  res.statistic = stat;
  res.df = double((r - 1) * (c - 1));
  res.p_value = chi_square_sf(stat, res.df);
  res.n1 = std::size_t(total);
  return res;
}

/// Midranks (1-based) of the values; ties share the average rank.
inline std::vector<double> midranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * double(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

enum class PValueMode { automatic, exact, normal };

inline constexpr std::size_t kExactMannWhitneyLimit = 10000;  // n1 * n2

namespace detail {

// Two-sided permutation p-value for the rank sum of a size-m subset, over all
// C(N, m) subsets of the pooled (doubled, hence integral) midranks.
inline double exact_rank_sum_p(const std::vector<std::int64_t>& ranks2, std::size_t m,
                               std::int64_t observed2) {
  const std::size_t n = ranks2.size();
  std::vector<std::int64_t> sorted = ranks2;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  std::int64_t max_sum = 0;
  for (std::size_t i = 0; i < m; ++i) max_sum += sorted[i];
  const std::size_t width = std::size_t(max_sum) + 1;
  // ways[j * width + s]: number of j-subsets with doubled rank sum s.
  std::vector<double> ways((m + 1) * width, 0.0);
  ways[0] = 1.0;
  std::int64_t reach = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t v = ranks2[i];
    reach = std::min(max_sum, reach + v);
    for (std::size_t j = std::min(m, i + 1); j >= 1; --j) {
      double* dst = &ways[j * width];
      const double* src = &ways[(j - 1) * width];
      for (std::int64_t s = reach; s >= v; --s) dst[s] += src[s - v];
    }
  }
  // Expected rank sum m(N+1)/2, in doubled units.
  const std::int64_t centre2 = std::int64_t(m) * std::int64_t(n + 1);
  const std::int64_t obs_dev = std::llabs(observed2 - centre2);
  double total = 0.0, extreme = 0.0;
  for (std::int64_t s = 0; s <= max_sum; ++s) {
    const double w = ways[m * width + std::size_t(s)];
    if (w == 0.0) continue;
    total += w;
    if (std::llabs(s - centre2) >= obs_dev) extreme += w;
  }
  return std::min(1.0, extreme / total);
}

}  // namespace detail

/// Mann-Whitney U. `statistic` is U for sample a, `statistic_b` for b.
/// p is two-sided: exact permutation enumeration when n1 * n2 is at most
/// 10,000 (automatic mode), otherwise the tie-corrected normal
/// approximation with continuity correction.
inline TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                                 PValueMode mode = PValueMode::automatic) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::invalid_argument, "mann_whitney_u: empty sample");
  const std::size_t n1 = a.size();
  const std::size_t n2 = b.size();
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = midranks(pooled);
  double r1 = 0.0;
  for (std::size_t i = 0; i < n1; ++i) r1 += ranks[i];
  const double u1 = r1 - double(n1) * double(n1 + 1) / 2.0;
  const double u2 = double(n1) * double(n2) - u1;

  TestResult res;
  res.statistic = u1;
  res.statistic_b = u2;
  res.n1 = n1;
  res.n2 = n2;

  const bool exact = mode == PValueMode::exact ||
                     (mode == PValueMode::automatic && n1 * n2 <= kExactMannWhitneyLimit);
  if (exact) {
    res.method = "mann_whitney_u_exact";
    std::vector<std::int64_t> ranks2(ranks.size());
    for (std::size_t i = 0; i < ranks.size(); ++i) ranks2[i] = std::llround(2.0 * ranks[i]);
    // Enumerate over the smaller sample; the two-sided p is symmetric.
    const bool first_small = n1 <= n2;
    std::int64_t obs2 = 0;
    for (std::size_t i = 0; i < (first_small ? n1 : n2); ++i) {
      obs2 += ranks2[first_small ? i : n1 + i];
    }
    res.p_value = detail::exact_rank_sum_p(ranks2, first_small ? n1 : n2, obs2);
    return res;
  }

  res.method = "mann_whitney_u_normal";
  const double n = double(n1 + n2);
  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = double(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  const double mu = double(n1) * double(n2) / 2.0;
  const double var = double(n1) * double(n2) / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (var <= 0.0) {
    res.p_value = 1.0;
    return res;
  }
  const double z = std::max(0.0, std::abs(u1 - mu) - 0.5) / std::sqrt(var);
  res.p_value = std::min(1.0, 2.0 * normal_sf(z));
  return res;
}

namespace detail {

inline void mean_var(std::span<const double> x, double& mean, double& var) {
  double s = 0.0;
  for (double v : x) s += v;
  mean = s / double(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  var = ss / double(x.size() - 1);
}

}  // namespace detail

/// Two-sample t-test, two-sided. Welch (default) or pooled-variance Student.
inline TestResult t_test(std::span<const double> a, std::span<const double> b, bool welch = true) {
  if (a.size() < 2 || b.size() < 2) {
    throw Error(ErrorCode::invalid_argument, "t_test: each sample needs at least 2 values");
  }
  const double n1 = double(a.size());
  const double n2 = double(b.size());
  double m1, v1, m2, v2;
  detail::mean_var(a, m1, v1);
  detail::mean_var(b, m2, v2);

  TestResult res;
  res.method = welch ? "t_test_welch" : "t_test_pooled";
  res.n1 = a.size();
  res.n2 = b.size();
  double se, df;
  if (welch) {
    const double q1 = v1 / n1;
    const double q2 = v2 / n2;
    se = std::sqrt(q1 + q2);
    df = (q1 + q2) * (q1 + q2) / (q1 * q1 / (n1 - 1.0) + q2 * q2 / (n2 - 1.0));
  } else {
    const double sp2 = ((n1 - 1.0) * v1 + (n2 - 1.0) * v2) / (n1 + n2 - 2.0);
    se = std::sqrt(sp2 * (1.0 / n1 + 1.0 / n2));
    df = n1 + n2 - 2.0;
  }
  if (se == 0.0) {
    if (m1 != m2) throw Error(ErrorCode::invalid_argument, "t_test: zero variance with unequal means");
    res.statistic = 0.0;
    res.p_value = 1.0;
    res.df = n1 + n2 - 2.0;
    return res;
  }
  res.statistic = (m1 - m2) / se;
  res.df = df;
  const boost::math::students_t_distribution<double> dist(df);
  res.p_value = std::min(1.0, 2.0 * boost::math::cdf(dist, -std::abs(res.statistic)));
  return res;
}

}  // namespace skintone::stats
