#pragma once

// Grouped descriptive statistics over analysis records.

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "skintone/error.hpp"
#include "skintone/record.hpp"

namespace skintone::stats {

enum class MetricKind { continuous, ordinal, categorical };

struct CategoryCount {
  std::string label;
  int ordinal{0};  // scale index for ordinal metrics, 0 otherwise
  std::size_t count{0};
  double percent{0.0};
};

struct MetricSummary {
  std::string name;
  MetricKind kind{MetricKind::continuous};
  std::size_t n{0};
  double mean{0.0};
  double sd{0.0};
  double median{0.0};
  std::string median_label;  // ordinal: lower-middle category for even n
  std::vector<CategoryCount> distribution;

  std::size_t count_of(const std::string& label) const {
    for (const auto& c : distribution) {
      if (c.label == label) return c.count;
    }
    return 0;
  }

  double percent_of(const std::string& label) const {
    for (const auto& c : distribution) {
      if (c.label == label) return c.percent;
    }
    return 0.0;
  }
};

struct GroupSummary {
  std::vector<std::string> key;
  std::size_t n{0};
  std::map<std::string, MetricSummary> metrics;

  const MetricSummary& metric(const std::string& name) const {
    auto it = metrics.find(name);
    if (it == metrics.end()) throw Error(ErrorCode::invalid_argument, "no metric '" + name + "' in summary");
    return it->second;
  }
};

/// Share of n as a percentage, computed as (count / n) * 100 so rounding
/// to one decimal matches the usual float formatting of that quotient.
inline double percent(std::size_t count, std::size_t n) {
  return n == 0 ? 0.0 : double(count) / double(n) * 100.0;
}

inline const std::vector<std::string>& group_fields() {
  static const std::vector<std::string> f{"model", "prompt", "gender", "race", "expression", "fst"};
  return f;
}

inline MetricKind metric_kind(const std::string& name) {
  if (name == "age" || name == "mst" || name == "perla") return MetricKind::continuous;
  if (name == "fst") return MetricKind::ordinal;
  if (name == "gender" || name == "race") return MetricKind::categorical;
  throw Error(ErrorCode::invalid_argument, "unknown metric field '" + name + "'");
}

inline std::string group_value(const AnalysisRecord& r, const std::string& field) {
  if (field == "model") return r.model;
  if (field == "prompt") return r.prompt;
  if (field == "gender") return r.gender;
  if (field == "race") return r.race;
  if (field == "expression") return r.expression;
  if (field == "fst") return r.fst.label;
  throw Error(ErrorCode::invalid_argument, "unknown group-by field '" + field + "'");
}

namespace detail {

inline void describe_continuous(std::vector<double> v, MetricSummary& m) {
  m.n = v.size();
  if (v.empty()) return;
  double s = 0.0;
  for (double x : v) s += x;
  m.mean = s / double(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.sd = std::sqrt(ss / double(v.size() - 1));
  }
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  m.median = v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace detail

inline MetricSummary summarize_metric(std::span<const AnalysisRecord* const> rows, const std::string& name) {
  MetricSummary m;
  m.name = name;
  m.kind = metric_kind(name);
  if (m.kind == MetricKind::continuous) {
    std::vector<double> v;
    for (const auto* r : rows) {
      if (name == "age") {
        if (r->age) v.push_back(*r->age);
      } else if (name == "mst") {
        v.push_back(double(r->mst.index));
      } else {
        v.push_back(double(r->perla.index));
      }
    }
    detail::describe_continuous(std::move(v), m);
    return m;
  }
  if (m.kind == MetricKind::ordinal) {
    std::map<int, CategoryCount> cats;
    std::vector<int> idx;
    for (const auto* r : rows) {
      auto& c = cats[r->fst.index];
      c.label = r->fst.label;
      c.ordinal = r->fst.index;
      ++c.count;
      idx.push_back(r->fst.index);
    }
    m.n = idx.size();
    if (!idx.empty()) {
      std::sort(idx.begin(), idx.end());
      const int med = idx[(idx.size() - 1) / 2];
      m.median = med;
      m.median_label = cats[med].label;
    }
    for (auto& [k, c] : cats) {
      c.percent = percent(c.count, m.n);
      m.distribution.push_back(c);
    }
    return m;
  }
  std::map<std::string, std::size_t> cats;
  for (const auto* r : rows) ++cats[name == "gender" ? r->gender : r->race];
  m.n = rows.size();
  for (const auto& [label, count] : cats) {
    m.distribution.push_back({label, 0, count, percent(count, m.n)});
  }
  return m;
}

/// Groups records by the listed fields (lexicographic key order) and
/// summarizes each requested metric per group. Continuous metrics report
/// mean, sample SD and median; the ordinal FST reports a floor median and
/// its distribution; categorical fields report counts and percentages.
inline std::vector<GroupSummary> summarize(std::span<const AnalysisRecord> records,
                                           const std::vector<std::string>& group_by,
                                           const std::vector<std::string>& fields) {
  for (const auto& f : fields) metric_kind(f);
  std::map<std::vector<std::string>, std::vector<const AnalysisRecord*>> groups;
  for (const auto& r : records) {
    std::vector<std::string> key;
    key.reserve(group_by.size());
    for (const auto& g : group_by) key.push_back(group_value(r, g));
    groups[std::move(key)].push_back(&r);
  }
  if (records.empty()) {
    for (const auto& g : group_by) group_value(AnalysisRecord{}, g);
  }
  std::vector<GroupSummary> out;
  for (const auto& [key, rows] : groups) {
    GroupSummary gs;
    gs.key = key;
    gs.n = rows.size();
    for (const auto& f : fields) gs.metrics[f] = summarize_metric(rows, f);
    out.push_back(std::move(gs));
  }
  return out;
}

}  // namespace skintone::stats
