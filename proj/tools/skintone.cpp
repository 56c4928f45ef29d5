#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "skintone/skintone.hpp"

namespace fs = std::filesystem;
using namespace skintone;

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, p.string() + ": cannot write");
  out << text;
}

nlohmann::json metric_json(const stats::MetricSummary& m) {
  nlohmann::json j{{"n", m.n}};
  if (m.kind == stats::MetricKind::continuous) {
    j["mean"] = m.mean;
    j["sd"] = m.sd;
    j["median"] = m.median;
  } else {
    if (m.kind == stats::MetricKind::ordinal) {
      j["median"] = m.median_label;
      j["median_rule"] = "lower middle category for even n";
    }
    nlohmann::json dist = nlohmann::json::array();
    for (const auto& c : m.distribution) {
      dist.push_back({{"label", c.label}, {"count", c.count}, {"percent", c.percent}});
    }
    j["distribution"] = std::move(dist);
  }
  return j;
}

nlohmann::json test_json(const stats::TestResult& r) {
  nlohmann::json j{{"method", r.method}, {"statistic", r.statistic}, {"p_value", r.p_value}};
  if (!std::isnan(r.df)) j["df"] = r.df;
  if (r.n2) {
    j["n1"] = r.n1;
    j["n2"] = r.n2;
  }
  if (!std::isnan(r.statistic_b)) j["statistic_b"] = r.statistic_b;
  return j;
}

// Two-level comparisons on the first grouping field.
nlohmann::json comparison_tests(const std::vector<AnalysisRecord>& records, const std::string& field) {
  std::vector<std::string> levels;
  for (const auto& r : records) {
    const auto v = stats::group_value(r, field);
    if (std::find(levels.begin(), levels.end(), v) == levels.end()) levels.push_back(v);
  }
  std::sort(levels.begin(), levels.end());
  nlohmann::json out{{"field", field}, {"levels", levels}};
  if (levels.size() != 2) {
    out["note"] = "tests need exactly two levels";
    return out;
  }
  auto contingency = [&](const std::string& cat) {
    stats::ContingencyTable t;
    std::map<std::string, std::size_t> col;
    for (const auto& r : records) col.emplace(stats::group_value(r, cat), 0);
    for (auto& [k, v] : col) {
      v = t.col_labels.size();
      t.col_labels.push_back(k);
    }
    t.row_labels = levels;
    t.counts.assign(2, std::vector<std::int64_t>(col.size(), 0));
    for (const auto& r : records) {
      const std::size_t row = stats::group_value(r, field) == levels[0] ? 0 : 1;
      ++t.counts[row][col[stats::group_value(r, cat)]];
    }
    return t;
  };
  auto samples = [&](auto get) {
    std::array<std::vector<double>, 2> s;
    for (const auto& r : records) {
      if (auto v = get(r)) s[stats::group_value(r, field) == levels[0] ? 0 : 1].push_back(*v);
    }
    return s;
  };
  auto attempt = [&](const char* name, auto fn) {
    try {
      out[name] = test_json(fn());
    } catch (const Error& e) {
      out[name] = {{"error", e.what()}};
    }
  };
  attempt("gender_chi_square", [&] { return stats::chi_square(contingency("gender"), true); });
  attempt("race_chi_square", [&] { return stats::chi_square(contingency("race"), false); });
  for (const char* scale : {"mst", "perla", "fst"}) {
    const auto s = samples([&](const AnalysisRecord& r) -> std::optional<double> {
      const std::string sc = scale;
      return double(sc == "mst" ? r.mst.index : sc == "perla" ? r.perla.index : r.fst.index);
    });
    attempt((std::string(scale) + "_mann_whitney").c_str(), [&] { return stats::mann_whitney_u(s[0], s[1]); });
  }
  const auto ages = samples([](const AnalysisRecord& r) { return r.age; });
  attempt("age_t_test", [&] { return stats::t_test(ages[0], ages[1], true); });
  return out;
}

int cmd_analyze(const std::string& manifest, const std::string& out, const std::string& config,
                const std::string& palettes, const std::string& topology, unsigned jobs) {
  AnalysisContext ctx(config.empty() ? default_config() : load_config(config),
                      palettes.empty() ? default_palettes() : load_palettes(palettes),
                      topology.empty() ? default_topology() : load_topology(topology));
  const auto m = read_manifest(manifest);
  const auto run = run_corpus(m, ctx, jobs);
  write_run(run, ctx, out);
  std::cout << fmt::format("{} entries: {} records, {} skipped\n", run.summary.total, run.summary.records,
                           run.summary.skipped);
  for (const auto& [reason, n] : run.summary.skip_reasons) std::cout << fmt::format("  skip {}: {}\n", reason, n);
  return 0;
}

int cmd_stats(const std::string& records_path, const std::string& group_by, const std::string& fields,
              const std::string& out) {
  const auto records = read_records(records_path);
  const auto keys = split_list(group_by);
  const auto metrics = split_list(fields);
  const auto groups = stats::summarize(records, keys, metrics);

  nlohmann::json j{{"group_by", keys}, {"fields", metrics}, {"groups", nlohmann::json::array()}};
  std::string csv = "";
  for (const auto& k : keys) csv += k + ",";
  csv += "n,metric,statistic,value\n";
  for (const auto& g : groups) {
    nlohmann::json jg{{"key", g.key}, {"n", g.n}};
    std::string prefix;
    for (const auto& k : g.key) prefix += csv_escape(k) + ",";
    prefix += std::to_string(g.n) + ",";
    for (const auto& [name, m] : g.metrics) {
      jg["metrics"][name] = metric_json(m);
      if (m.kind == stats::MetricKind::continuous) {
        csv += prefix + name + ",mean," + report::exact(m.mean) + "\n";
        csv += prefix + name + ",sd," + report::exact(m.sd) + "\n";
        csv += prefix + name + ",median," + report::exact(m.median) + "\n";
      } else {
        if (m.kind == stats::MetricKind::ordinal) csv += prefix + name + ",median," + csv_escape(m.median_label) + "\n";
        for (const auto& c : m.distribution) {
          csv += prefix + name + ",percent:" + csv_escape(c.label) + "," + report::exact(c.percent) + "\n";
        }
      }
    }
    j["groups"].push_back(std::move(jg));
  }
  write_file(fs::path(out) / "summary.json", j.dump(2) + "\n");
  write_file(fs::path(out) / "summary.csv", csv);
  if (!keys.empty()) write_file(fs::path(out) / "tests.json", comparison_tests(records, keys.front()).dump(2) + "\n");
  std::cout << fmt::format("{} records in {} groups\n", records.size(), groups.size());
  return 0;
}

int cmd_report(const std::string& records_path, const std::string& out, const std::string& palettes) {
  const auto records = read_records(records_path);
  const PaletteSet pal = palettes.empty() ? default_palettes() : load_palettes(palettes);
  report::emit_tables(records, report::table_ids(), out, &pal);
  report::emit_plots(records, out, &pal);
  std::cout << fmt::format("report for {} records written to {}\n", records.size(), out);
  return 0;
}

int cmd_fixtures(const std::string& out) {
  const auto manifest = fixtures::write_corpus(out, default_palettes(), default_topology());
  std::cout << manifest.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Skin tone and demographic auditing for face-image corpora"};
  app.require_subcommand(1);

  std::string manifest, out, config, palettes, topology, records, group_by = "model,prompt";
  std::string fields = "age,mst,perla,fst,gender,race";
  unsigned jobs = 1;

  auto* analyze = app.add_subcommand("analyze", "Measure every image in a manifest");
  analyze->add_option("--manifest", manifest, "CSV or JSONL manifest")->required();
  analyze->add_option("--out", out, "Output records file (.jsonl)")->required();
  analyze->add_option("--config", config, "Pipeline config JSON");
  analyze->add_option("--palettes", palettes, "Palette JSON");
  analyze->add_option("--topology", topology, "Landmark topology JSON");
  analyze->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* st = app.add_subcommand("stats", "Grouped summaries and two-group tests");
  st->add_option("--records", records, "Records file")->required();
  st->add_option("--group-by", group_by, "Comma-separated grouping fields");
  st->add_option("--fields", fields, "Comma-separated metrics");
  st->add_option("--out", out, "Output directory")->required();

  auto* rep = app.add_subcommand("report", "Tables and plots");
  rep->add_option("--records", records, "Records file")->required();
  rep->add_option("--out", out, "Output directory")->required();
  rep->add_option("--palettes", palettes, "Palette JSON");

  auto* fx = app.add_subcommand("fixtures", "Write the synthetic fixture corpus");
  fx->add_option("--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(manifest, out, config, palettes, topology, jobs);
    if (st->parsed()) return cmd_stats(records, group_by, fields, out);
    if (rep->parsed()) return cmd_report(records, out, palettes);
    if (fx->parsed()) return cmd_fixtures(out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
