#pragma once

// Corpus tables (Markdown + CSV) and SVG bar charts built from records.

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "skintone/error.hpp"
#include "skintone/record.hpp"
#include "skintone/scales.hpp"
#include "skintone/stats.hpp"
#include "skintone/summary.hpp"

namespace skintone::report {

// printf-style fixed formatting; the C locale is never changed, so the
// decimal separator is always a period.
inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string thousands(std::size_t n) {
  std::string s = std::to_string(n);
  for (int i = int(s.size()) - 3; i > 0; i -= 3) s.insert(std::size_t(i), ",");
  return s;
}

inline std::string format_p(double p) {
  if (p < 1e-12) return "<1e-12";
  return fmt::format("{:.3g}", p);
}

/// Shortest decimal that reads back to the same double.
inline std::string exact(double v) { return fmt::format("{}", v); }

struct Cell {
  enum class Kind { text, count_percent, percent, mean_sd, number };
  Kind kind{Kind::text};
  std::string text;
  std::size_t count{0};
  double value{0.0};  // percent, mean or number
  double sd{0.0};
  int digits{1};

  static Cell str(std::string s) { return {Kind::text, std::move(s)}; }
  static Cell count_pct(std::size_t c, double pct) { return {Kind::count_percent, "", c, pct}; }
  static Cell pct(double p) { return {Kind::percent, "", 0, p}; }
  static Cell mean_sd(double m, double s) { return {Kind::mean_sd, "", 0, m, s, 2}; }
  static Cell num(double v, int digits) { return {Kind::number, "", 0, v, 0.0, digits}; }
  static Cell count_only(std::size_t c) { return {Kind::count_percent, "count", c, 0.0}; }
};

struct Table {
  std::string id;    // T1..T7
  std::string name;  // file stem suffix
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::string> notes;

  std::string file_stem() const { return id + "_" + name; }
};

inline Table make_table(std::string id, std::string name, std::string title) {
  Table t;
  t.id = std::move(id);
  t.name = std::move(name);
  t.title = std::move(title);
  return t;
}

inline std::string md_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += "\\|";
    else out.push_back(c);
  }
  return out;
}

inline std::string render_md_cell(const Cell& c) {
  switch (c.kind) {
    case Cell::Kind::text: return md_escape(c.text);
    case Cell::Kind::count_percent:
      if (c.text == "count") return thousands(c.count);
      return thousands(c.count) + " (" + fixed(c.value, 1) + "%)";
    case Cell::Kind::percent: return fixed(c.value, 1);
    case Cell::Kind::mean_sd: return fixed(c.value, c.digits) + " ± " + fixed(c.sd, c.digits);
    case Cell::Kind::number: return fixed(c.value, c.digits);
  }
  return {};
}

inline std::string render_markdown(const Table& t) {
  std::string out = "# " + t.id + ". " + t.title + "\n\n|";
  for (const auto& c : t.columns) out += " " + md_escape(c) + " |";
  out += "\n|";
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += i == 0 ? " --- |" : " ---: |";
  out += "\n";
  for (const auto& row : t.rows) {
    out += "|";
    for (const auto& c : row) out += " " + render_md_cell(c) + " |";
    out += "\n";
  }
  if (!t.notes.empty()) out += "\n";
  for (const auto& n : t.notes) out += n + "\n";
  return out;
}

/// CSV splits compound cells: "count (pct%)" becomes two columns, as does
/// "mean ± sd". No thousands separators.
inline std::string render_csv(const Table& t) {
  std::vector<std::string> header;
  std::vector<int> width(t.columns.size(), 1);
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size() && i < width.size(); ++i) {
      const auto& c = row[i];
      if ((c.kind == Cell::Kind::count_percent && c.text != "count") || c.kind == Cell::Kind::mean_sd) {
        width[i] = 2;
      }
    }
  }
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (width[i] == 2) {
      const bool ms = std::any_of(t.rows.begin(), t.rows.end(),
                                  [&](const auto& r) { return r[i].kind == Cell::Kind::mean_sd; });
      header.push_back(t.columns[i] + (ms ? " mean" : " n"));
      header.push_back(t.columns[i] + (ms ? " sd" : " %"));
    } else {
      header.push_back(t.columns[i]);
    }
  }
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + csv_escape(header[i]);
  out += "\n";
  for (const auto& row : t.rows) {
    std::vector<std::string> f;
    for (std::size_t i = 0; i < row.size(); ++i) {
      const auto& c = row[i];
      switch (c.kind) {
        case Cell::Kind::text: f.push_back(c.text); break;
        case Cell::Kind::count_percent:
          f.push_back(std::to_string(c.count));
          if (width[i] == 2) f.push_back(c.text == "count" ? "" : fixed(c.value, 1));
          break;
        case Cell::Kind::percent: f.push_back(fixed(c.value, 1)); break;
        case Cell::Kind::mean_sd:
          f.push_back(fixed(c.value, c.digits));
          f.push_back(fixed(c.sd, c.digits));
          break;
        case Cell::Kind::number: f.push_back(fixed(c.value, c.digits)); break;
      }
      if (width[i] == 2 && c.kind == Cell::Kind::text) f.push_back("");
    }
    for (std::size_t i = 0; i < f.size(); ++i) out += (i ? "," : "") + csv_escape(f[i]);
    out += "\n";
  }
  return out;
}

namespace detail {

inline std::vector<std::string> levels(std::span<const AnalysisRecord> records, const std::string& field) {
  std::set<std::string> s;
  for (const auto& r : records) s.insert(stats::group_value(r, field));
  return {s.begin(), s.end()};
}

/// Category labels of a categorical field, most frequent first.
inline std::vector<std::string> by_frequency(std::span<const AnalysisRecord> records,
                                             const std::string& field) {
  std::map<std::string, std::size_t> counts;
  for (const auto& r : records) ++counts[stats::group_value(r, field)];
  std::vector<std::pair<std::string, std::size_t>> v(counts.begin(), counts.end());
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (const auto& [k, _] : v) out.push_back(k);
  return out;
}

inline std::map<std::vector<std::string>, stats::GroupSummary> keyed(
    std::span<const AnalysisRecord> records, const std::vector<std::string>& group_by,
    const std::vector<std::string>& fields) {
  std::map<std::vector<std::string>, stats::GroupSummary> out;
  for (auto& g : stats::summarize(records, group_by, fields)) out.emplace(g.key, std::move(g));
  return out;
}

inline std::optional<stats::TestResult> try_chi_square(const stats::ContingencyTable& t, bool yates) {
  try {
    return stats::chi_square(t, yates);
  } catch (const Error&) {
    return std::nullopt;
  }
}

inline std::string chi_note(const std::optional<stats::TestResult>& r) {
  if (!r) return "Chi-square test not computable for this table.";
  return fmt::format("Chi-square ({}): {}, df = {}, p {}", r->method == "chi_square_yates" ? "Yates" : "Pearson",
                     fixed(r->statistic, 2), fixed(r->df, 0),
                     r->p_value < 1e-12 ? "<1e-12" : "= " + format_p(r->p_value));
}

inline std::vector<std::string> fst_labels(const PaletteSet* palettes, std::span<const AnalysisRecord> records) {
  std::map<int, std::string> labels;
  if (palettes) {
    const auto& p = palettes->get("FST");
    for (std::size_t i = 0; i < p.size(); ++i) labels[int(i) + 1] = p.entries[i].label;
  }
  for (const auto& r : records) labels.try_emplace(r.fst.index, r.fst.label);
  std::vector<std::string> out;
  for (const auto& [_, l] : labels) out.push_back(l);
  return out;
}

}  // namespace detail

inline Table gender_by_model(std::span<const AnalysisRecord> records) {
  Table t = make_table("T1", "gender_by_model", "Predicted gender distribution by model");
  const auto models = detail::levels(records, "model");
  const auto genders = detail::by_frequency(records, "gender");
  t.columns = {"Model", "Total Images"};
  for (const auto& g : genders) t.columns.push_back(g);
  const auto groups = detail::keyed(records, {"model"}, {"gender"});
  stats::ContingencyTable ct;
  ct.col_labels = genders;
  for (const auto& m : models) {
    const auto& gs = groups.at({m});
    const auto& dist = gs.metric("gender");
    std::vector<Cell> row{Cell::str(m), Cell::count_only(gs.n)};
    std::vector<std::int64_t> counts;
    for (const auto& g : genders) {
      row.push_back(Cell::count_pct(dist.count_of(g), stats::percent(dist.count_of(g), gs.n)));
      counts.push_back(std::int64_t(dist.count_of(g)));
    }
    t.rows.push_back(std::move(row));
    ct.row_labels.push_back(m);
    ct.counts.push_back(std::move(counts));
  }
  if (!records.empty()) {
    const auto all = stats::summarize(records, {}, {"gender"}).front();
    std::vector<Cell> row{Cell::str("Combined"), Cell::count_only(all.n)};
    for (const auto& g : genders) {
      const auto c = all.metric("gender").count_of(g);
      row.push_back(Cell::count_pct(c, stats::percent(c, all.n)));
    }
    t.rows.push_back(std::move(row));
    t.notes.push_back(detail::chi_note(detail::try_chi_square(ct, true)));
  }
  return t;
}

inline Table gender_by_prompt(std::span<const AnalysisRecord> records) {
  Table t = make_table("T2", "gender_by_prompt", "Predicted gender distribution by prompt and model (%)");
  const auto models = detail::levels(records, "model");
  const auto prompts = detail::levels(records, "prompt");
  const auto genders = detail::levels(records, "gender");
  t.columns = {"Prompt"};
  for (const auto& m : models) {
    for (const auto& g : genders) t.columns.push_back(m + " " + g + " (%)");
  }
  const auto groups = detail::keyed(records, {"prompt", "model"}, {"gender"});
  for (const auto& p : prompts) {
    std::vector<Cell> row{Cell::str(p)};
    for (const auto& m : models) {
      auto it = groups.find({p, m});
      for (const auto& g : genders) {
        row.push_back(it == groups.end() ? Cell::str("n/a") : Cell::pct(it->second.metric("gender").percent_of(g)));
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline Table race_by_model(std::span<const AnalysisRecord> records) {
  Table t = make_table("T3", "race_by_model", "Predicted race distribution across models");
  const auto models = detail::levels(records, "model");
  const auto races = detail::by_frequency(records, "race");
  const auto groups = detail::keyed(records, {"model"}, {"race"});
  t.columns = {"Race Category"};
  for (const auto& m : models) t.columns.push_back(m + " (n=" + std::to_string(groups.at({m}).n) + ")");
  t.columns.push_back("Combined (n=" + std::to_string(records.size()) + ")");
  stats::ContingencyTable ct;
  ct.row_labels = models;
  ct.col_labels = races;
  ct.counts.assign(models.size(), std::vector<std::int64_t>(races.size(), 0));
  for (std::size_t ri = 0; ri < races.size(); ++ri) {
    const auto& race = races[ri];
    std::vector<Cell> row{Cell::str(race)};
    std::size_t total = 0;
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
      const auto& gs = groups.at({models[mi]});
      const auto c = gs.metric("race").count_of(race);
      total += c;
      ct.counts[mi][ri] = std::int64_t(c);
      row.push_back(Cell::count_pct(c, stats::percent(c, gs.n)));
    }
    row.push_back(Cell::count_pct(total, stats::percent(total, records.size())));
    t.rows.push_back(std::move(row));
  }
  if (!records.empty()) t.notes.push_back(detail::chi_note(detail::try_chi_square(ct, false)));
  return t;
}

inline Table age_by_prompt(std::span<const AnalysisRecord> records) {
  Table t = make_table("T4", "age_by_prompt", "Mean predicted age by prompt and model (years)");
  const auto models = detail::levels(records, "model");
  const auto prompts = detail::levels(records, "prompt");
  t.columns = {"Prompt"};
  for (const auto& m : models) t.columns.push_back(m + " Mean Age");
  const auto groups = detail::keyed(records, {"prompt", "model"}, {"age"});
  auto cell = [](const stats::MetricSummary& s) { return s.n ? Cell::num(s.mean, 1) : Cell::str("n/a"); };
  for (const auto& p : prompts) {
    std::vector<Cell> row{Cell::str(p)};
    for (const auto& m : models) {
      auto it = groups.find({p, m});
      row.push_back(it == groups.end() ? Cell::str("n/a") : cell(it->second.metric("age")));
    }
    t.rows.push_back(std::move(row));
  }
  if (!models.empty()) {
    const auto overall = detail::keyed(records, {"model"}, {"age"});
    std::vector<Cell> row{Cell::str("Overall Mean")};
    for (const auto& m : models) row.push_back(cell(overall.at({m}).metric("age")));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline Table mean_scale_by_prompt(std::span<const AnalysisRecord> records, const std::string& field,
                                  std::string id, std::string name, std::string title) {
  Table t = make_table(std::move(id), std::move(name), std::move(title));
  const auto models = detail::levels(records, "model");
  const auto prompts = detail::levels(records, "prompt");
  t.columns = {"Prompt"};
  for (const auto& m : models) t.columns.push_back(m + " (Mean ± SD)");
  const auto groups = detail::keyed(records, {"prompt", "model"}, {field});
  for (const auto& p : prompts) {
    std::vector<Cell> row{Cell::str(p)};
    for (const auto& m : models) {
      auto it = groups.find({p, m});
      if (it == groups.end()) {
        row.push_back(Cell::str("n/a"));
      } else {
        const auto& s = it->second.metric(field);
        row.push_back(Cell::mean_sd(s.mean, s.sd));
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline Table fst_by_prompt(std::span<const AnalysisRecord> records, const PaletteSet* palettes) {
  Table t = make_table("T7", "fst_by_prompt", "Fitzpatrick skin type distribution by prompt and model (%)");
  const auto labels = detail::fst_labels(palettes, records);
  t.columns = {"Prompt", "Model"};
  t.columns.insert(t.columns.end(), labels.begin(), labels.end());
  for (const auto& [key, gs] : detail::keyed(records, {"prompt", "model"}, {"fst"})) {
    std::vector<Cell> row{Cell::str(key[0]), Cell::str(key[1])};
    for (const auto& l : labels) row.push_back(Cell::pct(gs.metric("fst").percent_of(l)));
    t.rows.push_back(std::move(row));
  }
  t.notes.push_back("Ordinal medians use the lower middle category for even counts.");
  return t;
}

inline const std::vector<std::string>& table_ids() {
  static const std::vector<std::string> ids{"T1", "T2", "T3", "T4", "T5", "T6", "T7"};
  return ids;
}

inline Table build_table(const std::string& id, std::span<const AnalysisRecord> records,
                         const PaletteSet* palettes) {
  if (id == "T1") return gender_by_model(records);
  if (id == "T2") return gender_by_prompt(records);
  if (id == "T3") return race_by_model(records);
  if (id == "T4") return age_by_prompt(records);
  if (id == "T5") return mean_scale_by_prompt(records, "mst", "T5", "mst_by_prompt", "Mean Monk skin tone by prompt and model");
  if (id == "T6") return mean_scale_by_prompt(records, "perla", "T6", "perla_by_prompt", "Mean PERLA skin tone by prompt and model");
  if (id == "T7") return fst_by_prompt(records, palettes);
  throw Error(ErrorCode::invalid_argument, "unknown table '" + id + "'");
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, p.string() + ": cannot write");
  out << text;
}

/// Writes tables/<id>_<name>.md and .csv for each requested table.
inline std::vector<Table> emit_tables(std::span<const AnalysisRecord> records, const std::vector<std::string>& ids,
                                      const std::filesystem::path& out, const PaletteSet* palettes = nullptr) {
  std::vector<Table> tables;
  for (const auto& id : ids) tables.push_back(build_table(id, records, palettes));
  for (const auto& t : tables) {
    write_text(out / "tables" / (t.file_stem() + ".md"), render_markdown(t));
    write_text(out / "tables" / (t.file_stem() + ".csv"), render_csv(t));
  }
  return tables;
}

// ---------------------------------------------------------------- plots

struct BarDatum {
  std::string group;
  std::string series;
  double value{0.0};
  std::optional<double> sd;
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

inline constexpr std::array<const char*, 8> kSeriesColors{"#e07b39", "#3a6ea5", "#5b9e4d", "#c0392b",
                                                          "#8e6bbf", "#8c564b", "#d4a017", "#7f7f7f"};

inline constexpr double kPlotHeight = 300.0;
inline constexpr double kMarginLeft = 60.0;
inline constexpr double kMarginTop = 40.0;

inline std::string svg_open(double width, double height, const std::string& title) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n"
      "<title>{}</title>\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n",
      width, height, width, height, xml_escape(title), kMarginLeft, xml_escape(title));
}

inline std::string axis(double y_max, double plot_w, const std::string& y_label) {
  const double base = kMarginTop + kPlotHeight;
  std::string s = fmt::format(
      "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n"
      "<line x1=\"{0}\" y1=\"{2}\" x2=\"{3}\" y2=\"{2}\" stroke=\"black\"/>\n"
      "<text x=\"14\" y=\"{4}\" font-family=\"sans-serif\" font-size=\"11\" "
      "transform=\"rotate(-90 14 {4})\">{5}</text>\n",
      kMarginLeft, kMarginTop, base, kMarginLeft + plot_w, kMarginTop + kPlotHeight / 2, xml_escape(y_label));
  for (int i = 0; i <= 5; ++i) {
    const double v = y_max * i / 5.0;
    const double y = base - kPlotHeight * i / 5.0;
    s += fmt::format(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{}</text>\n",
        kMarginLeft - 4, y + 3, fixed(v, y_max >= 20 ? 0 : 1));
  }
  return s;
}

}  // namespace detail

/// Grouped bar chart. Each bar is drawn in data units under a scale
/// transform, so its height attribute equals the plotted value.
inline std::string grouped_bars_svg(const std::string& title, const std::string& y_label,
                                    const std::vector<BarDatum>& data, double y_max) {
  std::vector<std::string> groups, series;
  for (const auto& d : data) {
    if (std::find(groups.begin(), groups.end(), d.group) == groups.end()) groups.push_back(d.group);
    if (std::find(series.begin(), series.end(), d.series) == series.end()) series.push_back(d.series);
  }
  const double bar_w = 24.0;
  const double group_w = bar_w * double(std::max<std::size_t>(series.size(), 1)) + 24.0;
  const double plot_w = std::max(200.0, group_w * double(groups.size()) + 20.0);
  const double width = detail::kMarginLeft + plot_w + 160.0;
  const double height = detail::kMarginTop + detail::kPlotHeight + 60.0;
  const double base = detail::kMarginTop + detail::kPlotHeight;
  const double k = detail::kPlotHeight / y_max;

  std::string s = detail::svg_open(width, height, title) + detail::axis(y_max, plot_w, y_label);
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const double gx = detail::kMarginLeft + 12.0 + group_w * double(gi);
    s += fmt::format(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">{}</text>\n",
        gx + (group_w - 24.0) / 2, base + 16, detail::xml_escape(groups[gi]));
  }
  for (const auto& d : data) {
    const auto gi = std::size_t(std::find(groups.begin(), groups.end(), d.group) - groups.begin());
    const auto si = std::size_t(std::find(series.begin(), series.end(), d.series) - series.begin());
    const double x = detail::kMarginLeft + 12.0 + group_w * double(gi) + bar_w * double(si);
    s += fmt::format(
        "<g class=\"bar\" data-group=\"{}\" data-series=\"{}\" data-value=\"{}\"{} "
        "transform=\"translate({},{}) scale(1,{})\">\n"
        "  <rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n",
        detail::xml_escape(d.group), detail::xml_escape(d.series), exact(d.value),
        d.sd ? fmt::format(" data-sd=\"{}\"", exact(*d.sd)) : std::string(), x, base, -k, bar_w - 2,
        exact(d.value), detail::kSeriesColors[si % detail::kSeriesColors.size()]);
    if (d.sd) {
      const double lo = d.value - *d.sd;
      const double hi = d.value + *d.sd;
      s += fmt::format(
          "  <line class=\"whisker\" data-low=\"{0}\" data-high=\"{1}\" x1=\"{2}\" y1=\"{0}\" x2=\"{2}\" "
          "y2=\"{1}\" stroke=\"black\" vector-effect=\"non-scaling-stroke\"/>\n",
          exact(lo), exact(hi), (bar_w - 2) / 2);
    }
    s += "</g>\n";
  }
  for (std::size_t si = 0; si < series.size(); ++si) {
    const double ly = detail::kMarginTop + 16.0 * double(si);
    s += fmt::format(
        "<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/>"
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
        detail::kMarginLeft + plot_w + 20, ly, detail::kSeriesColors[si % detail::kSeriesColors.size()],
        detail::kMarginLeft + plot_w + 36, ly + 9, detail::xml_escape(series[si]));
  }
  return s + "</svg>\n";
}

struct StackedBar {
  std::string label;
  std::vector<std::pair<std::string, double>> segments;  // category, percent
};

inline std::string stacked_bars_svg(const std::string& title, const std::vector<StackedBar>& bars) {
  const double bar_w = 28.0;
  const double step = bar_w + 16.0;
  const double plot_w = std::max(200.0, step * double(bars.size()) + 20.0);
  const double width = detail::kMarginLeft + plot_w + 120.0;
  const double height = detail::kMarginTop + detail::kPlotHeight + 110.0;
  const double base = detail::kMarginTop + detail::kPlotHeight;
  const double k = detail::kPlotHeight / 100.0;
  std::vector<std::string> categories;
  std::string s = detail::svg_open(width, height, title) + detail::axis(100.0, plot_w, "%");
  for (std::size_t bi = 0; bi < bars.size(); ++bi) {
    const auto& b = bars[bi];
    const double x = detail::kMarginLeft + 12.0 + step * double(bi);
    s += fmt::format("<g class=\"stack\" data-label=\"{}\" transform=\"translate({},{}) scale(1,{})\">\n",
                     detail::xml_escape(b.label), x, base, -k);
    double y = 0.0;
    for (const auto& [cat, pct] : b.segments) {
      auto it = std::find(categories.begin(), categories.end(), cat);
      if (it == categories.end()) it = categories.insert(categories.end(), cat);
      const auto ci = std::size_t(it - categories.begin());
      s += fmt::format(
          "  <rect class=\"segment\" data-category=\"{}\" data-value=\"{}\" x=\"0\" y=\"{}\" width=\"{}\" "
          "height=\"{}\" fill=\"{}\"/>\n",
          detail::xml_escape(cat), exact(pct), exact(y), bar_w, exact(pct),
          detail::kSeriesColors[ci % detail::kSeriesColors.size()]);
      y += pct;
    }
    s += "</g>\n";
    s += fmt::format(
        "<text x=\"{0}\" y=\"{1}\" font-family=\"sans-serif\" font-size=\"9\" "
        "transform=\"rotate(60 {0} {1})\">{2}</text>\n",
        x + 4, base + 10, detail::xml_escape(b.label));
  }
  for (std::size_t ci = 0; ci < categories.size(); ++ci) {
    const double ly = detail::kMarginTop + 16.0 * double(ci);
    s += fmt::format(
        "<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/>"
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
        detail::kMarginLeft + plot_w + 20, ly, detail::kSeriesColors[ci % detail::kSeriesColors.size()],
        detail::kMarginLeft + plot_w + 36, ly + 9, detail::xml_escape(categories[ci]));
  }
  return s + "</svg>\n";
}

inline std::string palettes_svg(const PaletteSet& palettes) {
  const double sw = 40.0;
  const double row_h = 60.0;
  std::size_t widest = 0;
  for (const auto& p : palettes.palettes) widest = std::max(widest, p.size());
  const double width = 80.0 + sw * double(widest) + 20.0;
  const double height = 40.0 + row_h * double(palettes.palettes.size());
  std::string s = detail::svg_open(width, height, "Reference palettes");
  for (std::size_t pi = 0; pi < palettes.palettes.size(); ++pi) {
    const auto& p = palettes.palettes[pi];
    const double y = 40.0 + row_h * double(pi);
    s += fmt::format("<text x=\"8\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n", y + 24,
                     detail::xml_escape(p.name));
    for (std::size_t i = 0; i < p.size(); ++i) {
      const auto& e = p.entries[i];
      const Rgb8 c = lab_to_srgb(e.reference);
      const double x = 80.0 + sw * double(i);
      s += fmt::format(
          "<rect class=\"swatch\" data-scale=\"{}\" data-label=\"{}\" data-L=\"{}\" data-a=\"{}\" data-b=\"{}\" "
          "x=\"{}\" y=\"{}\" width=\"{}\" height=\"36\" fill=\"#{:02x}{:02x}{:02x}\"/>\n"
          "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"9\" text-anchor=\"middle\">{}</text>\n",
          detail::xml_escape(p.name), detail::xml_escape(e.label), exact(e.reference.L), exact(e.reference.a),
          exact(e.reference.b), x, y, sw - 2, c.r, c.g, c.b, x + (sw - 2) / 2, y + 48,
          detail::xml_escape(e.label));
    }
  }
  return s + "</svg>\n";
}

inline bool is_man_label(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return char(std::tolower(c)); });
  return s == "man" || s == "male" || s == "men";
}

/// Writes plots/F3..F6 SVG files.
inline void emit_plots(std::span<const AnalysisRecord> records, const std::filesystem::path& out,
                       const PaletteSet* palettes = nullptr) {
  const auto dir = out / "plots";
  if (palettes) write_text(dir / "F3_palettes.svg", palettes_svg(*palettes));

  const auto groups = detail::keyed(records, {"prompt", "model"}, {"gender", "mst", "perla", "fst"});
  std::vector<BarDatum> men, mst, perla;
  for (const auto& [key, gs] : groups) {
    double pct = 0.0;
    for (const auto& c : gs.metric("gender").distribution) {
      if (is_man_label(c.label)) pct += c.percent;
    }
    men.push_back({key[0], key[1], pct, std::nullopt});
    mst.push_back({key[0], key[1], gs.metric("mst").mean, gs.metric("mst").sd});
    perla.push_back({key[0], key[1], gs.metric("perla").mean, gs.metric("perla").sd});
  }
  write_text(dir / "F4_gender_men.svg", grouped_bars_svg("Subjects classified as men", "% men", men, 100.0));
  write_text(dir / "F5_mst_means.svg", grouped_bars_svg("Mean MST by prompt and model", "MST (1-10)", mst, 10.0));
  write_text(dir / "F5_perla_means.svg",
             grouped_bars_svg("Mean PERLA by prompt and model", "PERLA (1-11)", perla, 11.0));

  const auto labels = detail::fst_labels(palettes, records);
  std::vector<StackedBar> stacks;
  for (const auto& [key, gs] : groups) {
    StackedBar b{key[0] + " / " + key[1], {}};
    for (const auto& l : labels) b.segments.emplace_back(l, gs.metric("fst").percent_of(l));
    stacks.push_back(std::move(b));
  }
  write_text(dir / "F6_fst_distribution.svg", stacked_bars_svg("FST distribution by prompt and model", stacks));
}

}  // namespace skintone::report
