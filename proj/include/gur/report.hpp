#pragma once

// Report tables: CSV / JSON writers and readers, plus the SVG line chart.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gur/relations.hpp"
#include "gur/scenario.hpp"

namespace gur::cli {

using OrderedJson = nlohmann::ordered_json;

enum class Format { csv, json };

/// Rectangular table whose cells are strings, numbers or booleans.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<OrderedJson>> rows;

  std::optional<std::size_t> column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  }
};

/// Fixed 12 significant digits; negative zero prints as 0.
inline std::string format_number(double v) {
  if (v == 0.0) v = 0.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline double round12(double v) { return std::stod(format_number(v)); }

inline const std::vector<std::string>& report_header() {
  static const std::vector<std::string> h{"scenario_id", "relation", "n_particles", "g",   "hbar",
                                          "epsilon",     "eta",      "sigma_a",     "sigma_b", "lhs",
                                          "rhs",         "margin",   "satisfied",   "entropy", "tolerance"};
  return h;
}

inline Table report_table(const std::vector<ReportRecord>& records) {
  Table t;
  t.header = report_header();
  for (const auto& r : records) {
    t.rows.push_back({r.scenario_id, to_string(r.relation), r.n_particles, r.g, r.hbar, r.epsilon, r.eta, r.sigma_a,
                      r.sigma_b, r.lhs, r.rhs, r.margin, r.satisfied, r.entropy, r.tolerance});
  }
  return t;
}

inline Table scaling_table(const std::vector<ScalingRow>& rows) {
  Table t;
  t.header = {"n",
              "hbar",
              "sigma_q",
              "sigma_p",
              "epsilon",
              "eta",
              "composite_commutator_mag",
              "sigma_q1",
              "sigma_p1",
              "eps1",
              "eta1",
              "sigma_q_factored",
              "epsilon_factored",
              "eta_factored",
              "per_particle_ozawa_lhs",
              "per_particle_fujikawa_lhs",
              "factored_ozawa_lhs",
              "factored_fujikawa_lhs",
              "per_particle_bound",
              "per_particle_fujikawa_bound",
              "entanglement_entropy",
              "interior_supported",
              "commutator_ok",
              "ozawa_satisfied",
              "fujikawa_satisfied"};
  for (const auto& r : rows) {
    t.rows.push_back({r.n,
                      r.hbar,
                      r.sigma_q,
                      r.sigma_p,
                      r.epsilon,
                      r.eta,
                      r.commutator_mag,
                      r.sigma_q1,
                      r.sigma_p1,
                      r.eps1,
                      r.eta1,
                      r.sigma_q_factored,
                      r.epsilon_factored,
                      r.eta_factored,
                      r.per_particle_ozawa_lhs,
                      r.per_particle_fujikawa_lhs,
                      r.factored_ozawa_lhs,
                      r.factored_fujikawa_lhs,
                      r.per_particle_bound,
                      r.per_particle_fujikawa_bound,
                      r.entanglement_entropy,
                      r.interior_supported,
                      r.commutator_ok,
                      r.ozawa_satisfied,
                      r.fujikawa_satisfied});
  }
  return t;
}

namespace detail {

inline std::string csv_cell(const OrderedJson& v) {
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number()) return format_number(v.get<double>());
  const std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

}  // namespace detail

inline std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.header.size(); ++i) out += (i ? "," : "") + t.header[i];
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + detail::csv_cell(row[i]);
    out += '\n';
  }
  return out;
}

inline std::string to_json(const Table& t) {
  OrderedJson arr = OrderedJson::array();
  for (const auto& row : t.rows) {
    OrderedJson obj = OrderedJson::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      const auto& v = row[i];
      obj[t.header[i]] = v.is_number_float() ? OrderedJson(round12(v.get<double>())) : v;
    }
    arr.push_back(std::move(obj));
  }
  return arr.dump(2) + "\n";
}

inline std::string render(const Table& t, Format f) { return f == Format::csv ? to_csv(t) : to_json(t); }

/// Reads a CSV or JSON report back into a table of strings, numbers and booleans.
inline Table parse_table(const std::string& text) {
  Table t;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw ScenarioError("report is empty");
  if (text[first] == '[') {
    OrderedJson arr;
    try {
      arr = OrderedJson::parse(text);
    } catch (const OrderedJson::parse_error& e) {
      throw ScenarioError(std::string("report: ") + e.what());
    }
    for (const auto& obj : arr) {
      if (!obj.is_object()) throw ScenarioError("report rows must be objects");
      if (t.header.empty())
        for (const auto& [key, value] : obj.items()) t.header.push_back(key);
      std::vector<OrderedJson> row;
      for (const auto& key : t.header) {
        if (!obj.contains(key)) throw ScenarioError("report row lacks column '" + key + "'");
        row.push_back(obj.at(key));
      }
      t.rows.push_back(std::move(row));
    }
    return t;
  }
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size())
      throw ScenarioError("report line " + std::to_string(line_no) + ": expected " + std::to_string(t.header.size()) +
                          " cells, got " + std::to_string(cells.size()));
    std::vector<OrderedJson> row;
    for (auto& c : cells) row.emplace_back(std::move(c));
    t.rows.push_back(std::move(row));
  }
  return t;
}

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

namespace detail {

inline double numeric_cell(const OrderedJson& v, const std::string& column) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    std::size_t used = 0;
    try {
      const double d = std::stod(s, &used);
      if (used == s.size()) return d;
    } catch (const std::exception&) {
    }
  }
  throw ScenarioError("column '" + column + "' holds a non-numeric value");
}

inline std::string cell_text(const OrderedJson& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

}  // namespace detail

/// Resolves y columns against a table. A name is an exact column, `bound`
/// (rhs or per_particle_bound), or `<relation>_<column>` on a report with a
/// relation column. Plain columns of a relation report use the rows of the
/// first relation present so each evaluation contributes one point.
inline std::vector<Series> select_series(const Table& t, const std::string& x, const std::vector<std::string>& ys) {
  if (t.rows.empty()) throw ScenarioError("report has no rows");
  if (ys.empty()) throw ScenarioError("no y columns requested");
  const auto xcol = t.column(x);
  if (!xcol) throw ScenarioError("unknown column '" + x + "'");
  const auto relcol = t.column("relation");
  std::vector<std::string> relations;
  if (relcol)
    for (const auto& row : t.rows) {
      const auto r = detail::cell_text(row[*relcol]);
      if (std::find(relations.begin(), relations.end(), r) == relations.end()) relations.push_back(r);
    }

  std::vector<Series> out;
  for (const auto& y : ys) {
    std::optional<std::size_t> ycol = t.column(y);
    std::optional<std::string> filter;
    if (!ycol && y == "bound") ycol = t.column("rhs") ? t.column("rhs") : t.column("per_particle_bound");
    if (!ycol && relcol) {
      for (const auto& rel : relations) {
        if (y.size() > rel.size() + 1 && y.compare(0, rel.size() + 1, rel + "_") == 0) {
          ycol = t.column(y.substr(rel.size() + 1));
          if (ycol) {
            filter = rel;
            break;
          }
        }
      }
    }
    if (!ycol) throw ScenarioError("unknown column '" + y + "'");
    if (!filter && relcol) filter = relations.front();

    Series s{y, {}};
    for (const auto& row : t.rows) {
      if (filter && detail::cell_text(row[*relcol]) != *filter) continue;
      s.points.emplace_back(detail::numeric_cell(row[*xcol], x), detail::numeric_cell(row[*ycol], y));
    }
    out.push_back(std::move(s));
  }
  return out;
}

namespace detail {

inline std::string fixed3(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

inline std::string short_number(double v) {
  if (v == 0.0) v = 0.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

/// Static line chart, one polyline per series. Output depends only on the input.
inline std::string render_svg(const std::vector<Series>& series, const std::string& x_label) {
  constexpr double width = 640, height = 400, left = 70, right = 160, top = 20, bottom = 50;
  static constexpr std::array<const char*, 8> palette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                      "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  if (!(xmin <= xmax)) throw ScenarioError("nothing to plot");
  if (xmin == xmax) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymin == ymax) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double pw = width - left - right;
  const double ph = height - top - bottom;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

  std::string y_label;
  for (std::size_t i = 0; i < series.size(); ++i) y_label += (i ? ", " : "") + series[i].label;

  using detail::fixed3;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  svg << "<g stroke=\"black\" stroke-width=\"1\">\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph << "\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph << "\"/>\n";
  svg << "</g>\n";
  svg << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<text x=\"" << left << "\" y=\"" << top + ph + 15 << "\" text-anchor=\"middle\">"
      << detail::short_number(xmin) << "</text>\n";
  svg << "<text x=\"" << left + pw << "\" y=\"" << top + ph + 15 << "\" text-anchor=\"middle\">"
      << detail::short_number(xmax) << "</text>\n";
  svg << "<text x=\"" << left - 5 << "\" y=\"" << top + ph << "\" text-anchor=\"end\">" << detail::short_number(ymin)
      << "</text>\n";
  svg << "<text x=\"" << left - 5 << "\" y=\"" << top + 4 << "\" text-anchor=\"end\">" << detail::short_number(ymax)
      << "</text>\n";
  svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">"
      << detail::xml_escape(x_label) << "</text>\n";
  svg << "<text x=\"15\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
      << top + ph / 2 << ")\">" << detail::xml_escape(y_label) << "</text>\n";
  svg << "</g>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = palette[i % palette.size()];
    auto pts = series[i].points;
    std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < pts.size(); ++k)
      svg << (k ? " " : "") << fixed3(px(pts[k].first)) << ',' << fixed3(py(pts[k].second));
    svg << "\"/>\n";
    const double ly = top + 14.0 * static_cast<double>(i) + 10;
    svg << "<line x1=\"" << left + pw + 10 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 30 << "\" y2=\"" << ly
        << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
    svg << "<text x=\"" << left + pw + 35 << "\" y=\"" << ly + 4 << "\" font-family=\"sans-serif\" font-size=\"11\">"
        << detail::xml_escape(series[i].label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace gur::cli
