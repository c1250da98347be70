#pragma once

// Command implementations behind the `gur` executable. Each returns the
// process exit code: 0 all must-hold relations satisfied, 1 a violation,
// 2 configuration or validation error. Nothing is written on exit code 2.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "gur/relations.hpp"
#include "gur/report.hpp"
#include "gur/scenario.hpp"

namespace gur::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitConfig = 2;

struct GlobalOptions {
  Overrides overrides;
  Format format = Format::csv;
};

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ScenarioError(path.string() + ": cannot open for writing");
  out << content;
  if (!out.flush()) throw ScenarioError(path.string() + ": write failed");
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(path.string() + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline int exit_code(const std::vector<ReportRecord>& records) {
  for (const auto& r : records)
    if (must_hold(r.relation) && !r.satisfied) return kExitViolation;
  return kExitOk;
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ScenarioError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const StructuralError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const ContractError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitConfig;
}

inline std::vector<Scenario> load_with(const std::filesystem::path& file, const GlobalOptions& opts) {
  auto scenarios = load_scenarios(file);
  for (auto& s : scenarios) apply_overrides(s, opts.overrides);
  return scenarios;
}

}  // namespace detail

inline int run_command(const std::filesystem::path& scenario_file, const std::filesystem::path& out,
                       const GlobalOptions& opts, std::ostream& err) {
  return detail::guarded(err, [&] {
    std::vector<ReportRecord> records;
    for (const auto& s : detail::load_with(scenario_file, opts)) {
      auto r = evaluate(s);
      records.insert(records.end(), r.begin(), r.end());
    }
    detail::write_file(out, render(report_table(records), opts.format));
    return detail::exit_code(records);
  });
}

/// `steps` evenly spaced values from..to inclusive, ascending.
inline std::vector<double> sweep_values(double from, double to, std::size_t steps) {
  if (steps < 2) throw ScenarioError("sweep: steps must be >= 2");
  if (!std::isfinite(from) || !std::isfinite(to)) throw ScenarioError("sweep: bounds must be finite");
  if (from == to) throw ScenarioError("sweep: from and to must differ");
  const double lo = std::min(from, to);
  const double hi = std::max(from, to);
  std::vector<double> v(steps);
  for (std::size_t k = 0; k < steps; ++k)
    v[k] = k + 1 == steps ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(steps - 1);
  return v;
}

inline int sweep_command(const std::filesystem::path& scenario_file, const std::string& param, double from, double to,
                         std::size_t steps, const std::filesystem::path& out, const GlobalOptions& opts,
                         std::ostream& err) {
  return detail::guarded(err, [&] {
    if (param != "g" && param != "hbar") throw ScenarioError("sweep: unknown parameter '" + param + "' (g or hbar)");
    const auto values = sweep_values(from, to, steps);
    const auto scenarios = detail::load_with(scenario_file, opts);
    for (const auto& s : scenarios) {
      if (param == "g" && s.model != ModelKind::von_neumann)
        throw ScenarioError(s.id + ": sweeping g needs a von_neumann model");
      if (param == "hbar" && s.random) throw ScenarioError(s.id + ": random scenarios have no hbar");
    }
    for (double v : values) {
      if (param == "g" && v == 0.0) throw ScenarioError("sweep: g range includes 0");
      if (param == "hbar" && !(v > 0.0)) throw ScenarioError("sweep: hbar must stay positive");
    }
    std::vector<ReportRecord> records;
    for (double v : values) {
      for (auto s : scenarios) {
        if (param == "g")
          s.g = v;
        else
          s.system.hbar = v;
        auto r = evaluate(s);
        records.insert(records.end(), r.begin(), r.end());
      }
    }
    detail::write_file(out, render(report_table(records), opts.format));
    return detail::exit_code(records);
  });
}

inline int scale_command(ScalingConfig cfg, const std::filesystem::path& out, const GlobalOptions& opts,
                         std::ostream& err) {
  return detail::guarded(err, [&] {
    if (opts.overrides.hbar) cfg.system.hbar = *opts.overrides.hbar;
    if (opts.overrides.tolerance) cfg.tolerance = *opts.overrides.tolerance;
    if (cfg.weights.empty() || cfg.weights.size() > cfg.system.levels)
      throw ScenarioError("scale: need between 1 and levels weights");
    const auto rows = scaling_experiment(cfg);
    detail::write_file(out, render(scaling_table(rows), opts.format));
    const bool ok = std::all_of(rows.begin(), rows.end(), [](const ScalingRow& r) { return r.passed(); });
    return ok ? kExitOk : kExitViolation;
  });
}

inline int plot_command(const std::filesystem::path& report, const std::string& x, const std::vector<std::string>& ys,
                        const std::filesystem::path& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const Table t = parse_table(detail::read_file(report));
    const auto series = select_series(t, x, ys);
    detail::write_file(out, render_svg(series, x));
    return kExitOk;
  });
}

}  // namespace gur::cli
