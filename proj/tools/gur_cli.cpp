// gur: run scenario files, sweeps, scaling experiments and plots.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gur/cli.hpp"

int main(int argc, char** argv) {
  using namespace gur::cli;

  CLI::App app{"Measurement noise/disturbance simulator and uncertainty relation auditor"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<double> hbar;
  std::optional<double> tolerance;
  std::optional<std::uint64_t> seed;
  std::string format = "csv";
  app.add_option("--hbar", hbar, "Override hbar")->check(CLI::PositiveNumber);
  app.add_option("--tolerance", tolerance, "Override the relation tolerance")->check(CLI::NonNegativeNumber);
  app.add_option("--format", format, "Report format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--seed", seed, "Override the random seed");

  std::string scenario_file;
  std::string out;

  auto* run = app.add_subcommand("run", "Evaluate every scenario in a file");
  run->add_option("scenario", scenario_file, "Scenario file")->required();
  run->add_option("-o,--out", out, "Report path")->required();

  std::string param;
  double from = 0.0;
  double to = 0.0;
  std::size_t steps = 0;
  auto* sweep = app.add_subcommand("sweep", "Evaluate a scenario over a parameter range");
  sweep->add_option("scenario", scenario_file, "Scenario file")->required();
  sweep->add_option("--param", param, "g or hbar")->required();
  sweep->add_option("--from", from, "First value")->required();
  sweep->add_option("--to", to, "Last value")->required();
  sweep->add_option("--steps", steps, "Number of points (>= 2)")->required();
  sweep->add_option("-o,--out", out, "Report path")->required();

  std::string config_file;
  std::optional<std::size_t> levels;
  std::vector<double> weights;
  std::optional<std::size_t> n_max;
  std::optional<double> g;
  std::optional<std::size_t> probe_levels;
  auto* scale = app.add_subcommand("scale", "Correlated n-particle scaling experiment");
  scale->add_option("--config", config_file, "Scaling config file");
  scale->add_option("--levels", levels, "Oscillator levels per particle");
  scale->add_option("--weights", weights, "Schmidt weights")->delimiter(',');
  scale->add_option("--n-max", n_max, "Largest particle count");
  scale->add_option("--g", g, "Coupling strength");
  scale->add_option("--probe-levels", probe_levels, "Probe oscillator levels");
  scale->add_option("-o,--out", out, "Report path")->required();

  std::string report;
  std::string x;
  std::vector<std::string> ys;
  auto* plot = app.add_subcommand("plot", "Line chart of report columns");
  plot->add_option("report", report, "CSV or JSON report")->required();
  plot->add_option("--x", x, "x column")->required();
  plot->add_option("--y", ys, "y columns")->required()->delimiter(',');
  plot->add_option("-o,--out", out, "SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  GlobalOptions opts;
  opts.overrides.hbar = hbar;
  opts.overrides.tolerance = tolerance;
  opts.overrides.seed = seed;
  opts.format = format == "json" ? Format::json : Format::csv;

  if (run->parsed()) return run_command(scenario_file, out, opts, std::cerr);
  if (sweep->parsed()) return sweep_command(scenario_file, param, from, to, steps, out, opts, std::cerr);
  if (plot->parsed()) return plot_command(report, x, ys, out, std::cerr);

  gur::ScalingConfig cfg;
  if (!config_file.empty()) {
    try {
      cfg = parse_scaling_config(detail::read_file(config_file));
    } catch (const std::exception& e) {
      std::cerr << "error: " << config_file << ": " << e.what() << '\n';
      return kExitConfig;
    }
  }
  if (levels) cfg.system.levels = *levels;
  if (!weights.empty()) cfg.weights = weights;
  if (n_max) cfg.n_max = *n_max;
  if (g) cfg.g = *g;
  if (probe_levels) cfg.probe_levels = *probe_levels;
  return scale_command(cfg, out, opts, std::cerr);
}
