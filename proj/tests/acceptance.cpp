// Acceptance run: one PASS/FAIL line per criterion.
// Usage: acceptance <gur executable> <scenarios dir> <work dir>

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "gur/measurement.hpp"
#include "gur/model_factory.hpp"
#include "gur/random.hpp"
#include "gur/relations.hpp"

using namespace gur;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

int failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (budget_s > 0.0 && secs > budget_s) {
    o.ok = false;
    o.detail += "; over the " + num(budget_s) + " s budget";
  }
  if (!o.ok) ++failures;
  std::printf("criterion %2d: %s  %s (%s; %.3f s)\n", id, o.ok ? "PASS" : "FAIL", title, o.detail.c_str(), secs);
  std::fflush(stdout);
}

Outcome robertson_universality() {
  std::mt19937_64 rng(0);
  std::uniform_int_distribution<std::size_t> pick(2, 8);
  int violations = 0;
  double worst = INFINITY;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t d = pick(rng);
    const Operator a = random_hermitian(d, rng);
    const Operator b = random_hermitian(d, rng);
    const StateVector psi = random_state(Dim{d}, rng);
    const RelationReport r = robertson_check(a, b, psi, 1e-9);
    if (!r.satisfied) ++violations;
    worst = std::min(worst, r.margin);
  }
  return {violations == 0, std::to_string(violations) + " violations, smallest margin " + num(worst)};
}

Outcome cnot_naive_violation() {
  const StateVector psi(Dim{2}, Vector{{Complex(1, 0), Complex(0, 1)}});
  const RelationSet s = evaluate_relations(cnot_model(), sigma_x(), psi, 1e-9);
  const bool ok = !s.naive_product.satisfied && std::abs(s.naive_product.lhs) <= 1e-9 &&
                  std::abs(s.naive_product.rhs - 1.0) <= 1e-9 && s.ozawa.satisfied &&
                  std::abs(s.ozawa.lhs - std::sqrt(2.0)) <= 1e-9 && s.fujikawa.satisfied &&
                  s.fujikawa.lhs >= 1.0 - 1e-9;
  return {ok, "naive " + num(s.naive_product.lhs) + " < " + num(s.naive_product.rhs) + ", ozawa " +
                  num(s.ozawa.lhs) + ", fujikawa " + num(s.fujikawa.lhs)};
}

Outcome von_neumann_sweep() {
  constexpr std::size_t levels = 16;
  constexpr std::size_t probe_levels = 64;
  const auto sys = truncated_oscillator(levels);
  const auto probe = truncated_oscillator(probe_levels);
  const StateVector zeta = oscillator_ground_probe(probe_levels);
  const StateVector psi = StateVector::basis(Dim{levels}, 0);
  int violations = 0;
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const double g = 0.25 + (4.0 - 0.25) * k / 9.0;
    const RelationSet s = evaluate_relations(von_neumann_model(sys.q, probe, zeta, g), sys.p, psi, 1e-6);
    if (!s.ozawa.satisfied || !s.fujikawa.satisfied) ++violations;
    worst = std::max(worst, std::abs(s.noise.epsilon * s.noise.eta - 0.5));
  }
  return {violations == 0 && worst <= 5e-2,
          std::to_string(violations) + " violations, max |eps*eta - hbar/2| " + num(worst)};
}

MeasurementModel oscillator_device(std::size_t levels, std::size_t probe_levels, double g) {
  const auto sys = truncated_oscillator(levels);
  return von_neumann_model(sys.q, truncated_oscillator(probe_levels), oscillator_ground_probe(probe_levels), g);
}

Outcome noise_decomposition() {
  std::mt19937_64 rng(4);
  const auto sys = truncated_oscillator(4);
  const MeasurementModel m1 = oscillator_device(4, 8, 1.0);
  const MeasurementModel m2 = oscillator_device(4, 8, 0.6);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const StateVector psi = product_state({random_state(Dim{4}, rng), random_state(Dim{4}, rng)});
    worst = std::max(worst, std::abs(decomposition_audit(m1, m2, sys.p, sys.p, psi).noise.residual));
  }
  const MeasurementModel m3 = von_neumann_model(sigma_z(), truncated_oscillator(8), oscillator_ground_probe(8), 0.8);
  double limit = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const StateVector psi = product_state({random_state(Dim{2}, rng), random_state(Dim{2}, rng)});
    const DecompositionAudit a = decomposition_audit(cnot_model(), m3, sigma_x(), sigma_x(), psi);
    limit = std::max(limit, std::abs(std::sqrt(a.noise.lhs) - std::sqrt(a.noise.second)));
  }
  return {worst <= 1e-8 && limit <= 1e-9,
          "max residual " + num(worst) + ", noiseless-device gap " + num(limit)};
}

Outcome disturbance_decomposition() {
  std::mt19937_64 rng(5);
  const auto sys = truncated_oscillator(4);
  const MeasurementModel m1 = oscillator_device(4, 8, 1.0);
  const MeasurementModel m2 = oscillator_device(4, 8, 0.6);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const StateVector psi = product_state({random_state(Dim{4}, rng), random_state(Dim{4}, rng)});
    worst = std::max(worst, std::abs(decomposition_audit(m1, m2, sys.p, sys.p, psi).disturbance.residual));
  }
  const MeasurementModel m3 = von_neumann_model(sigma_z(), truncated_oscillator(8), oscillator_ground_probe(8), 0.8);
  double limit = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const StateVector psi = product_state({random_state(Dim{2}, rng), random_state(Dim{2}, rng)});
    const DecompositionAudit a = decomposition_audit(cnot_model(), m3, sigma_z(), sigma_x(), psi);
    limit = std::max(limit, std::abs(std::sqrt(a.disturbance.lhs) - std::sqrt(a.disturbance.second)));
  }
  return {worst <= 1e-8 && limit <= 1e-9,
          "max residual " + num(worst) + ", non-disturbing-device gap " + num(limit)};
}

Outcome composite_commutator() {
  constexpr std::size_t levels = 16;
  constexpr std::size_t support = 14;
  std::mt19937_64 rng(6);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  int exterior = 0;
  for (double hbar : {1.0, 2.0}) {
    const auto pair = truncated_oscillator(levels, hbar);
    const Operator c = commutator(composite_observable(pair.q, 2), composite_observable(pair.p, 2));
    for (int trial = 0; trial < 5; ++trial) {
      Vector v = Vector::Zero(levels * levels);
      for (std::size_t i = 0; i < support; ++i)
        for (std::size_t j = 0; j < support; ++j)
          v(static_cast<Eigen::Index>(i * levels + j)) = Complex(normal(rng), normal(rng));
      const StateVector psi(Dim{levels, levels}, std::move(v));
      if (!is_interior_supported(psi)) ++exterior;
      worst = std::max(worst, std::abs(expectation(c, psi) - Complex(0.0, 2.0 * hbar)));
    }
  }
  return {worst <= 1e-8 && exterior == 0, "max |<[Q12,P12]> - 2i hbar| " + num(worst)};
}

Outcome entangled_pair_bounds() {
  bool ok = true;
  double gap = 0.0;
  for (double hbar : {1.0, 2.0}) {
    ScalingConfig cfg;
    cfg.system.hbar = hbar;
    cfg.weights = {1.0, 1.0, 1.0, 1.0};
    cfg.n_max = 2;
    cfg.probe_levels = 16;
    const ScalingRow r = scaling_experiment(cfg).at(1);
    gap = std::max(gap, std::abs(r.sigma_q - 2.0 * r.sigma_q1));
    ok = ok && r.per_particle_bound == hbar / 4.0 && r.per_particle_fujikawa_bound == hbar / 2.0 &&
         r.per_particle_ozawa_lhs - r.per_particle_bound >= -1e-6 &&
         r.per_particle_fujikawa_lhs - r.per_particle_fujikawa_bound >= -1e-6;
  }
  return {ok && gap <= 1e-9, "bounds hbar/4 and hbar/2, |sigma(Q12) - 2 sigma(Q1)| " + num(gap)};
}

Outcome n_particle_scaling() {
  bool ok = true;
  double comm = 0.0;
  double ent = 0.0;
  for (double hbar : {1.0, 2.0}) {
    ScalingConfig cfg;
    cfg.system.hbar = hbar;
    for (const ScalingRow& r : scaling_experiment(cfg)) {
      const double n = static_cast<double>(r.n);
      comm = std::max(comm, std::abs(r.commutator_mag - n * hbar));
      ent = std::max(ent, std::abs(r.entanglement_entropy - (r.n == 1 ? 0.0 : std::log(2.0))));
      ok = ok && r.per_particle_bound == hbar / (2.0 * n) && r.passed();
    }
  }
  return {ok && comm <= 1e-8 && ent <= 1e-9, "n=1..4, commutator gap " + num(comm) + ", entropy gap " + num(ent)};
}

Outcome fujikawa_reduction() {
  std::mt19937_64 rng(9);
  double worst = 0.0;
  bool same_flags = true;
  for (int trial = 0; trial < 20; ++trial) {
    const StateVector psi = random_state(Dim{2}, rng);
    const RelationSet s = evaluate_relations(cnot_model(), sigma_z(), psi, 1e-9);
    if (s.noise.epsilon != 0.0 || s.noise.eta != 0.0) return {false, "noise or disturbance is non-zero"};
    worst = std::max({worst, std::abs(s.fujikawa.lhs - s.robertson.lhs), std::abs(s.fujikawa.rhs - s.robertson.rhs),
                      std::abs(s.fujikawa.margin - s.robertson.margin),
                      std::abs(s.fujikawa.tolerance - s.robertson.tolerance)});
    same_flags = same_flags && s.fujikawa.satisfied == s.robertson.satisfied;
  }
  return {same_flags && worst <= 1e-12, "max field difference " + num(worst)};
}

int run(const std::string& cmd) {
  const int status = std::system((cmd + " 2>/dev/null").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

Outcome cli_contract(const fs::path& gur, const fs::path& scenarios, const fs::path& work) {
  fs::remove_all(work);
  fs::create_directories(work);
  const std::string exe = quote(gur);
  std::string bad;
  for (const char* name : {"cnot_violation", "von_neumann_saturation", "robertson_random"}) {
    for (int i : {1, 2}) {
      const fs::path out = work / (std::string(name) + std::to_string(i) + ".csv");
      if (run(exe + " run " + quote(scenarios / (std::string(name) + ".json")) + " -o " + quote(out)) != 0)
        bad += std::string(" ") + name + " exit";
    }
    if (slurp(work / (std::string(name) + "1.csv")) != slurp(work / (std::string(name) + "2.csv")))
      bad += std::string(" ") + name + " nondeterministic";
  }
  for (int i : {1, 2})
    if (run(exe + " scale --config " + quote(scenarios / "scaling_n4.json") + " -o " +
            quote(work / ("scaling" + std::to_string(i) + ".csv"))) != 0)
      bad += " scaling_n4 exit";
  if (slurp(work / "scaling1.csv") != slurp(work / "scaling2.csv")) bad += " scaling_n4 nondeterministic";

  const fs::path corrupt = work / "corrupt.json";
  std::ofstream(corrupt) << "{\"id\": \"broken\", \"system\": {\"kind\": ";
  if (run(exe + " run " + quote(corrupt) + " -o " + quote(work / "corrupt.csv")) != 2) bad += " corrupt exit";
  if (fs::exists(work / "corrupt.csv")) bad += " corrupt wrote output";

  return {bad.empty(), bad.empty() ? "bundled scenarios exit 0, corrupt exits 2, reports identical" : bad};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 4) {
    std::fprintf(stderr, "usage: %s <gur> <scenarios dir> <work dir>\n", argv[0]);
    return 2;
  }
  criterion(1, "Robertson on 1000 random pairs", 5, robertson_universality);
  criterion(2, "CNOT breaks the naive product, Ozawa and Fujikawa hold", 1, cnot_naive_violation);
  criterion(3, "von Neumann g sweep holds and nearly saturates", 10, von_neumann_sweep);
  criterion(4, "two-device noise decomposition", 5, noise_decomposition);
  criterion(5, "two-device disturbance decomposition", 5, disturbance_decomposition);
  criterion(6, "composite commutator 2i hbar on interior states", 2, composite_commutator);
  criterion(7, "entangled pair per-particle bounds", 5, entangled_pair_bounds);
  criterion(8, "n-particle scaling columns", 10, n_particle_scaling);
  criterion(9, "Fujikawa equals Robertson without noise or disturbance", 0, fujikawa_reduction);
  criterion(10, "CLI contract", 0, [&] { return cli_contract(argv[1], argv[2], argv[3]); });
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
