#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "polaron/diagnostics.hpp"
#include "polaron_app/commands.hpp"

namespace polaron::app {

namespace {

struct SuiteSetup {
  double c = 1.0;
  double xi = 1.0;
  double lambda = 2.0;
  double g = 0.2;
  int nmax = 2;
  GridSpec grid;
  LanczosOptions lanczos;
};

ModelParams params_at(const SuiteSetup& s, double g, double kappa) {
  return ModelParams(s.c, s.xi, g, kappa, s.lambda);
}

PropertyOutcome at_least(std::string name, double value, double bound, std::string detail = {}) {
  return {std::move(name), value >= bound, value, bound, std::move(detail)};
}

PropertyOutcome at_most(std::string name, double value, double bound, std::string detail = {}) {
  return {std::move(name), value <= bound, value, bound, std::move(detail)};
}

PropertyOutcome pt2_scaling(const SuiteSetup& s) {
  auto discrepancy = [&](double g) {
    const ModelParams p = params_at(s, g, 0.05);
    const Grid grid = build_grid(s.grid, p);
    const MomentumSolver solver(grid, s.nmax, p, s.lanczos);
    const Vec3 P{0.0, 0.0, 0.3 * s.c};
    return std::abs(solver.solve(P).energy - pt2_energy(grid, p, P));
  };
  // Deep enough in the weak-coupling regime that the g^6 term no longer competes.
  const double ratio = discrepancy(0.05) / discrepancy(0.025);
  return at_least("pt2 discrepancy shrinks quartically", ratio, 12.0);
}

std::vector<PropertyOutcome> gross(const SuiteSetup& s) {
  const ModelParams p = params_at(s, s.g, 0.1);
  const Grid grid = build_grid(s.grid, p);
  std::vector<double> Ps;
  for (int i = 0; i <= 9; ++i) Ps.push_back(0.1 * i * s.c);
  const auto table = scan_momentum(grid, p, Ps, s.nmax, s.lanczos);
  const auto r = check_gross_convexity(table, s.lanczos.tol);
  const std::string skipped = "skipped rows " + std::to_string(r.skipped_rows);
  return {
      {"Gross bound 0 <= E(P) - E(0) <= P^2/2", r.gross_ok && r.skipped_rows == 0, r.worst_gross,
       -2.0 * s.lanczos.tol, skipped},
      {"P^2/2 - E(P) convex", r.convexity_ok && r.skipped_rows == 0, r.worst_convexity,
       -4.0 * s.lanczos.tol, skipped},
      {"E(P - K) - E(P) >= -|K||P|", r.lipschitz_ok && r.skipped_rows == 0, r.worst_lipschitz,
       -2.0 * s.lanczos.tol, skipped},
  };
}

PropertyOutcome hvz(const SuiteSetup& s) {
  double worst = std::numeric_limits<double>::infinity();
  bool ok = true;
  std::string where;
  for (double kappa : {0.05, 0.1, 0.2}) {
    const ModelParams p = params_at(s, s.g, kappa);
    MomentumSolver solver(build_grid(s.grid, p), s.nmax, p, s.lanczos);
    for (double frac : {0.0, 0.5, 1.0}) {
      const auto r = hvz_gap(solver, frac * s.c);
      const double margin = r.gap - (kappa - 4.0 * s.lanczos.tol);
      ok = ok && r.ok && r.converged;
      if (margin < worst) {
        worst = margin;
        where = "kappa " + format17(kappa) + ", P " + format17(frac * s.c);
      }
    }
  }
  return {"HVZ gap >= kappa", ok, worst, 0.0, "smallest margin at " + where};
}

std::vector<PropertyOutcome> pullthrough(const SuiteSetup& s) {
  const ModelParams p = params_at(s, s.g, 0.1).with_momentum({0.0, 0.0, 0.5 * s.c});
  const Grid grid = build_grid(s.grid, p);
  const MomentumSolver solver(grid, s.nmax, p, s.lanczos);
  const auto gs = solver.solve(p.momentum());
  const auto envelope = pullthrough_envelope(gs.vector, grid, solver.basis(), p);
  const auto equi = equicontinuity_check(gs.vector, grid, solver.basis());
  return {
      at_most("pull-through bounds with 25% slack", envelope.worst_ratio, 1.0 + envelope.slack,
              "max envelope " + format17(envelope.max_envelope)),
      {"equicontinuity ratio finite", equi.ok && gs.converged, equi.max_ratio,
       std::numeric_limits<double>::infinity(), std::to_string(equi.pairs) + " pairs"},
  };
}

PropertyOutcome critical_momentum(const SuiteSetup& s) {
  bool ok = true;
  double worst = std::numeric_limits<double>::infinity();
  double floor = 0.0;
  for (double g : {0.0, 0.1}) {
    const ModelParams p = params_at(s, g, 0.0);
    const Grid grid = build_grid(s.grid, p);
    const double eps = 1e-3 * s.c * s.c;
    const double free = pstar_free_closed_form(grid, p, eps);
    floor = s.c - std::abs(free - s.c);
    std::vector<double> Ps;
    const double top = std::max(free, s.c) + 0.2 * s.c;
    for (double P = 0.0; P <= top + 1e-12; P += 0.1 * s.c) Ps.push_back(P);
    MomentumSolver solver(grid, s.nmax, p, s.lanczos);
    const auto report = estimate_pstar(solver, Ps);
    const double value = report.pstar.value_or(Ps.back());
    worst = std::min(worst, value);
    ok = ok && value >= floor;
  }
  return {"P* >= c - eps_grid", ok, worst, floor, {}};
}

std::vector<PropertyOutcome> infrared(const SuiteSetup& s) {
  RegularizationPlan plan;
  plan.grid = s.grid;
  plan.nmax = s.nmax;
  plan.lanczos = s.lanczos;
  plan.schedule = {0.08, 0.04, 0.02, 0.01};
  const auto table = scan_regularization(RegularizationKind::ir, plan, params_at(s, s.g, 0.1));
  double worst_step = -std::numeric_limits<double>::infinity();
  double worst_shrink = 0.0;  // max |d_i| / |d_{i-1}| of successive differences
  bool converged = table.rows.front().converged;
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    const double d = table.rows[i].E - table.rows[i - 1].E;
    worst_step = std::max(worst_step, d);
    converged = converged && table.rows[i].converged;
    if (i >= 2) {
      const double before = table.rows[i - 1].E - table.rows[i - 2].E;
      worst_shrink = std::max(worst_shrink, std::abs(d) / std::abs(before));
    }
  }
  return {
      {"E_kappa monotone in kappa", converged && worst_step <= 2.0 * s.lanczos.tol, worst_step,
       2.0 * s.lanczos.tol, {}},
      at_most("E_kappa Cauchy along the schedule", worst_shrink, 1.0),
      at_most("kappa -> 0 extrapolation error within 1e-3 c^2", table.extrapolation_error,
              1e-3 * s.c * s.c,
              "extrapolated " + format17(table.extrapolated.value_or(0.0)) + ", smallest kappa " +
                  format17(table.rows.back().E)),
  };
}

PropertyOutcome solver_cross_check(std::size_t matrices, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> dims(2, 200);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  double worst = 0.0;
  bool converged = true;
  for (std::size_t trial = 0; trial < matrices; ++trial) {
    const std::size_t dim = dims(rng);
    const double density = std::min(1.0, 6.0 / static_cast<double>(dim));
    std::vector<Triplet> entries;
    for (std::size_t r = 0; r < dim; ++r) {
      entries.push_back({r, r, 3.0 * u(rng)});
      for (std::size_t c = r + 1; c < dim; ++c) {
        if (coin(rng) < density) entries.push_back({r, c, u(rng)});
      }
    }
    const auto h = SparseHamiltonian::from_triplets(dim, entries);
    LanczosOptions options;
    options.seed = trial;
    const auto gs = lanczos_ground(h, options);
    converged = converged && gs.converged;
    worst = std::max(worst, std::abs(gs.energy - dense_ground_oracle(h)));
  }
  auto out = at_most("Lanczos agrees with dense diagonalization", worst, 1e-9);
  out.passed = out.passed && converged;
  return out;
}

}  // namespace

std::vector<PropertyOutcome> run_property_suite(const RunConfig& config) {
  SuiteSetup s;
  const ModelParams base = config.model();
  s.c = base.c();
  s.xi = base.xi();
  s.lambda = base.lambda();
  s.g = config.real("check.g");
  s.nmax = static_cast<int>(config.integer("check.nmax"));
  s.grid = config.grid();
  s.grid.kind = GridKind::cartesian;
  s.grid.n = static_cast<int>(config.integer("check.n"));
  s.lanczos = config.lanczos();

  std::vector<PropertyOutcome> out;
  out.push_back(pt2_scaling(s));
  for (auto& o : gross(s)) out.push_back(std::move(o));
  out.push_back(hvz(s));
  for (auto& o : pullthrough(s)) out.push_back(std::move(o));
  out.push_back(critical_momentum(s));
  for (auto& o : infrared(s)) out.push_back(std::move(o));
  out.push_back(solver_cross_check(static_cast<std::size_t>(config.integer("check.matrices")),
                                   s.lanczos.seed));
  return out;
}

}  // namespace polaron::app
