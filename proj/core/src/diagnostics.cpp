#include "polaron/diagnostics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>

#include "polaron/errors.hpp"

namespace polaron {

namespace {

std::string shortest(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void require_cartesian(const Grid& grid, const char* what) {
  if (grid.kind() != GridKind::cartesian) {
    throw ContractError(std::string(what) + " needs a cartesian grid");
  }
}

}  // namespace

double pt2_energy(const Grid& grid, const ModelParams& params, const Vec3& P) {
  const double free = 0.5 * norm2(P);
  double shift = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const Mode& m = grid[j];
    if (m.coupling == 0.0) continue;
    const double den = 0.5 * norm2(P - m.k) + dispersion(m.k, params) - free;
    if (!(den > 0.0)) {
      throw ContractError("pt2 denominator is not positive for mode " + std::to_string(j) +
                          " (|k| = " + shortest(norm(m.k)) + ")");
    }
    shift += m.coupling * m.coupling / den;
  }
  return free - shift;
}

MomentumSolver::MomentumSolver(const Grid& grid, int nmax, const ModelParams& params,
                               LanczosOptions options)
    : grid_(grid),
      basis_(grid.size(), nmax),
      params_(params),
      options_(options),
      base_(assemble(grid_, basis_, params_.with_momentum({}))) {}

GroundStateResult MomentumSolver::solve(const Vec3& P) const {
  const ModelParams at = params_.with_momentum(P);
  return lanczos_ground(reassemble_diagonal(base_, grid_, basis_, at), options_);
}

std::array<double, 3> MomentumSolver::canonical(const Vec3& Q) const {
  if (grid_.kind() != GridKind::cartesian) return {Q.x, Q.y, Q.z};
  std::array<double, 3> a{std::abs(Q.x), std::abs(Q.y), std::abs(Q.z)};
  std::sort(a.begin(), a.end());
  return a;
}

MomentumSolver::Energy MomentumSolver::energy(const Vec3& Q) {
  const auto key = canonical(Q);
  if (const auto it = cache_.find(key); it != cache_.end()) return it->second;
  const auto gs = solve({key[0], key[1], key[2]});
  const Energy e{gs.energy, gs.residual, gs.converged};
  cache_.emplace(key, e);
  return e;
}

ScanTable scan_momentum(const Grid& grid, const ModelParams& params,
                        const std::vector<double>& P_list, int nmax,
                        const LanczosOptions& options) {
  if (!std::is_sorted(P_list.begin(), P_list.end())) {
    throw ContractError("scan_momentum needs an ascending momentum list");
  }
  const MomentumSolver solver(grid, nmax, params, options);
  ScanTable table;
  table.params = params.with_momentum({});
  table.grid_hash = grid.hash();
  table.nmax = nmax;
  table.rows.resize(P_list.size());
  const auto count = static_cast<long>(P_list.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < count; ++i) {
    const double P = P_list[static_cast<std::size_t>(i)];
    const auto gs = solver.solve({0.0, 0.0, P});
    const auto obs = observe(gs.vector, solver.basis(), grid);
    auto& row = table.rows[static_cast<std::size_t>(i)];
    row.P = P;
    row.E = gs.energy;
    row.residual = gs.residual;
    row.Z = obs.vacuum_overlap;
    row.N_mean = obs.mean_number;
    row.dGamma_p_z = obs.mean_momentum.z;
    row.converged = gs.converged;
  }
  return table;
}

GrossConvexityReport check_gross_convexity(const ScanTable& table, double tol) {
  GrossConvexityReport report;
  std::vector<ScanRow> rows;
  for (const auto& r : table.rows) {
    if (r.converged) {
      rows.push_back(r);
    } else {
      ++report.skipped_rows;
    }
  }
  if (rows.size() < 3) throw ContractError("check_gross_convexity needs >= 3 converged rows");
  const auto origin = std::find_if(rows.begin(), rows.end(), [](const ScanRow& r) { return r.P == 0.0; });
  if (origin == rows.end()) throw ContractError("check_gross_convexity needs a row at P = 0");
  const double e0 = origin->E;

  report.worst_gross = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) {
    if (r.P == 0.0) continue;
    const double rise = r.E - e0;
    const double margin = std::min(rise, 0.5 * r.P * r.P - rise);
    if (margin < report.worst_gross) {
      report.worst_gross = margin;
      if (margin < -2.0 * tol) report.gross_offender = {{r.P, r.E}};
    }
  }
  report.gross_ok = report.worst_gross >= -2.0 * tol;

  report.worst_convexity = std::numeric_limits<double>::infinity();
  auto f = [](const ScanRow& r) { return 0.5 * r.P * r.P - r.E; };
  for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
    const double h0 = rows[i].P - rows[i - 1].P;
    const double h1 = rows[i + 1].P - rows[i].P;
    if (!(h0 > 0.0 && h1 > 0.0)) throw ContractError("scan rows must have distinct ascending P");
    const double second =
        (h0 * (f(rows[i + 1]) - f(rows[i])) - h1 * (f(rows[i]) - f(rows[i - 1]))) /
        (0.5 * (h0 + h1));
    if (second < report.worst_convexity) {
      report.worst_convexity = second;
      if (second < -4.0 * tol) report.convexity_offender = {{rows[i].P, second}};
    }
  }
  report.convexity_ok = report.worst_convexity >= -4.0 * tol;

  report.worst_lipschitz = std::numeric_limits<double>::infinity();
  for (const auto& a : rows) {
    for (const auto& b : rows) {
      if (&a == &b) continue;
      const double margin = b.E - a.E + std::abs(a.P - b.P) * std::abs(a.P);
      if (margin < report.worst_lipschitz) {
        report.worst_lipschitz = margin;
        if (margin < -2.0 * tol) report.lipschitz_offender = {{a.P, b.P}};
      }
    }
  }
  report.lipschitz_ok = report.worst_lipschitz >= -2.0 * tol;
  return report;
}

GapReport hvz_gap(MomentumSolver& solver, double P) {
  const Grid& grid = solver.grid();
  require_cartesian(grid, "hvz_gap");
  const ModelParams& params = solver.params();
  if (!(params.kappa() > 0.0)) throw ContractError("hvz_gap needs kappa > 0");
  GapReport report;
  report.P = P;
  report.kappa = params.kappa();
  const auto e = solver.energy({0.0, 0.0, P});
  report.energy = e.energy;
  report.converged = e.converged;
  report.threshold = std::numeric_limits<double>::infinity();
  const double radius = 0.5 * grid.spec().kmax;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const Vec3& k = grid[j].k;
    if (norm(k) > radius) continue;
    ++report.samples;
    const auto shifted = solver.energy(Vec3{0.0, 0.0, P} - k);
    report.converged = report.converged && shifted.converged;
    const double t = shifted.energy + dispersion(k, params);
    if (t < report.threshold) {
      report.threshold = t;
      report.argmin_mode = j;
    }
  }
  if (report.samples == 0) throw ContractError("hvz_gap sample set is empty");
  report.gap = report.threshold - report.energy;
  report.ok = report.gap >= report.kappa - 4.0 * solver.options().tol;
  return report;
}

PullthroughReport pullthrough_envelope(std::span<const double> psi, const Grid& grid,
                                       const FockBasis& basis, const ModelParams& params,
                                       double slack) {
  const double P = norm(params.momentum());
  if (!(P < params.c())) throw ContractError("pullthrough_envelope needs |P| < c");
  PullthroughReport report;
  report.slack = slack;
  report.modes.reserve(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const Mode& m = grid[j];
    PullthroughMode row;
    row.mode = j;
    row.k = norm(m.k);
    row.rho = annihilation_amplitudes(psi, basis, j).norm / std::sqrt(m.weight);
    row.envelope = row.rho * std::max(std::sqrt(row.k), row.k * row.k);
    const double v = form_factor(m.k, params);
    const double allowance = 1.0 + slack;
    if (row.k > 0.0) {
      row.bound_low = v / ((params.c() - P) * row.k);
      if (row.k > 2.0 * P / params.xi()) row.bound_high = 2.0 * v / (params.xi() * row.k * row.k);
    }
    const double floor = kAmplitudeFloor / std::sqrt(m.weight);
    auto check = [&](double bound) {
      if (row.rho <= floor) return;
      if (bound > 0.0) {
        report.worst_ratio = std::max(report.worst_ratio, row.rho / bound);
        if (row.rho > bound * allowance) row.ok = false;
      } else {
        row.ok = false;
        report.worst_ratio = std::numeric_limits<double>::infinity();
      }
    };
    check(row.bound_low);
    if (row.bound_high > 0.0) check(row.bound_high);
    report.max_envelope = std::max(report.max_envelope, row.envelope);
    report.ok = report.ok && row.ok;
    report.modes.push_back(row);
  }
  return report;
}

EquicontinuityReport equicontinuity_check(std::span<const double> psi, const Grid& grid,
                                          const FockBasis& basis) {
  require_cartesian(grid, "equicontinuity_check");
  const std::size_t m = grid.size();
  const std::size_t dim = basis.size();
  if (static_cast<double>(m) * static_cast<double>(dim) > 6e7) {
    throw ResourceError("equicontinuity_check would hold " + std::to_string(m) + " x " +
                        std::to_string(dim) + " amplitudes");
  }
  std::vector<std::vector<double>> amps(m);
  for (std::size_t j = 0; j < m; ++j) amps[j] = annihilation_amplitudes(psi, basis, j).amplitudes;
  EquicontinuityReport report;
  for (std::size_t j = 0; j < m; ++j) {
    const double kj = norm(grid[j].k);
    if (kj == 0.0) continue;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == j) continue;
      const double dk = norm(grid[i].k - grid[j].k);
      if (dk == 0.0 || dk > 0.5 * kj) continue;
      double s = 0.0;
      for (std::size_t t = 0; t < dim; ++t) {
        const double d = amps[i][t] - amps[j][t];
        s += d * d;
      }
      const double ratio = std::sqrt(s) / std::sqrt(grid[j].weight) * kj * kj / dk;
      ++report.pairs;
      report.max_ratio = std::max(report.max_ratio, ratio);
    }
  }
  report.ok = std::isfinite(report.max_ratio);
  return report;
}

double sigma1_discrete(const Grid& grid, const ModelParams& params) {
  double sum = 0.0;
  for (const auto& m : grid.modes()) {
    if (m.coupling == 0.0) continue;
    sum += m.coupling * m.coupling / (0.5 * norm2(m.k) + dispersion(m.k, params));
  }
  return -sum;
}

double neville_at_zero(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.empty()) throw ContractError("neville_at_zero needs matching points");
  std::vector<double> p(y.begin(), y.end());
  const std::size_t n = x.size();
  for (std::size_t level = 1; level < n; ++level) {
    for (std::size_t i = 0; i + level < n; ++i) {
      const double denom = x[i] - x[i + level];
      if (denom == 0.0) throw ContractError("neville_at_zero needs distinct abscissae");
      p[i] = (x[i] * p[i + 1] - x[i + level] * p[i]) / denom;
    }
  }
  return p[0];
}

RegularizationTable scan_regularization(RegularizationKind kind, const RegularizationPlan& plan,
                                        const ModelParams& params) {
  RegularizationTable table;
  table.kind = kind;
  const auto& sched = plan.schedule;
  if (sched.empty()) throw ContractError("scan_regularization needs a schedule");
  if (kind == RegularizationKind::uv) {
    if (!std::is_sorted(sched.begin(), sched.end()) ||
        std::adjacent_find(sched.begin(), sched.end()) != sched.end()) {
      throw ContractError("uv schedule must be strictly ascending");
    }
    if (plan.grid.kind == GridKind::cartesian && plan.grid.kmax < sched.back()) {
      throw ContractError("uv scan needs kmax >= the largest cutoff");
    }
    table.rows.resize(sched.size());
    const auto count = static_cast<long>(sched.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < count; ++i) {
      const double L = sched[static_cast<std::size_t>(i)];
      const ModelParams at = params.with_lambda(L);
      const Grid grid = build_grid(plan.grid, at);
      const FockBasis basis(grid.size(), plan.nmax);
      const auto gs = lanczos_ground(assemble(grid, basis, at), plan.lanczos);
      const auto s2 = sigma2(at, L, plan.renorm);
      auto& row = table.rows[static_cast<std::size_t>(i)];
      row.parameter = L;
      row.E = gs.energy;
      row.residual = gs.residual;
      row.converged = gs.converged;
      row.sigma1_disc = sigma1_discrete(grid, at);
      row.sigma2 = s2.value;
      row.sigma2_converged = s2.converged;
      row.E_minus_sigma1 = gs.energy - row.sigma1_disc;
      row.E_minus_sigma12 = row.E_minus_sigma1 - s2.value;
    }
    return table;
  }

  for (std::size_t i = 0; i < sched.size(); ++i) {
    if (!(sched[i] > 0.0)) throw ContractError("ir schedule needs kappa > 0");
    if (i > 0 && !(sched[i] < sched[i - 1])) {
      throw ContractError("ir schedule must be strictly descending");
    }
  }
  const Grid grid = build_grid(plan.grid, params);
  const FockBasis basis(grid.size(), plan.nmax);
  const SparseHamiltonian h0 = assemble(grid, basis, params.with_kappa(0.0));
  table.rows.resize(sched.size());
  const auto count = static_cast<long>(sched.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < count; ++i) {
    const double kappa = sched[static_cast<std::size_t>(i)];
    const ModelParams at = params.with_kappa(kappa);
    const auto gs = lanczos_ground(reassemble_diagonal(h0, grid, basis, at), plan.lanczos);
    const auto obs = observe(gs.vector, basis, grid);
    auto& row = table.rows[static_cast<std::size_t>(i)];
    row.parameter = kappa;
    row.E = gs.energy;
    row.residual = gs.residual;
    row.converged = gs.converged;
    row.N_mean = obs.mean_number;
    row.Z = obs.vacuum_overlap;
  }
  if (table.rows.size() >= 3) {
    const std::size_t n = table.rows.size();
    const double x3[] = {table.rows[n - 3].parameter, table.rows[n - 2].parameter,
                         table.rows[n - 1].parameter};
    const double y3[] = {table.rows[n - 3].E, table.rows[n - 2].E, table.rows[n - 1].E};
    const double three = neville_at_zero(x3, y3);
    const double two = neville_at_zero(std::span(x3).subspan(1), std::span(y3).subspan(1));
    table.extrapolated = three;
    table.extrapolation_error = std::abs(three - two);
  }
  return table;
}

std::string PstarReport::pstar_text() const {
  if (!pstar) {
    return curve.empty() ? std::string("> max P") : "> " + shortest(curve.back().P);
  }
  return shortest(*pstar);
}

PstarReport estimate_pstar(MomentumSolver& solver, const std::vector<double>& P_schedule,
                           PstarCriteria criteria) {
  if (!std::is_sorted(P_schedule.begin(), P_schedule.end())) {
    throw ContractError("estimate_pstar needs an ascending schedule");
  }
  const Grid& grid = solver.grid();
  require_cartesian(grid, "estimate_pstar");
  const ModelParams& params = solver.params();
  PstarReport report;
  report.c = params.c();
  report.eps_crit = criteria.eps_crit < 0.0 ? 1e-3 * params.c() * params.c() : criteria.eps_crit;
  report.z_crit = criteria.z_crit;
  for (const double P : P_schedule) {
    PstarRow row;
    row.P = P;
    const auto gs = solver.solve({0.0, 0.0, P});
    row.E = gs.energy;
    row.Z = observe(gs.vector, solver.basis(), grid).vacuum_overlap;
    row.converged = gs.converged;
    row.threshold = std::numeric_limits<double>::infinity();
    for (const auto& m : grid.modes()) {
      if (norm(m.k) == 0.0) continue;
      const auto e = solver.energy(Vec3{0.0, 0.0, P} - m.k);
      row.converged = row.converged && e.converged;
      row.threshold = std::min(row.threshold, e.energy + dispersion(m.k, params));
    }
    row.delta = row.threshold - row.E;
    if (!report.pstar_delta && row.delta <= report.eps_crit) report.pstar_delta = P;
    if (!report.pstar_z && row.Z < report.z_crit) report.pstar_z = P;
    report.curve.push_back(row);
  }
  if (report.pstar_delta && report.pstar_z) {
    report.pstar = std::min(*report.pstar_delta, *report.pstar_z);
  } else if (report.pstar_delta) {
    report.pstar = report.pstar_delta;
  } else if (report.pstar_z) {
    report.pstar = report.pstar_z;
  }
  return report;
}

double pstar_free_closed_form(const Grid& grid, const ModelParams& params, double eps_crit) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& m : grid.modes()) {
    if (!(m.k.z > 0.0)) continue;
    best = std::min(best, (0.5 * norm2(m.k) + dispersion(m.k, params) - eps_crit) / m.k.z);
  }
  return best;
}

}  // namespace polaron
