#include "polaron_app/commands.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "polaron/diagnostics.hpp"
#include "polaron/errors.hpp"
#include "polaron/renorm.hpp"

namespace polaron::app {

namespace {

using Json = nlohmann::ordered_json;

double flag(bool b) { return b ? 1.0 : 0.0; }

Json optional_json(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

Vec3 along_z(double P) { return {0.0, 0.0, P}; }

CommandResult solve(const RunConfig& config) {
  const ModelParams params = config.model();
  const Grid grid = build_grid(config.grid(), params);
  const MomentumSolver solver(grid, config.nmax(), params, config.lanczos());
  const double P = config.real("solve.P");
  const auto gs = solver.solve(along_z(P));
  const auto obs = observe(gs.vector, solver.basis(), grid);

  CommandResult out;
  out.table.columns = {{"P", "1"},       {"E", "1"},          {"residual", "1"},
                       {"Z", "1"},       {"N_mean", "1"},     {"dGamma_p_z", "1"},
                       {"iterations", "1"}, {"converged", "flag"}};
  out.table.add({P, gs.energy, gs.residual, obs.vacuum_overlap, obs.mean_number,
                 obs.mean_momentum.z, static_cast<double>(gs.iterations), flag(gs.converged)});
  out.details["grid_hash"] = grid.hash();
  out.details["modes"] = grid.size();
  out.details["dimension"] = solver.basis().size();
  out.summary = "solve: E = " + format17(gs.energy) + " at P = " + format17(P) + " (residual " +
                format17(gs.residual) + ", Z " + format17(obs.vacuum_overlap) + ", dim " +
                std::to_string(solver.basis().size()) + ")";
  if (!gs.converged) {
    out.summary += " NOT CONVERGED";
    out.exit_code = kExitNonConvergence;
  }
  return out;
}

CommandResult scan_p(const RunConfig& config) {
  const ModelParams params = config.model();
  const Grid grid = build_grid(config.grid(), params);
  const auto options = config.lanczos();
  const auto table = scan_momentum(grid, params, config.list("scan.P"), config.nmax(), options);

  CommandResult out;
  out.table.columns = {{"P", "1"}, {"E", "1"},          {"residual", "1"}, {"Z", "1"},
                       {"N_mean", "1"}, {"dGamma_p_z", "1"}, {"converged", "flag"}};
  std::size_t unconverged = 0;
  for (const auto& r : table.rows) {
    out.table.add({r.P, r.E, r.residual, r.Z, r.N_mean, r.dGamma_p_z, flag(r.converged)});
    if (!r.converged) ++unconverged;
  }
  out.details["grid_hash"] = table.grid_hash;
  out.summary = "scan-p: " + std::to_string(table.rows.size()) + " momenta, E(0) = " +
                format17(table.rows.front().E) + ", E(max) = " + format17(table.rows.back().E);
  const bool has_origin = std::any_of(table.rows.begin(), table.rows.end(),
                                      [](const ScanRow& r) { return r.P == 0.0; });
  if (has_origin && table.rows.size() - unconverged >= 3) {
    const auto report = check_gross_convexity(table, options.tol);
    out.details["gross_ok"] = report.gross_ok;
    out.details["convexity_ok"] = report.convexity_ok;
    out.details["lipschitz_ok"] = report.lipschitz_ok;
    out.details["worst_gross"] = report.worst_gross;
    out.details["worst_convexity"] = report.worst_convexity;
    out.details["worst_lipschitz"] = report.worst_lipschitz;
    out.summary += report.passed() ? ", bounds hold" : ", bounds VIOLATED";
  }
  if (unconverged > 0) {
    out.summary += ", " + std::to_string(unconverged) + " unconverged";
    out.exit_code = kExitNonConvergence;
  }
  return out;
}

CommandResult counterterm(const RunConfig& config) {
  // The cutoff comes from the schedule; model.lambda plays no role here.
  const ModelParams params = config.model().with_lambda(kInfiniteCutoff);
  const auto lambdas = config.list("counterterm.lambdas");
  const double rel_tol = config.real("counterterm.rel_tol");
  const bool second = config.text("counterterm.order") == "sigma2";
  CommandResult out;
  std::vector<std::pair<double, double>> samples;
  bool all_converged = true;
  if (second) {
    out.table.columns = {{"lambda", "1"}, {"value", "1"},  {"error", "1"},
                         {"term_a", "1"}, {"term_b", "1"}, {"converged", "flag"}};
    RenormOptions options;
    options.outer.rel_tol = rel_tol;
    for (double L : lambdas) {
      const auto s = sigma2(params, L, options);
      out.table.add({L, s.value, s.error, s.term_a.value, s.term_b.value, flag(s.converged)});
      samples.push_back({L, s.value});
      all_converged = all_converged && s.converged;
    }
  } else {
    out.table.columns = {{"lambda", "1"}, {"value", "1"}, {"error", "1"}, {"converged", "flag"}};
    for (double L : lambdas) {
      const auto s = sigma1(params, L, QuadOptions{0.0, rel_tol, 20000});
      out.table.add({L, s.value, s.error, flag(s.converged)});
      samples.push_back({L, s.value});
      all_converged = all_converged && s.converged;
    }
  }
  const std::string order = second ? "sigma2" : "sigma1";
  out.summary = "counterterm: " + order + "(" + format17(lambdas.back()) +
                ") = " + format17(samples.back().second);
  if (samples.size() >= 4) {
    const auto form = second ? DivergenceForm::log_in_L : DivergenceForm::linear_in_L;
    const auto fit = fit_divergence(samples, form);
    out.details["fit_form"] = to_string(fit.form);
    out.details["fit_slope"] = fit.slope;
    out.details["fit_offset"] = fit.offset;
    out.details["fit_residual"] = fit.residual;
    out.summary += ", " + to_string(fit.form) + " slope " + format17(fit.slope);
  }
  if (!all_converged) {
    out.summary += ", quadrature NOT CONVERGED";
    out.exit_code = kExitNonConvergence;
  }
  return out;
}

CommandResult uv_scan(const RunConfig& config) {
  RegularizationPlan plan;
  plan.grid = config.grid();
  plan.nmax = config.nmax();
  plan.lanczos = config.lanczos();
  plan.renorm.outer.rel_tol = config.real("uv.rel_tol");
  plan.schedule = config.list("uv.lambdas");
  const ModelParams params = config.model().with_momentum(along_z(config.real("uv.P")));
  const auto table = scan_regularization(RegularizationKind::uv, plan, params);

  CommandResult out;
  out.table.columns = {{"lambda", "1"},         {"E", "1"},
                       {"residual", "1"},       {"sigma1_disc", "1"},
                       {"sigma2", "1"},         {"E_minus_sigma1", "1"},
                       {"E_minus_sigma12", "1"}, {"converged", "flag"},
                       {"sigma2_converged", "flag"}};
  bool ok = true;
  for (const auto& r : table.rows) {
    out.table.add({r.parameter, r.E, r.residual, r.sigma1_disc, r.sigma2, r.E_minus_sigma1,
                   r.E_minus_sigma12, flag(r.converged), flag(r.sigma2_converged)});
    ok = ok && r.converged && r.sigma2_converged;
  }
  const auto& last = table.rows.back();
  out.summary = "uv-scan: " + std::to_string(table.rows.size()) + " cutoffs, E - Sigma1 = " +
                format17(last.E_minus_sigma1) + " at lambda = " + format17(last.parameter);
  if (!ok) {
    out.summary += ", NOT CONVERGED";
    out.exit_code = kExitNonConvergence;
  }
  return out;
}

CommandResult ir_scan(const RunConfig& config) {
  RegularizationPlan plan;
  plan.grid = config.grid();
  plan.nmax = config.nmax();
  plan.lanczos = config.lanczos();
  plan.schedule = config.list("ir.kappas");
  const ModelParams params = config.model().with_momentum(along_z(config.real("ir.P")));
  const auto table = scan_regularization(RegularizationKind::ir, plan, params);

  CommandResult out;
  out.table.columns = {{"kappa", "1"}, {"E", "1"}, {"residual", "1"},
                       {"N_mean", "1"}, {"Z", "1"}, {"converged", "flag"}};
  bool ok = true;
  for (const auto& r : table.rows) {
    out.table.add({r.parameter, r.E, r.residual, r.N_mean, r.Z, flag(r.converged)});
    ok = ok && r.converged;
  }
  out.details["extrapolated"] = optional_json(table.extrapolated);
  out.details["extrapolation_error"] = table.extrapolation_error;
  out.summary = "ir-scan: E = " + format17(table.rows.back().E) + " at kappa = " +
                format17(table.rows.back().parameter);
  if (table.extrapolated) {
    out.summary += ", kappa -> 0: " + format17(*table.extrapolated) + " +- " +
                   format17(table.extrapolation_error);
  }
  if (!ok) {
    out.summary += ", NOT CONVERGED";
    out.exit_code = kExitNonConvergence;
  }
  return out;
}

CommandResult gap(const RunConfig& config) {
  const ModelParams params = config.model();
  const Grid grid = build_grid(config.grid(), params);
  MomentumSolver solver(grid, config.nmax(), params, config.lanczos());
  CommandResult out;
  out.table.columns = {{"P", "1"},     {"E", "1"},       {"threshold", "1"},
                       {"gap", "1"},   {"kappa", "1"},   {"samples", "1"},
                       {"ok", "flag"}, {"converged", "flag"}};
  bool all_ok = true;
  bool converged = true;
  double smallest = std::numeric_limits<double>::infinity();
  for (double P : config.list("gap.P")) {
    const auto r = hvz_gap(solver, P);
    out.table.add({P, r.energy, r.threshold, r.gap, r.kappa, static_cast<double>(r.samples),
                   flag(r.ok), flag(r.converged)});
    all_ok = all_ok && r.ok;
    converged = converged && r.converged;
    smallest = std::min(smallest, r.gap);
  }
  out.details["distinct_solves"] = solver.distinct_solves();
  out.summary = "gap: smallest gap " + format17(smallest) + " (kappa " + format17(params.kappa()) +
                "), " + (all_ok ? "gap >= kappa holds" : "gap < kappa VIOLATED");
  if (!converged) {
    out.summary += ", NOT CONVERGED";
    out.exit_code = kExitNonConvergence;
  } else if (!all_ok) {
    out.exit_code = kExitPropertyFailure;
  }
  return out;
}

CommandResult pstar(const RunConfig& config) {
  const ModelParams params = config.model();
  const Grid grid = build_grid(config.grid(), params);
  MomentumSolver solver(grid, config.nmax(), params, config.lanczos());
  PstarCriteria criteria;
  criteria.eps_crit = config.real("pstar.eps_crit");
  criteria.z_crit = config.real("pstar.z_crit");
  const auto report = estimate_pstar(solver, config.list("pstar.P"), criteria);
  const double free = pstar_free_closed_form(grid, params, report.eps_crit);

  CommandResult out;
  out.table.columns = {{"P", "1"},     {"E", "1"}, {"threshold", "1"},
                       {"delta", "1"}, {"Z", "1"}, {"converged", "flag"}};
  bool converged = true;
  for (const auto& r : report.curve) {
    out.table.add({r.P, r.E, r.threshold, r.delta, r.Z, flag(r.converged)});
    converged = converged && r.converged;
  }
  out.details["pstar"] = report.pstar_text();
  out.details["pstar_delta"] = optional_json(report.pstar_delta);
  out.details["pstar_z"] = optional_json(report.pstar_z);
  out.details["effective_mass"] = optional_json(report.effective_mass());
  out.details["eps_crit"] = report.eps_crit;
  out.details["z_crit"] = report.z_crit;
  out.details["free_crossing"] = free;
  out.details["eps_grid"] = std::abs(free - params.c());
  out.summary = "pstar: P* = " + report.pstar_text() + " (c = " + format17(params.c()) +
                ", free-grid crossing " + format17(free) + ")";
  if (!converged) {
    out.summary += ", NOT CONVERGED";
    out.exit_code = kExitNonConvergence;
  }
  return out;
}

CommandResult check(const RunConfig& config) {
  const auto outcomes = run_property_suite(config);
  CommandResult out;
  out.table.columns = {{"property", "index"}, {"passed", "flag"}, {"value", "1"}, {"bound", "1"}};
  Json names = Json::array();
  std::size_t passed = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    out.table.add({static_cast<double>(i), flag(o.passed), o.value, o.bound});
    names.push_back({{"name", o.name}, {"passed", o.passed}, {"detail", o.detail}});
    if (o.passed) ++passed;
  }
  out.details["properties"] = names;
  out.summary = "check: " + std::to_string(passed) + "/" + std::to_string(outcomes.size()) +
                " properties passed";
  if (passed != outcomes.size()) {
    for (const auto& o : outcomes) {
      if (!o.passed) out.summary += "; FAILED " + o.name;
    }
    out.exit_code = kExitPropertyFailure;
  }
  return out;
}

Json config_json(const RunConfig& config) {
  Json sections = Json::object();
  for (const auto& spec : schema()) {
    sections[spec.section][spec.key] = config.raw(spec.section + "." + spec.key);
  }
  return sections;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"solve", "scan-p", "counterterm", "uv-scan",
                                                 "ir-scan", "gap", "pstar", "check"};
  return names;
}

CommandResult run_command(const std::string& name, const RunConfig& config) {
  if (name == "solve") return solve(config);
  if (name == "scan-p") return scan_p(config);
  if (name == "counterterm") return counterterm(config);
  if (name == "uv-scan") return uv_scan(config);
  if (name == "ir-scan") return ir_scan(config);
  if (name == "gap") return gap(config);
  if (name == "pstar") return pstar(config);
  if (name == "check") return check(config);
  throw ConfigError("unknown command '" + name + "'");
}

Bundle render(const std::string& name, const CacheKey& key, const RunConfig& config,
              const CommandResult& result) {
  const std::string stem = name + "-" + key.short_hex();
  Json meta;
  meta["command"] = name;
  meta["cache_key"] = key.hex();
  meta["version"] = kCodeVersion;
  meta["config"] = config_json(config);
  Json columns = Json::array();
  for (const auto& c : result.table.columns) columns.push_back({{"name", c.name}, {"unit", c.unit}});
  meta["columns"] = columns;
  meta["details"] = result.details;
  meta["summary"] = result.summary;
  meta["exit_code"] = result.exit_code;

  Bundle bundle;
  bundle.summary = result.summary;
  bundle.exit_code = result.exit_code;
  if (config.text("output.format") == "json") {
    Json rows = Json::array();
    for (const auto& r : result.table.rows) rows.push_back(r);
    meta["rows"] = rows;
  } else {
    bundle.files[stem + ".csv"] = to_csv(result.table);
  }
  bundle.files[stem + ".json"] = meta.dump(2) + "\n";
  if (!result.table.rows.empty()) bundle.files[stem + ".dat"] = plotdata_text(result.table);
  return bundle;
}

}  // namespace polaron::app
