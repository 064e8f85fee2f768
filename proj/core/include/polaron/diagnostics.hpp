#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polaron/fock.hpp"
#include "polaron/grid.hpp"
#include "polaron/model.hpp"
#include "polaron/renorm.hpp"
#include "polaron/solver.hpp"

namespace polaron {

/// Second-order perturbation theory on the discrete model:
/// 1/2 P^2 - sum_j g_j^2 / (1/2 (P - k_j)^2 + omega_kappa(k_j) - 1/2 P^2).
/// Throws ContractError naming the mode if a coupled denominator is <= 0.
double pt2_energy(const Grid& grid, const ModelParams& params, const Vec3& P);

/// Ground states of one discretized model at many total momenta. The off-diagonal part is
/// assembled once; each momentum only rebuilds the diagonal. Results are memoized under the
/// grid's symmetry (cartesian: signed permutations of the components; spherical: none).
class MomentumSolver {
 public:
  MomentumSolver(const Grid& grid, int nmax, const ModelParams& params,
                 LanczosOptions options = {});

  const Grid& grid() const { return grid_; }
  const FockBasis& basis() const { return basis_; }
  const ModelParams& params() const { return params_; }
  const LanczosOptions& options() const { return options_; }

  /// Full ground state at total momentum P (not memoized).
  GroundStateResult solve(const Vec3& P) const;

  struct Energy {
    double energy = 0.0;
    double residual = 0.0;
    bool converged = false;
  };
  /// Memoized ground energy at total momentum Q.
  Energy energy(const Vec3& Q);
  std::size_t distinct_solves() const { return cache_.size(); }

 private:
  std::array<double, 3> canonical(const Vec3& Q) const;

  Grid grid_;
  FockBasis basis_;
  ModelParams params_;
  LanczosOptions options_;
  SparseHamiltonian base_;
  std::map<std::array<double, 3>, Energy> cache_;
};

struct ScanRow {
  double P = 0.0;
  double E = 0.0;
  double residual = 0.0;
  double Z = 0.0;
  double N_mean = 0.0;
  double dGamma_p_z = 0.0;
  bool converged = false;
};

struct ScanTable {
  std::vector<ScanRow> rows;
  ModelParams params{1.0, 1.0, 0.0};
  std::uint64_t grid_hash = 0;
  int nmax = 0;
};

/// One ground-state solve per P (along +z, ascending). Unconverged rows are marked and kept.
ScanTable scan_momentum(const Grid& grid, const ModelParams& params,
                        const std::vector<double>& P_list, int nmax,
                        const LanczosOptions& options = {});

struct GrossConvexityReport {
  bool gross_ok = true;      // 0 <= E(P) - E(0) <= P^2/2
  bool convexity_ok = true;  // P^2/2 - E(P) convex
  bool lipschitz_ok = true;  // E(P - K) - E(P) >= -|K||P|
  double worst_gross = 0.0;  // smallest margin of the two-sided Gross bound
  double worst_convexity = 0.0;
  double worst_lipschitz = 0.0;
  std::optional<std::pair<double, double>> gross_offender;       // (P, E)
  std::optional<std::pair<double, double>> convexity_offender;   // (P_i, second difference)
  std::optional<std::pair<double, double>> lipschitz_offender;   // (P, P')
  std::size_t skipped_rows = 0;  // unconverged rows left out

  bool passed() const { return gross_ok && convexity_ok && lipschitz_ok && skipped_rows == 0; }
};

/// Needs >= 3 converged rows including P = 0. `tol` is the solver residual tolerance; the
/// bounds are relaxed by 2 tol (Gross, Lipschitz) and 4 tol (convexity).
GrossConvexityReport check_gross_convexity(const ScanTable& table, double tol);

struct GapReport {
  double P = 0.0;
  double energy = 0.0;
  double threshold = 0.0;
  double gap = 0.0;
  double kappa = 0.0;
  std::size_t argmin_mode = 0;
  std::size_t samples = 0;
  bool converged = false;
  bool ok = false;  // gap >= kappa - 4 tol
};

/// One-phonon HVZ threshold min_j E(P - k_j) + omega_kappa(k_j) over modes with
/// |k_j| <= kmax / 2, every E solved on the same cartesian grid.
GapReport hvz_gap(MomentumSolver& solver, double P);

struct PullthroughMode {
  std::size_t mode = 0;
  double k = 0.0;
  double rho = 0.0;       // ||a_j psi|| / sqrt(w_j)
  double envelope = 0.0;  // rho (sqrt|k| v |k|^2)
  double bound_low = 0.0;   // v / ((c - |P|)|k|)
  double bound_high = 0.0;  // 2 v / (xi |k|^2), applies for |k| > 2|P|/xi, else 0
  bool ok = true;
};

struct PullthroughReport {
  std::vector<PullthroughMode> modes;
  double max_envelope = 0.0;
  double worst_ratio = 0.0;  // max over modes and bounds of rho / bound
  double slack = 0.25;
  bool ok = true;
};

/// Amplitudes ||a_j psi|| at or below this count as zero when a bound vanishes (v = 0); it sits
/// above the start-vector leftovers of a solve converged to the default residual.
inline constexpr double kAmplitudeFloor = 1e-8;

/// Per-mode decay envelope of a ground state at P = params.momentum(); needs |P| < c.
PullthroughReport pullthrough_envelope(std::span<const double> psi, const Grid& grid,
                                       const FockBasis& basis, const ModelParams& params,
                                       double slack = 0.25);

struct EquicontinuityReport {
  std::size_t pairs = 0;
  double max_ratio = 0.0;  // r' = ||a_j' psi - a_j psi|| / sqrt(w) * |k_j|^2 / |k_j' - k_j|
  bool ok = true;          // r' finite
};

EquicontinuityReport equicontinuity_check(std::span<const double> psi, const Grid& grid,
                                          const FockBasis& basis);

enum class RegularizationKind { uv, ir };

struct RegularizationRow {
  double parameter = 0.0;  // Lambda (uv) or kappa (ir)
  double E = 0.0;
  double residual = 0.0;
  bool converged = false;
  // uv
  double sigma1_disc = 0.0;
  double sigma2 = 0.0;
  double E_minus_sigma1 = 0.0;
  double E_minus_sigma12 = 0.0;
  bool sigma2_converged = true;
  // ir
  double N_mean = 0.0;
  double Z = 0.0;
};

struct RegularizationTable {
  RegularizationKind kind = RegularizationKind::uv;
  std::vector<RegularizationRow> rows;
  // ir only: Richardson extrapolation of E to kappa -> 0 from the last three rows.
  std::optional<double> extrapolated;
  double extrapolation_error = 0.0;
};

struct RegularizationPlan {
  GridSpec grid;
  int nmax = 1;
  LanczosOptions lanczos;
  RenormOptions renorm;
  std::vector<double> schedule;  // uv: ascending Lambda; ir: descending kappa > 0
};

/// Discrete one-phonon counterterm -sum_j g_j^2 / (k_j^2 / 2 + omega_kappa(k_j)).
double sigma1_discrete(const Grid& grid, const ModelParams& params);

RegularizationTable scan_regularization(RegularizationKind kind, const RegularizationPlan& plan,
                                        const ModelParams& params);

/// Polynomial extrapolation to x = 0 through the given points (Neville).
double neville_at_zero(std::span<const double> x, std::span<const double> y);

struct PstarRow {
  double P = 0.0;
  double E = 0.0;
  double threshold = 0.0;
  double delta = 0.0;
  double Z = 0.0;
  bool converged = false;
};

struct PstarCriteria {
  double eps_crit = -1.0;  // negative: 1e-3 c^2
  double z_crit = 0.1;
};

struct PstarReport {
  std::vector<PstarRow> curve;
  std::optional<double> pstar_delta;  // first P with delta <= eps_crit
  std::optional<double> pstar_z;      // first P with Z < z_crit
  std::optional<double> pstar;        // the smaller of the two
  double eps_crit = 0.0;
  double z_crit = 0.0;
  double c = 1.0;

  std::optional<double> effective_mass() const {
    return pstar ? std::optional<double>(*pstar / c) : std::nullopt;
  }
  /// "> max P" when no criterion crossed along the schedule.
  std::string pstar_text() const;
};

PstarReport estimate_pstar(MomentumSolver& solver, const std::vector<double>& P_schedule,
                           PstarCriteria criteria = {});

/// g = 0 threshold crossing on the grid: min over modes with k_z > 0 of
/// (k^2/2 + omega_kappa(k) - eps_crit) / k_z.
double pstar_free_closed_form(const Grid& grid, const ModelParams& params, double eps_crit);

}  // namespace polaron
