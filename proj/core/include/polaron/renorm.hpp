#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "polaron/model.hpp"
#include "polaron/quadrature.hpp"
#include "polaron/vec3.hpp"

namespace polaron {

// Counterterm integrals and kernel functions of the ultraviolet renormalization. Every
// function takes an explicit cutoff L; the form factor is cut at min(L, params.lambda()).
// All denominators use omega_kappa; v itself never depends on kappa.

inline constexpr double kDefaultMu = 1.0;

struct RenormOptions {
  QuadOptions outer{0.0, 1e-8, 20000};
  QuadOptions inner{0.0, 1e-9, 4000};  // nested theta10 evaluations
};

/// Sigma1_L = -4 pi int_0^L k^2 v(k)^2 / (k^2/2 + omega(k)) dk. L must be finite.
QuadResult sigma1(const ModelParams& params, double L, const QuadOptions& options = {});

/// theta_{L,1,0}(p, eta) at total momentum params.momentum(); depends on P - p only.
/// Two-dimensional over (|q|, cos) with the axis along P - p; L may be infinite.
QuadResult theta10(const Vec3& p, double eta, double mu, double L, const ModelParams& params,
                   const QuadOptions& options = {});

struct Sigma2Result {
  QuadResult term_a;  // single integral over theta10(k, omega(k)) at P = mu = 0
  QuadResult term_b;  // double integral, reduced to (|k|, |l|, cos angle)
  double value = 0.0;  // term_a - term_b
  double error = 0.0;
  bool converged = false;
  std::string failed_term;  // "A", "B", "A,B" or empty
};

Sigma2Result sigma2(const ModelParams& params, double L, const RenormOptions& options = {});

/// theta_{L,2,0}(p, eta) with Sigma2_L already subtracted. Evaluated as the integral of the
/// difference between the integrands at (P - p, eta, mu) and at zero, so L = infinity is
/// admitted and the value at P = p, eta = mu = 0 is exactly 0.
QuadResult theta20(const Vec3& p, double eta, double mu, double L, const ModelParams& params,
                   const RenormOptions& options = {});

struct Theta21Result {
  double closed_term = 0.0;  // v(k) v(l) theta10(p + k + l, ...) over the two denominators
  QuadResult theta10_part;    // the theta10 factor inside closed_term
  QuadResult integral_term;   // int v(q)^2 theta11(p + q, eta + omega(q), k, l) / D(q)^2 dq
  double value = 0.0;
  bool converged = false;
};

Theta21Result theta21(const Vec3& p, double eta, const Vec3& k, const Vec3& l, double mu,
                      double L, const ModelParams& params, const RenormOptions& options = {});

enum class DivergenceForm { linear_in_L, log_in_L };

std::string to_string(DivergenceForm form);

struct DivergenceFit {
  DivergenceForm form = DivergenceForm::linear_in_L;
  double slope = 0.0;
  double offset = 0.0;
  double residual = 0.0;  // root mean square of the fit residuals
};

/// Least squares of value against {1, L} or {1, log L}; needs >= 4 samples with distinct L.
DivergenceFit fit_divergence(std::span<const std::pair<double, double>> samples,
                             DivergenceForm form);

}  // namespace polaron
