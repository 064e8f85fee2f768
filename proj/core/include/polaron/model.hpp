#pragma once

#include <limits>

#include "polaron/vec3.hpp"

namespace polaron {

/// Sentinel for an infinite ultraviolet cutoff; the indicator |k| < cutoff never truncates.
inline constexpr double kInfiniteCutoff = std::numeric_limits<double>::infinity();

/// Physical constants of one Hamiltonian instance. The impurity mass is fixed to 1.
///
/// Invariants are checked on construction and on every `with_*` copy:
/// c > 0, xi > 0, g >= 0, kappa >= 0, lambda > 0 (possibly infinite).
class ModelParams {
 public:
  ModelParams(double c, double xi, double g, double kappa = 0.0, double lambda = kInfiniteCutoff,
              Vec3 momentum = {});

  double c() const { return c_; }
  double xi() const { return xi_; }
  double g() const { return g_; }
  double kappa() const { return kappa_; }
  double lambda() const { return lambda_; }
  const Vec3& momentum() const { return momentum_; }
  bool infinite_cutoff() const { return lambda_ == kInfiniteCutoff; }

  ModelParams with_g(double g) const;
  ModelParams with_kappa(double kappa) const;
  ModelParams with_lambda(double lambda) const;
  ModelParams with_momentum(const Vec3& momentum) const;

 private:
  double c_;
  double xi_;
  double g_;
  double kappa_;
  double lambda_;
  Vec3 momentum_;
};

/// omega(|k|) = sqrt(c^2 k^2 + xi^2 k^4), without the infrared mass.
double bare_dispersion(double k_abs, const ModelParams& params);

/// omega_kappa(k) = omega(|k|) + kappa.
double dispersion(const Vec3& k, const ModelParams& params);
double dispersion_radial(double k_abs, const ModelParams& params);

/// v_Lambda(k) = g 1_{|k| < Lambda} sqrt(|k|^2 / omega(k)), with the kappa = 0 dispersion
/// so that H_kappa = H_0 + kappa N holds exactly. v(0) = 0 (the 0/0 limit).
double form_factor(const Vec3& k, const ModelParams& params);
double form_factor_radial(double k_abs, const ModelParams& params);

/// Closed-form two-phonon kernel
///   -v(k) v(l) / (1/2 (P - p - k - l)^2 + eta + omega_kappa(k) + omega_kappa(l) + mu).
/// Throws ContractError on a negative eta/mu or a vanishing denominator.
double theta11(const Vec3& p, double eta, const Vec3& k, const Vec3& l, double mu,
               const ModelParams& params);

/// Four-leg kernel built from theta11:
///   v(k1) v(l1) theta11(p + k1 + l1, eta + omega(k1) + omega(l1), k2, l2)
///   / [(1/2 (P-p-k1)^2 + eta + omega(k1) + mu) (1/2 (P-p-l1)^2 + eta + omega(l1) + mu)].
double theta22(const Vec3& p, double eta, const Vec3& k1, const Vec3& k2, const Vec3& l1,
               const Vec3& l2, double mu, const ModelParams& params);

}  // namespace polaron
