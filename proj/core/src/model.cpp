#include "polaron/model.hpp"

#include <cmath>
#include <string>

#include "polaron/errors.hpp"

namespace polaron {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(std::string("invalid model parameter: ") + what);
}

void check_energy_args(double eta, double mu) {
  if (!(eta >= 0.0)) throw ContractError("kernel requires eta >= 0");
  if (!(mu >= 0.0)) throw ContractError("kernel requires mu >= 0");
}

double checked_inverse(double denominator) {
  if (!(denominator > 0.0)) throw ContractError("kernel denominator vanishes");
  return 1.0 / denominator;
}

}  // namespace

ModelParams::ModelParams(double c, double xi, double g, double kappa, double lambda, Vec3 momentum)
    : c_(c), xi_(xi), g_(g), kappa_(kappa), lambda_(lambda), momentum_(momentum) {
  require(std::isfinite(c) && c > 0.0, "c must be finite and > 0");
  require(std::isfinite(xi) && xi > 0.0, "xi must be finite and > 0");
  require(std::isfinite(g) && g >= 0.0, "g must be finite and >= 0");
  require(std::isfinite(kappa) && kappa >= 0.0, "kappa must be finite and >= 0");
  require(lambda > 0.0, "lambda must be > 0 (or infinite)");
  require(std::isfinite(momentum.x) && std::isfinite(momentum.y) && std::isfinite(momentum.z),
          "momentum must be finite");
}

ModelParams ModelParams::with_g(double g) const {
  return ModelParams(c_, xi_, g, kappa_, lambda_, momentum_);
}
ModelParams ModelParams::with_kappa(double kappa) const {
  return ModelParams(c_, xi_, g_, kappa, lambda_, momentum_);
}
ModelParams ModelParams::with_lambda(double lambda) const {
  return ModelParams(c_, xi_, g_, kappa_, lambda, momentum_);
}
ModelParams ModelParams::with_momentum(const Vec3& momentum) const {
  return ModelParams(c_, xi_, g_, kappa_, lambda_, momentum);
}

double bare_dispersion(double k_abs, const ModelParams& params) {
  const double k2 = k_abs * k_abs;
  return std::sqrt(params.c() * params.c() * k2 + params.xi() * params.xi() * k2 * k2);
}

double dispersion_radial(double k_abs, const ModelParams& params) {
  return bare_dispersion(k_abs, params) + params.kappa();
}

double dispersion(const Vec3& k, const ModelParams& params) {
  return dispersion_radial(norm(k), params);
}

double form_factor_radial(double k_abs, const ModelParams& params) {
  if (k_abs <= 0.0 || !(k_abs < params.lambda()) || params.g() == 0.0) return 0.0;
  // |k|^2 / omega(k) = |k| / sqrt(c^2 + xi^2 |k|^2), free of 0/0 at small |k|.
  const double ratio =
      k_abs / std::sqrt(params.c() * params.c() + params.xi() * params.xi() * k_abs * k_abs);
  return params.g() * std::sqrt(ratio);
}

double form_factor(const Vec3& k, const ModelParams& params) {
  return form_factor_radial(norm(k), params);
}

double theta11(const Vec3& p, double eta, const Vec3& k, const Vec3& l, double mu,
               const ModelParams& params) {
  check_energy_args(eta, mu);
  const double vk = form_factor(k, params);
  const double vl = form_factor(l, params);
  const double denom = 0.5 * norm2(params.momentum() - p - k - l) + eta + dispersion(k, params) +
                       dispersion(l, params) + mu;
  const double inv = checked_inverse(denom);
  if (vk == 0.0 || vl == 0.0) return 0.0;
  return -vk * vl * inv;
}

double theta22(const Vec3& p, double eta, const Vec3& k1, const Vec3& k2, const Vec3& l1,
               const Vec3& l2, double mu, const ModelParams& params) {
  check_energy_args(eta, mu);
  const Vec3& P = params.momentum();
  const double wk1 = dispersion(k1, params);
  const double wl1 = dispersion(l1, params);
  const double dk = checked_inverse(0.5 * norm2(P - p - k1) + eta + wk1 + mu);
  const double dl = checked_inverse(0.5 * norm2(P - p - l1) + eta + wl1 + mu);
  const double inner = theta11(p + k1 + l1, eta + wk1 + wl1, k2, l2, mu, params);
  return form_factor(k1, params) * form_factor(l1, params) * inner * dk * dl;
}

}  // namespace polaron
