#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "polaron/errors.hpp"
#include "polaron/grid.hpp"
#include "polaron/renorm.hpp"

namespace polaron {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Composite Gauss-Legendre on [a, b]; b = inf is mapped by q = a + t / (1 - t).
template <class F>
double composite(F&& f, double a, double b, int panels, int order = 12) {
  const auto rule = gauss_legendre(order);
  const bool tail = std::isinf(b);
  const double lo = tail ? 0.0 : a;
  const double hi = tail ? 1.0 : b;
  const double h = (hi - lo) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = lo + (p + 0.5) * h;
    for (int i = 0; i < order; ++i) {
      const double t = mid + 0.5 * h * rule.nodes[i];
      const double w = 0.5 * h * rule.weights[i];
      if (tail) {
        const double s = 1.0 - t;
        sum += w * f(a + t / s) / (s * s);
      } else {
        sum += w * f(t);
      }
    }
  }
  return sum;
}

struct Oracle {
  ModelParams params;  // cutoff already applied

  double w(double q) const {
    return std::sqrt(params.c() * params.c() * q * q + params.xi() * params.xi() * q * q * q * q) +
           params.kappa();
  }
  double v2(double q) const {
    if (q <= 0.0 || q >= params.lambda()) return 0.0;
    const double w0 = std::sqrt(params.c() * params.c() * q * q +
                                params.xi() * params.xi() * q * q * q * q);
    return params.g() * params.g() * q * q / w0;
  }
  double free(double q) const { return 0.5 * q * q + w(q); }

  // theta10 with the angular integral done in closed form.
  double theta10(double U, double eta, double mu, int panels = 400) const {
    auto f = [&](double q) {
      const double v2q = v2(q);
      if (v2q == 0.0) return 0.0;
      const double a = free(q) + 0.5 * U * U + eta + mu;
      const double b = U * q;
      const double angular = b == 0.0 ? 2.0 / a : std::log1p(2.0 * b / (a - b)) / b;
      return -2.0 * kPi * q * q * v2q * (angular - 2.0 / free(q));
    };
    return composite(f, 0.0, params.lambda(), panels);
  }

  double sigma1(int panels = 2000) const {
    return composite([&](double q) { return -4.0 * kPi * q * q * v2(q) / free(q); }, 0.0,
                     params.lambda(), panels);
  }

  double term_a(int panels = 200) const {
    return composite(
        [&](double k) {
          if (v2(k) == 0.0) return 0.0;
          return 4.0 * kPi * k * k * v2(k) * theta10(k, w(k), 0.0, 200) / (free(k) * free(k));
        },
        0.0, params.lambda(), panels);
  }

  // Isotropic two-phonon integral with the relative angle done in closed form:
  // int int v^2 v^2 / (D(k) F D(l)) with D = k^2/2 + omega + s, F = (k+l)^2/2 + omega + omega + s.
  double pair_integral(double s, int panels = 300) const {
    return composite(
        [&](double k) {
          return composite(
              [&](double l) {
                const double vv = v2(k) * v2(l);
                if (vv == 0.0) return 0.0;
                const double alpha = 0.5 * (k * k + l * l) + w(k) + w(l) + s;
                const double b = k * l;
                const double angular = std::log1p(2.0 * b / (alpha - b)) / b;
                return 8.0 * kPi * kPi * k * k * l * l * vv * angular /
                       ((free(k) + s) * (free(l) + s));
              },
              0.0, params.lambda(), panels / 2);
        },
        0.0, params.lambda(), panels / 2);
  }
};

const ModelParams kUnit(1.0, 1.0, 1.0);

TEST(Sigma1, VanishesWithoutCoupling) {
  const auto r = sigma1(kUnit.with_g(0.0), 10.0);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_TRUE(r.converged);
}

TEST(Sigma1, MatchesCompositeOracle) {
  for (double L : {0.5, 2.0, 10.0, 50.0}) {
    for (const ModelParams& p : {kUnit, ModelParams(0.7, 1.3, 1.9, 0.2)}) {
      const auto r = sigma1(p, L);
      ASSERT_TRUE(r.converged);
      const double ref = Oracle{p.with_lambda(L)}.sigma1();
      EXPECT_NEAR(r.value, ref, 1e-9 * std::abs(ref)) << L;
    }
  }
}

TEST(Sigma1, SmallCutoffCubicLaw) {
  const double L = 1e-3;
  const auto r = sigma1(kUnit, L);
  const double law = -4.0 * kPi * L * L * L / 3.0;
  EXPECT_NEAR(r.value / law, 1.0, 0.01);
}

TEST(Sigma1, LargeCutoffSlope) {
  const double L = 1e3;
  const double slope = (sigma1(kUnit, 2 * L).value - sigma1(kUnit, L).value) / L;
  EXPECT_NEAR(slope / (-8.0 * kPi / 3.0), 1.0, 0.01);
  const ModelParams p(0.5, 2.0, 1.5);
  const double slope2 = (sigma1(p, 2 * L * 0.25).value - sigma1(p, L * 0.25).value) / (L * 0.25);
  EXPECT_NEAR(slope2 / (-4.0 * kPi * 2.25 / (2.0 * 2.5)), 1.0, 0.01);
}

TEST(Sigma1, NegativeAndDecreasing) {
  double prev = 0.0;
  for (double L = 0.01; L < 500.0; L *= 1.7) {
    const double s = sigma1(kUnit, L).value;
    EXPECT_LT(s, prev);
    prev = s;
  }
  EXPECT_THROW(sigma1(kUnit, kInf), ContractError);
}

TEST(Sigma1, CutoffSaturates) {
  const ModelParams p = kUnit.with_lambda(3.0);
  EXPECT_EQ(sigma1(p, 3.0).value, sigma1(p, 6.0).value);
}

TEST(Theta10, VanishesAtOrigin) {
  const auto r = theta10({}, 0.0, 0.0, kInf, kUnit);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(theta10({0.1, 0.0, 0.3}, 0.4, 1.0, 5.0, kUnit.with_g(0.0)).value, 0.0);
}

TEST(Theta10, RestFrameInfiniteCutoffAgainstRadialOracle) {
  const auto r = theta10({}, 0.0, 1.0, kInf, kUnit);
  ASSERT_TRUE(r.converged);
  // Only the mu shift differs between the two fractions, so the value is positive here.
  EXPECT_GT(r.value, 0.0);
  const Oracle o{kUnit};
  const double radial = composite(
      [&](double q) { return 4.0 * kPi * q * q * o.v2(q) / (o.free(q) * (o.free(q) + 1.0)); }, 0.0,
      kInf, 800);
  EXPECT_NEAR(r.value, radial, 1e-8 * radial);
}

TEST(Theta10, MovingFrameAgainstClosedAngularOracle) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.5);
  for (int i = 0; i < 12; ++i) {
    const ModelParams p = ModelParams(0.8 + 0.3 * u(rng), 0.6 + 0.5 * u(rng), 1.1, 0.1 * u(rng))
                              .with_momentum({0.0, 0.0, u(rng)});
    const Vec3 q{0.3 * u(rng), -0.2 * u(rng), 0.1 * u(rng)};
    const double eta = u(rng);
    const double mu = 0.2 + u(rng);
    for (double L : {4.0, kInf}) {
      const auto r = theta10(q, eta, mu, L, p);
      ASSERT_TRUE(r.converged);
      const double ref = Oracle{p.with_lambda(L)}.theta10(norm(p.momentum() - q), eta, mu, 2000);
      EXPECT_NEAR(r.value, ref, 1e-7 * std::abs(ref) + 1e-12) << i << " L=" << L;
    }
  }
}

TEST(Theta10, MonotoneInEtaAndMu) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  const ModelParams p = kUnit.with_momentum({0.0, 0.0, 0.4});
  for (int i = 0; i < 100; ++i) {
    const Vec3 q{0.0, 0.2 * u(rng), 0.3 * u(rng)};
    const double eta = u(rng), mu = 0.1 + u(rng);
    const double d_eta = 0.05 + u(rng), d_mu = 0.05 + u(rng);
    const double base = theta10(q, eta, mu, 20.0, p).value;
    EXPECT_GT(theta10(q, eta + d_eta, mu, 20.0, p).value, base);
    EXPECT_GT(theta10(q, eta, mu + d_mu, 20.0, p).value, base);
  }
}

TEST(Theta10, RotationInvariant) {
  const ModelParams along_z = kUnit.with_momentum({0.0, 0.0, 0.7});
  const double c = std::cos(0.9), s = std::sin(0.9);
  const ModelParams rotated = kUnit.with_momentum({0.7 * s * c, 0.7 * s * s, 0.7 * c});
  const Vec3 p{0.1, 0.0, 0.2};
  const Vec3 p_rot{0.1 * c * c - 0.2 * s * 0.0 + 0.2 * s * c, 0.1 * c * s + 0.2 * s * s, 0.2 * c - 0.1 * s};
  const auto a = theta10(p, 0.3, 1.0, 8.0, along_z);
  const auto b = theta10(p_rot, 0.3, 1.0, 8.0, rotated);
  // The rotated pair has the same |P - p| only up to rounding of the hand-built rotation.
  const double ua = norm(along_z.momentum() - p);
  const double ub = norm(rotated.momentum() - p_rot);
  const Oracle o{kUnit.with_lambda(8.0)};
  EXPECT_NEAR(a.value, o.theta10(ua, 0.3, 1.0, 2000), a.error + 1e-9);
  EXPECT_NEAR(b.value, o.theta10(ub, 0.3, 1.0, 2000), b.error + 1e-9);
}

TEST(Theta10, CutoffSaturates) {
  const ModelParams p = kUnit.with_lambda(3.0).with_momentum({0.0, 0.0, 0.5});
  EXPECT_EQ(theta10({}, 0.2, 1.0, 3.0, p).value, theta10({}, 0.2, 1.0, 6.0, p).value);
  EXPECT_EQ(theta10({}, 0.2, 1.0, kInf, p).value, theta10({}, 0.2, 1.0, 3.0, p).value);
}

TEST(Theta10, RejectsNegativeArguments) {
  EXPECT_THROW(theta10({}, -0.1, 1.0, 2.0, kUnit), ContractError);
  EXPECT_THROW(theta10({}, 0.0, -1.0, 2.0, kUnit), ContractError);
}

TEST(Sigma2, VanishesWithoutCoupling) {
  const auto r = sigma2(kUnit.with_g(0.0), 5.0);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_TRUE(r.converged);
}

TEST(Sigma2, TermsAgainstClosedAngularOracles) {
  for (double L : {1.5, 6.0}) {
    RenormOptions opts;
    opts.outer.rel_tol = 1e-7;
    const auto r = sigma2(kUnit, L, opts);
    ASSERT_TRUE(r.converged) << r.failed_term;
    const Oracle o{kUnit.with_lambda(L)};
    const double a = o.term_a();
    const double b = o.pair_integral(0.0, 400);
    EXPECT_NEAR(r.term_a.value, a, 1e-6 * std::abs(a)) << L;
    EXPECT_NEAR(r.term_b.value, b, 1e-6 * std::abs(b)) << L;
    EXPECT_DOUBLE_EQ(r.value, r.term_a.value - r.term_b.value);
  }
}

TEST(Sigma2, HomogeneousOfDegreeFourInCoupling) {
  const auto one = sigma2(kUnit, 3.0);
  for (double g : {0.3, 2.0}) {
    const auto r = sigma2(kUnit.with_g(g), 3.0);
    EXPECT_NEAR(r.value / std::pow(g, 4), one.value, 1e-10 * std::abs(one.value)) << g;
  }
}

TEST(Sigma2, ReportsFailedTerm) {
  RenormOptions opts;
  opts.outer.max_regions = 2;
  opts.outer.rel_tol = 1e-14;
  const auto r = sigma2(kUnit, 5.0, opts);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.failed_term, "A,B");
  EXPECT_THROW(sigma2(kUnit, kInf), ContractError);
}

TEST(Theta20, VanishesAtOriginAndWithoutCoupling) {
  EXPECT_EQ(theta20({}, 0.0, 0.0, 5.0, kUnit).value, 0.0);
  EXPECT_EQ(theta20({}, 0.3, 1.0, 5.0, kUnit.with_g(0.0)).value, 0.0);
}

TEST(Theta20, RestFrameAgainstDirectIntegrals) {
  // At P = p both parts are isotropic: theta20 = A(eta, mu) - pair(eta + mu) - Sigma2.
  const double L = 2.0;
  const double eta = 0.3, mu = 1.0;
  RenormOptions opts;
  opts.outer.rel_tol = 1e-6;
  const auto r = theta20({}, eta, mu, L, kUnit, opts);
  ASSERT_TRUE(r.converged);
  const Oracle o{kUnit.with_lambda(L)};
  const double a = composite(
      [&](double k) {
        if (o.v2(k) == 0.0) return 0.0;
        const double d = o.free(k) + eta + mu;
        return 4.0 * kPi * k * k * o.v2(k) * o.theta10(k, eta + o.w(k), mu, 200) / (d * d);
      },
      0.0, L, 200);
  const double pair = o.pair_integral(eta + mu, 400);
  const auto s2 = sigma2(kUnit, L, opts);
  const double expected = a - pair - s2.value;
  EXPECT_NEAR(r.value, expected, 1e-5 * std::abs(expected) + r.error);
}

TEST(Theta20, MovingFrameIsContinuousAndFinite) {
  const ModelParams p = kUnit.with_momentum({0.0, 0.0, 0.5});
  RenormOptions opts;
  opts.outer.rel_tol = 1e-5;
  const auto near = theta20({0.0, 0.0, 0.499}, 0.2, 1.0, 2.0, p, opts);
  const auto rest = theta20({0.0, 0.0, 0.5}, 0.2, 1.0, 2.0, p, opts);
  ASSERT_TRUE(near.converged && rest.converged);
  EXPECT_NEAR(near.value, rest.value, 1e-3 * std::abs(rest.value) + near.error + rest.error);
  const auto moving = theta20({}, 0.2, 1.0, 2.0, p, opts);
  EXPECT_TRUE(std::isfinite(moving.value));
  EXPECT_NE(moving.value, rest.value);
}

TEST(Theta21, ClosedTermComposesTheta10) {
  const ModelParams p = kUnit.with_momentum({0.0, 0.0, 0.3});
  const Vec3 q{0.05, 0.0, -0.1};
  const Vec3 k{0.2, 0.1, 0.4}, l{-0.3, 0.2, 0.1};
  const double eta = 0.25, mu = 1.0, L = 5.0;
  const auto r = theta21(q, eta, k, l, mu, L, p);
  ASSERT_TRUE(r.converged);
  const ModelParams cut = p.with_lambda(L);
  const double t10 = theta10(q + k + l, eta + dispersion(k, cut) + dispersion(l, cut), mu, L, p,
                             RenormOptions{}.inner).value;
  EXPECT_EQ(r.theta10_part.value, t10);
  const Vec3 u = p.momentum() - q;
  const double dk = 0.5 * norm2(u - k) + eta + dispersion(k, cut) + mu;
  const double dl = 0.5 * norm2(u - l) + eta + dispersion(l, cut) + mu;
  const double expected = form_factor(k, cut) * form_factor(l, cut) * t10 / (dk * dl);
  EXPECT_NEAR(r.closed_term, expected, 1e-14 * std::abs(expected));
}

TEST(Theta21, IntegralTermAgainstCartesianAxisQuadrature) {
  const ModelParams p = ModelParams(1.0, 0.8, 1.2, 0.05).with_momentum({0.0, 0.0, 0.4});
  const Vec3 q0{0.1, -0.05, 0.0};
  const Vec3 k{0.3, 0.1, 0.2}, l{-0.1, 0.4, -0.2};
  const double eta = 0.1, mu = 0.7, L = 3.0;
  const auto r = theta21(q0, eta, k, l, mu, L, p);
  ASSERT_TRUE(r.converged);
  const ModelParams cut = p.with_lambda(L);
  // Fixed z axis, full azimuth, theta11 from the model module.
  QuadOptions opts;
  opts.rel_tol = 1e-9;
  const auto ref = quad(
      [&](std::span<const double> x) {
        const double s = std::sqrt(1.0 - x[1] * x[1]);
        const Vec3 qv{x[0] * s * std::cos(x[2]), x[0] * s * std::sin(x[2]), x[0] * x[1]};
        const double v = form_factor(qv, cut);
        if (v == 0.0) return 0.0;
        const double d = 0.5 * norm2(p.momentum() - q0 - qv) + eta + dispersion(qv, cut) + mu;
        return x[0] * x[0] * v * v *
               theta11(q0 + qv, eta + dispersion(qv, cut), k, l, mu, cut) / (d * d);
      },
      Box{{0.0, -1.0, 0.0}, {L, 1.0, 2.0 * kPi}}, opts);
  EXPECT_NEAR(r.integral_term.value, ref.value, 1e-7 * std::abs(ref.value));
  EXPECT_LT(r.integral_term.value, 0.0);
  const auto inf = theta21(q0, eta, k, l, mu, kInf, p);
  EXPECT_TRUE(inf.converged);
  EXPECT_TRUE(std::isfinite(inf.value));
}

TEST(Theta21, VanishesWithoutCoupling) {
  const auto r = theta21({}, 0.1, {0.1, 0, 0}, {0, 0.2, 0}, 1.0, 4.0, kUnit.with_g(0.0));
  EXPECT_EQ(r.value, 0.0);
  EXPECT_TRUE(r.converged);
}

TEST(FitDivergence, ExactLine) {
  const std::vector<std::pair<double, double>> s{{1, -4}, {2, -1}, {4, 5}, {7, 14}};
  const auto fit = fit_divergence(s, DivergenceForm::linear_in_L);
  EXPECT_NEAR(fit.slope, 3.0, 1e-14);
  EXPECT_NEAR(fit.offset, -7.0, 1e-13);
  EXPECT_NEAR(fit.residual, 0.0, 1e-13);
}

TEST(FitDivergence, ExactLog) {
  std::vector<std::pair<double, double>> s;
  for (double L : {10.0, 20.0, 40.0, 80.0, 160.0}) s.push_back({L, 2.0 * std::log(L) + 1.0});
  const auto fit = fit_divergence(s, DivergenceForm::log_in_L);
  EXPECT_NEAR(fit.slope, 2.0, 1e-13);
  EXPECT_NEAR(fit.offset, 1.0, 1e-12);
}

TEST(FitDivergence, Sigma1Slope) {
  std::vector<std::pair<double, double>> s;
  for (double L : {200.0, 400.0, 800.0, 1600.0}) s.push_back({L, sigma1(kUnit, L).value});
  const auto fit = fit_divergence(s, DivergenceForm::linear_in_L);
  EXPECT_NEAR(fit.slope / (-8.0 * kPi / 3.0), 1.0, 0.02);
}

TEST(FitDivergence, DegenerateInputs) {
  const std::vector<std::pair<double, double>> three{{1, 1}, {2, 2}, {3, 3}};
  EXPECT_THROW(fit_divergence(three, DivergenceForm::linear_in_L), ContractError);
  const std::vector<std::pair<double, double>> repeated{{1, 1}, {1, 2}, {3, 3}, {4, 4}};
  EXPECT_THROW(fit_divergence(repeated, DivergenceForm::linear_in_L), ContractError);
}

}  // namespace
}  // namespace polaron
