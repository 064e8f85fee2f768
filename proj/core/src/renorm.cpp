#include "polaron/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "polaron/errors.hpp"

namespace polaron {

namespace {

constexpr double kPi = std::numbers::pi;

ModelParams with_cutoff(const ModelParams& params, double L) {
  if (!(L > 0.0)) throw ContractError("cutoff L must be > 0");
  return params.with_lambda(std::min(L, params.lambda()));
}

// Upper radial limit: the cutoff itself, or +infinity for the mapped tail.
double radial_limit(const ModelParams& cut) { return cut.lambda(); }

void require_nonnegative(double eta, double mu) {
  if (!(eta >= 0.0)) throw ContractError("eta must be >= 0");
  if (!(mu >= 0.0)) throw ContractError("mu must be >= 0");
}

struct Kernel {
  const ModelParams& cut;

  double w(double q) const { return dispersion_radial(q, cut); }
  double v2(double q) const {
    const double v = form_factor_radial(q, cut);
    return v * v;
  }
  double free_denominator(double q) const { return 0.5 * q * q + w(q); }
};

// theta10 as a function of U = |P - p| only. The integrand is symmetrized under
// cos -> -cos so the part odd in U cancels pointwise and the mapped tail stays bounded.
QuadResult theta10_radial(double U, double eta, double mu, const ModelParams& cut,
                          const QuadOptions& options) {
  if (cut.g() == 0.0) return QuadResult{0.0, 0.0, 0, true};
  const Kernel kern{cut};
  const double shift = 0.5 * U * U + eta + mu;
  auto f = [&](std::span<const double> x) {
    const double q = x[0];
    const double c = x[1];
    const double v2 = kern.v2(q);
    if (v2 == 0.0) return 0.0;
    const double base = 0.5 * q * q + kern.w(q);
    const double minus = base + shift - U * q * c;
    const double plus = base + shift + U * q * c;
    if (!(minus > 0.0) || !(base > 0.0)) throw ContractError("theta10 denominator vanishes");
    return -2.0 * kPi * q * q * v2 * (1.0 / minus + 1.0 / plus - 2.0 / base);
  };
  return quad(f, Box{{0.0, 0.0}, {radial_limit(cut), 1.0}}, options);
}

// Orthonormal frame with e3 along `axis` (z if axis = 0) and e1 in the plane of axis and
// `second` whenever they are not parallel.
struct Frame {
  Vec3 e1, e2, e3;
};

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

Frame make_frame(const Vec3& axis, const Vec3& second) {
  Frame f;
  if (norm(axis) > 0.0) {
    f.e3 = (1.0 / norm(axis)) * axis;
  } else if (norm(second) > 0.0) {
    f.e3 = (1.0 / norm(second)) * second;
  } else {
    f.e3 = {0.0, 0.0, 1.0};
  }
  Vec3 t = second - dot(second, f.e3) * f.e3;
  if (norm(t) <= 1e-14 * std::max(1.0, norm(second))) {
    t = std::abs(f.e3.x) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
    t = t - dot(t, f.e3) * f.e3;
  }
  f.e1 = (1.0 / norm(t)) * t;
  f.e2 = cross(f.e3, f.e1);
  return f;
}

}  // namespace

QuadResult sigma1(const ModelParams& params, double L, const QuadOptions& options) {
  if (!std::isfinite(L)) throw ContractError("sigma1 needs a finite cutoff");
  const ModelParams cut = with_cutoff(params, L);
  if (cut.g() == 0.0) return QuadResult{0.0, 0.0, 0, true};
  const Kernel kern{cut};
  auto f = [&](double q) { return -4.0 * kPi * q * q * kern.v2(q) / kern.free_denominator(q); };
  return quad(f, 0.0, cut.lambda(), options);
}

QuadResult theta10(const Vec3& p, double eta, double mu, double L, const ModelParams& params,
                   const QuadOptions& options) {
  require_nonnegative(eta, mu);
  const ModelParams cut = with_cutoff(params, L);
  return theta10_radial(norm(params.momentum() - p), eta, mu, cut, options);
}

Sigma2Result sigma2(const ModelParams& params, double L, const RenormOptions& options) {
  if (!std::isfinite(L)) throw ContractError("sigma2 needs a finite cutoff");
  const ModelParams cut = with_cutoff(params, L);
  Sigma2Result out;
  if (cut.g() == 0.0) {
    out.term_a = out.term_b = QuadResult{0.0, 0.0, 0, true};
    out.converged = true;
    return out;
  }
  const Kernel kern{cut};
  const double top = cut.lambda();

  bool inner_ok = true;
  std::size_t inner_regions = 0;
  auto fa = [&](double k) {
    const double v2 = kern.v2(k);
    if (v2 == 0.0) return 0.0;
    const double d = kern.free_denominator(k);
    const QuadResult t = theta10_radial(k, kern.w(k), 0.0, cut, options.inner);
    inner_ok = inner_ok && t.converged;
    inner_regions += t.subdivisions;
    return 4.0 * kPi * k * k * v2 * t.value / (d * d);
  };
  out.term_a = quad(fa, 0.0, top, options.outer);
  out.term_a.converged = out.term_a.converged && inner_ok;
  out.term_a.subdivisions += inner_regions;

  auto fb = [&](std::span<const double> x) {
    const double k = x[0];
    const double l = x[1];
    const double c = x[2];
    const double v2 = kern.v2(k) * kern.v2(l);
    if (v2 == 0.0) return 0.0;
    const double mid = 0.5 * (k * k + l * l + 2.0 * k * l * c) + kern.w(k) + kern.w(l);
    return 8.0 * kPi * kPi * k * k * l * l * v2 /
           (kern.free_denominator(k) * mid * kern.free_denominator(l));
  };
  out.term_b = quad(fb, Box{{0.0, 0.0, -1.0}, {top, top, 1.0}}, options.outer);

  out.value = out.term_a.value - out.term_b.value;
  out.error = out.term_a.error + out.term_b.error;
  out.converged = out.term_a.converged && out.term_b.converged;
  if (!out.term_a.converged) out.failed_term = "A";
  if (!out.term_b.converged) out.failed_term += out.failed_term.empty() ? "B" : ",B";
  return out;
}

QuadResult theta20(const Vec3& p, double eta, double mu, double L, const ModelParams& params,
                   const RenormOptions& options) {
  require_nonnegative(eta, mu);
  const ModelParams cut = with_cutoff(params, L);
  const double U = norm(params.momentum() - p);
  if (cut.g() == 0.0 || (U == 0.0 && eta == 0.0 && mu == 0.0)) {
    return QuadResult{0.0, 0.0, 0, true};
  }
  const Kernel kern{cut};
  const double top = radial_limit(cut);

  // Single-phonon part: theta10 at the shifted argument over the squared denominator, minus
  // the same at the origin. Symmetrized in cos; u = U e_z.
  bool inner_ok = true;
  std::size_t inner_regions = 0;
  auto term1 = [&](double k, double c) {
    const double ku = std::sqrt(std::max(0.0, U * U + k * k - 2.0 * U * k * c));  // |u - k|
    const double e = eta + kern.w(k);
    const double d = 0.5 * ku * ku + e + mu;
    const QuadResult t = theta10_radial(ku, e, mu, cut, options.inner);
    inner_ok = inner_ok && t.converged;
    inner_regions += t.subdivisions;
    return t.value / (d * d);
  };
  auto f1 = [&](std::span<const double> x) {
    const double k = x[0];
    const double c = x[1];
    const double v2 = kern.v2(k);
    if (v2 == 0.0) return 0.0;
    const double d0 = kern.free_denominator(k);
    const QuadResult t0 = theta10_radial(k, kern.w(k), 0.0, cut, options.inner);
    inner_ok = inner_ok && t0.converged;
    inner_regions += t0.subdivisions;
    const double at_origin = t0.value / (d0 * d0);
    return 2.0 * kPi * k * k * v2 * (term1(k, c) + term1(k, -c) - 2.0 * at_origin);
  };
  QuadResult r1 = quad(f1, Box{{0.0, 0.0}, {top, 1.0}}, options.outer);
  r1.converged = r1.converged && inner_ok;
  r1.subdivisions += inner_regions;

  // Two-phonon exchange part over (|k|, cos k, |l|, cos l, relative azimuth in [0, pi]),
  // symmetrized under (k, l) -> (-k, -l).
  auto pair = [&](double k, double ck, double l, double cl, double phi) {
    const double sk = std::sqrt(std::max(0.0, 1.0 - ck * ck));
    const double sl = std::sqrt(std::max(0.0, 1.0 - cl * cl));
    const Vec3 kv{k * sk, 0.0, k * ck};
    const Vec3 lv{l * sl * std::cos(phi), l * sl * std::sin(phi), l * cl};
    const Vec3 u{0.0, 0.0, U};
    const double wk = kern.w(k);
    const double wl = kern.w(l);
    const double du_k = 0.5 * norm2(u - kv) + eta + wk + mu;
    const double du_l = 0.5 * norm2(u - lv) + eta + wl + mu;
    const double fu = 0.5 * norm2(u - kv - lv) + eta + wk + wl + mu;
    const double d0_k = 0.5 * k * k + wk;
    const double d0_l = 0.5 * l * l + wl;
    const double f0 = 0.5 * norm2(kv + lv) + wk + wl;
    return 1.0 / (du_k * du_l * fu) - 1.0 / (d0_k * d0_l * f0);
  };
  auto f2 = [&](std::span<const double> x) {
    const double k = x[0];
    const double ck = x[1];
    const double l = x[2];
    const double cl = x[3];
    const double phi = x[4];
    const double v4 = kern.v2(k) * kern.v2(l);
    if (v4 == 0.0) return 0.0;
    return -4.0 * kPi * k * k * l * l * v4 * (pair(k, ck, l, cl, phi) + pair(k, -ck, l, -cl, phi));
  };
  QuadResult r2 = quad(f2, Box{{0.0, 0.0, 0.0, -1.0, 0.0}, {top, 1.0, top, 1.0, kPi}},
                       options.outer);
  return combine(r1, r2);
}

Theta21Result theta21(const Vec3& p, double eta, const Vec3& k, const Vec3& l, double mu,
                      double L, const ModelParams& params, const RenormOptions& options) {
  require_nonnegative(eta, mu);
  const ModelParams cut = with_cutoff(params, L);
  Theta21Result out;
  const double vk = form_factor(k, cut);
  const double vl = form_factor(l, cut);
  if (vk == 0.0 || vl == 0.0) {
    out.theta10_part = out.integral_term = QuadResult{0.0, 0.0, 0, true};
    out.converged = true;
    return out;
  }
  const Kernel kern{cut};
  const Vec3 u = params.momentum() - p;
  const double wk = dispersion(k, cut);
  const double wl = dispersion(l, cut);
  const double dk = 0.5 * norm2(u - k) + eta + wk + mu;
  const double dl = 0.5 * norm2(u - l) + eta + wl + mu;
  const Vec3 w = u - k - l;

  out.theta10_part = theta10_radial(norm(w), eta + wk + wl, mu, cut, options.inner);
  out.closed_term = vk * vl * out.theta10_part.value / (dk * dl);

  const Frame frame = make_frame(u, w);
  auto f = [&](std::span<const double> x) {
    const double q = x[0];
    const double c = x[1];
    const double phi = x[2];
    const double v2 = kern.v2(q);
    if (v2 == 0.0) return 0.0;
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    const Vec3 qv = q * (s * std::cos(phi) * frame.e1 + s * std::sin(phi) * frame.e2 + c * frame.e3);
    const double wq = kern.w(q);
    const double d = 0.5 * norm2(u - qv) + eta + wq + mu;
    const double g = 0.5 * norm2(w - qv) + eta + wq + wk + wl + mu;
    return -2.0 * q * q * vk * vl * v2 / (d * d * g);
  };
  out.integral_term = quad(f, Box{{0.0, -1.0, 0.0}, {radial_limit(cut), 1.0, kPi}}, options.outer);
  out.value = out.closed_term + out.integral_term.value;
  out.converged = out.theta10_part.converged && out.integral_term.converged;
  return out;
}

std::string to_string(DivergenceForm form) {
  return form == DivergenceForm::linear_in_L ? "linear_in_L" : "log_in_L";
}

DivergenceFit fit_divergence(std::span<const std::pair<double, double>> samples,
                             DivergenceForm form) {
  if (samples.size() < 4) throw ContractError("fit_divergence needs at least 4 samples");
  std::vector<double> xs;
  xs.reserve(samples.size());
  for (const auto& [L, value] : samples) {
    if (!(L > 0.0) || !std::isfinite(L) || !std::isfinite(value)) {
      throw ContractError("fit_divergence needs finite samples with L > 0");
    }
    xs.push_back(form == DivergenceForm::linear_in_L ? L : std::log(L));
  }
  const double n = static_cast<double>(samples.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += samples[i].second;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (samples[i].second - my);
  }
  std::vector<double> sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end() || !(sxx > 0.0)) {
    throw ContractError("fit_divergence design matrix is degenerate (repeated L)");
  }
  DivergenceFit fit;
  fit.form = form;
  fit.slope = sxy / sxx;
  fit.offset = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = samples[i].second - (fit.offset + fit.slope * xs[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

}  // namespace polaron
