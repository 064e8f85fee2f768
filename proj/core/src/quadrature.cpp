#include "polaron/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include "polaron/errors.hpp"

namespace polaron {

namespace {

constexpr std::size_t kMaxDimension = 6;

// 15-point Kronrod abscissae on [0, 1] (descending) with Kronrod and embedded Gauss weights.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Region {
  std::vector<double> centre;
  std::vector<double> half;
  double value = 0.0;
  double error = 0.0;
  std::size_t split_dim = 0;
  std::size_t id = 0;
};

struct WorseFirst {
  bool operator()(const Region& a, const Region& b) const {
    if (a.error != b.error) return a.error < b.error;
    return a.id > b.id;
  }
};

double checked(double y, std::span<const double> x) {
  if (!std::isfinite(y)) {
    std::string where;
    for (double xi : x) where += (where.empty() ? "" : ", ") + std::to_string(xi);
    throw QuadratureError("integrand is not finite at (" + where + ")");
  }
  return y;
}

class Rule {
 public:
  explicit Rule(std::size_t d) : d_(d), x_(d) {
    if (d_ >= 2) {
      const double dd = static_cast<double>(d_);
      w_ = {(12824.0 - 9120.0 * dd + 400.0 * dd * dd) / 19683.0, 980.0 / 6561.0,
            (1820.0 - 400.0 * dd) / 19683.0, 200.0 / 19683.0,
            6859.0 / 19683.0 / std::ldexp(1.0, static_cast<int>(d_))};
      w5_ = {(729.0 - 950.0 * dd + 50.0 * dd * dd) / 729.0, 245.0 / 486.0,
             (265.0 - 100.0 * dd) / 1458.0, 25.0 / 729.0};
    }
  }

  void apply(const Integrand& f, Region& r) {
    if (d_ == 1) {
      kronrod(f, r);
    } else {
      genz_malik(f, r);
    }
  }

 private:
  double eval(const Integrand& f) { return checked(f(x_), x_); }

  void kronrod(const Integrand& f, Region& r) {
    const double c = r.centre[0];
    const double h = r.half[0];
    std::array<double, 15> fv{};
    x_[0] = c;
    const double fc = eval(f);
    double k = kWgk[7] * fc;
    double g = kWg[3] * fc;
    for (int j = 0; j < 7; ++j) {
      x_[0] = c - h * kXgk[j];
      const double lo = eval(f);
      x_[0] = c + h * kXgk[j];
      const double hi = eval(f);
      fv[2 * j] = lo;
      fv[2 * j + 1] = hi;
      k += kWgk[j] * (lo + hi);
      if (j % 2 == 1) g += kWg[j / 2] * (lo + hi);
    }
    fv[14] = fc;
    const double mean = 0.5 * k;
    double asc = kWgk[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j) {
      asc += kWgk[j] * (std::abs(fv[2 * j] - mean) + std::abs(fv[2 * j + 1] - mean));
    }
    double abs_sum = kWgk[7] * std::abs(fc);
    for (int j = 0; j < 7; ++j) abs_sum += kWgk[j] * (std::abs(fv[2 * j]) + std::abs(fv[2 * j + 1]));
    r.value = k * h;
    asc *= h;
    abs_sum *= h;
    double err = std::abs((k - g) * h);
    if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
    const double eps = std::numeric_limits<double>::epsilon();
    if (abs_sum > std::numeric_limits<double>::min() / (50.0 * eps)) {
      err = std::max(50.0 * eps * abs_sum, err);
    }
    r.error = err;
    r.split_dim = 0;
  }

  void genz_malik(const Integrand& f, Region& r) {
    constexpr double l2 = 0.35856858280031810;  // sqrt(9/70)
    constexpr double l4 = 0.94868329805051379960;  // sqrt(9/10), also lambda3
    constexpr double l5 = 0.68824720161168529772;  // sqrt(9/19)
    const auto& c = r.centre;
    const auto& h = r.half;
    std::copy(c.begin(), c.end(), x_.begin());
    const double f0 = eval(f);
    double s2 = 0.0, s3 = 0.0, s4 = 0.0, s5 = 0.0;
    double worst = -1.0;
    std::size_t worst_dim = 0;
    for (std::size_t i = 0; i < d_; ++i) {
      x_[i] = c[i] - l2 * h[i];
      const double a2 = eval(f);
      x_[i] = c[i] + l2 * h[i];
      const double b2 = eval(f);
      x_[i] = c[i] - l4 * h[i];
      const double a3 = eval(f);
      x_[i] = c[i] + l4 * h[i];
      const double b3 = eval(f);
      x_[i] = c[i];
      s2 += a2 + b2;
      s3 += a3 + b3;
      const double fourth = std::abs(a2 + b2 - 2.0 * f0 - (a3 + b3 - 2.0 * f0) / 7.0);
      if (fourth > worst * (1.0 + 1e-12)) {
        worst = fourth;
        worst_dim = i;
      }
    }
    for (std::size_t i = 0; i < d_; ++i) {
      for (std::size_t j = i + 1; j < d_; ++j) {
        for (int si : {-1, 1}) {
          for (int sj : {-1, 1}) {
            x_[i] = c[i] + si * l4 * h[i];
            x_[j] = c[j] + sj * l4 * h[j];
            s4 += eval(f);
          }
        }
        x_[i] = c[i];
        x_[j] = c[j];
      }
    }
    const std::size_t corners = std::size_t{1} << d_;
    for (std::size_t mask = 0; mask < corners; ++mask) {
      for (std::size_t i = 0; i < d_; ++i) {
        x_[i] = c[i] + ((mask >> i) & 1U ? l5 : -l5) * h[i];
      }
      s5 += eval(f);
    }
    double volume = 1.0;
    for (std::size_t i = 0; i < d_; ++i) volume *= 2.0 * h[i];
    const double i7 = volume * (w_[0] * f0 + w_[1] * s2 + w_[2] * s3 + w_[3] * s4 + w_[4] * s5);
    const double i5 = volume * (w5_[0] * f0 + w5_[1] * s2 + w5_[2] * s3 + w5_[3] * s4);
    r.value = i7;
    r.error = std::abs(i7 - i5);
    r.split_dim = worst_dim;
  }

  std::size_t d_;
  std::vector<double> x_;
  std::array<double, 5> w_{};
  std::array<double, 4> w5_{};
};

}  // namespace

QuadResult quad(const Integrand& f, const Box& box, const QuadOptions& options) {
  const std::size_t d = box.dimension();
  if (d == 0 || d > kMaxDimension || box.upper.size() != d) {
    throw ContractError("quad supports boxes of dimension 1 to 6");
  }
  if (!(options.abs_tol >= 0.0 && options.rel_tol >= 0.0) ||
      (options.abs_tol == 0.0 && options.rel_tol == 0.0)) {
    throw ContractError("quad needs a positive tolerance");
  }
  std::vector<bool> mapped(d, false);
  for (std::size_t i = 0; i < d; ++i) {
    if (!std::isfinite(box.lower[i]) || std::isnan(box.upper[i])) {
      throw ContractError("quad needs finite lower bounds");
    }
    if (box.upper[i] == std::numeric_limits<double>::infinity()) {
      mapped[i] = true;
    } else if (!(box.upper[i] >= box.lower[i])) {
      throw ContractError("quad box has upper < lower");
    }
  }

  const bool any_mapped = std::find(mapped.begin(), mapped.end(), true) != mapped.end();
  std::vector<double> y(d);
  Integrand g = f;
  if (any_mapped) {
    g = [&](std::span<const double> t) {
      double jac = 1.0;
      for (std::size_t i = 0; i < d; ++i) {
        if (mapped[i]) {
          const double s = 1.0 - t[i];
          y[i] = box.lower[i] + t[i] / s;
          jac /= s * s;
        } else {
          y[i] = t[i];
        }
      }
      return f(y) * jac;
    };
  }

  Region root;
  root.centre.resize(d);
  root.half.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double lo = mapped[i] ? 0.0 : box.lower[i];
    const double hi = mapped[i] ? 1.0 : box.upper[i];
    root.centre[i] = 0.5 * (lo + hi);
    root.half[i] = 0.5 * (hi - lo);
  }
  QuadResult result;
  for (std::size_t i = 0; i < d; ++i) {
    if (root.half[i] == 0.0) {
      result.converged = true;
      return result;
    }
  }

  Rule rule(d);
  rule.apply(g, root);
  std::priority_queue<Region, std::vector<Region>, WorseFirst> heap;
  double value = root.value;
  double error = root.error;
  std::size_t next_id = 1;
  heap.push(std::move(root));
  auto tolerance = [&] { return std::max(options.abs_tol, options.rel_tol * std::abs(value)); };

  while (error > tolerance() && heap.size() < options.max_regions) {
    Region parent = heap.top();
    heap.pop();
    value -= parent.value;
    error -= parent.error;
    const std::size_t k = parent.split_dim;
    Region lo = parent;
    lo.half[k] *= 0.5;
    lo.centre[k] -= lo.half[k];
    Region hi = std::move(parent);
    hi.half[k] *= 0.5;
    hi.centre[k] += hi.half[k];
    lo.id = next_id++;
    hi.id = next_id++;
    rule.apply(g, lo);
    rule.apply(g, hi);
    value += lo.value + hi.value;
    error += lo.error + hi.error;
    heap.push(std::move(lo));
    heap.push(std::move(hi));
  }

  // Re-add in id order so the reported sums do not carry incremental drift.
  std::vector<std::pair<std::size_t, std::pair<double, double>>> parts;
  parts.reserve(heap.size());
  while (!heap.empty()) {
    parts.push_back({heap.top().id, {heap.top().value, heap.top().error}});
    heap.pop();
  }
  std::sort(parts.begin(), parts.end());
  result.value = 0.0;
  result.error = 0.0;
  for (const auto& p : parts) {
    result.value += p.second.first;
    result.error += p.second.second;
  }
  result.subdivisions = parts.size();
  result.converged = result.error <= std::max(options.abs_tol, options.rel_tol * std::abs(result.value));
  return result;
}

QuadResult quad(const std::function<double(double)>& f, double a, double b,
                const QuadOptions& options) {
  return quad([&](std::span<const double> x) { return f(x[0]); }, Box{{a}, {b}}, options);
}

QuadResult combine(const QuadResult& a, const QuadResult& b, double sign_b) {
  QuadResult r;
  r.value = a.value + sign_b * b.value;
  r.error = a.error + b.error;
  r.subdivisions = a.subdivisions + b.subdivisions;
  r.converged = a.converged && b.converged;
  return r;
}

}  // namespace polaron
