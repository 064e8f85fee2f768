#include "polaron/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "polaron/errors.hpp"

namespace polaron {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void scale(std::span<double> x, double s) {
  for (auto& v : x) v *= s;
}

// Symmetric tridiagonal T with diagonal `a` and off-diagonal `b` (b.size() == a.size() - 1).
class Tridiagonal {
 public:
  Tridiagonal(std::span<const double> a, std::span<const double> b) : a_(a), b_(b) {}

  // Sturm count: number of eigenvalues strictly below x.
  std::size_t count_below(double x) const {
    std::size_t count = 0;
    double d = 1.0;
    const double tiny = kEps * scale_ * kEps;
    for (std::size_t i = 0; i < a_.size(); ++i) {
      d = a_[i] - x - (i > 0 ? b_[i - 1] * b_[i - 1] / d : 0.0);
      if (d == 0.0) d = -tiny;
      if (d < 0.0) ++count;
    }
    return count;
  }

  double lowest_eigenvalue() {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    scale_ = 0.0;
    for (std::size_t i = 0; i < a_.size(); ++i) {
      const double r = (i > 0 ? std::abs(b_[i - 1]) : 0.0) + (i + 1 < a_.size() ? std::abs(b_[i]) : 0.0);
      lo = std::min(lo, a_[i] - r);
      hi = std::max(hi, a_[i] + r);
      scale_ = std::max(scale_, std::abs(a_[i]) + r);
    }
    if (scale_ == 0.0) scale_ = 1.0;
    for (int iter = 0; iter < 200; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (count_below(mid) >= 1) {
        hi = mid;
      } else {
        lo = mid;
      }
      if (hi - lo <= 2.0 * kEps * std::max(std::abs(lo), std::abs(hi))) break;
    }
    return 0.5 * (lo + hi);
  }

  // Eigenvector for eigenvalue theta by inverse iteration with a pivoted LU of T - theta I.
  std::vector<double> eigenvector(double theta) const {
    const std::size_t n = a_.size();
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + 1e-3 * static_cast<double>(i % 7);
    if (n == 1) return {1.0};

    std::vector<double> d(n), dl(b_.begin(), b_.end()), du(b_.begin(), b_.end()), du2(n, 0.0);
    std::vector<bool> swapped(n, false);
    for (std::size_t i = 0; i < n; ++i) d[i] = a_[i] - theta;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (std::abs(d[i]) >= std::abs(dl[i])) {
        if (d[i] != 0.0) {
          const double f = dl[i] / d[i];
          dl[i] = f;
          d[i + 1] -= f * du[i];
        }
      } else {
        const double f = d[i] / dl[i];
        d[i] = dl[i];
        dl[i] = f;
        const double tmp = du[i];
        du[i] = d[i + 1];
        d[i + 1] = tmp - f * d[i + 1];
        if (i + 2 < n) {
          du2[i] = du[i + 1];
          du[i + 1] = -f * du[i + 1];
        }
        swapped[i] = true;
      }
    }
    const double tiny = kEps * scale_;
    for (auto& v : d) {
      if (std::abs(v) < tiny) v = std::copysign(tiny, v == 0.0 ? 1.0 : v);
    }
    for (int pass = 0; pass < 3; ++pass) {
      for (std::size_t i = 0; i + 1 < n; ++i) {
        if (!swapped[i]) {
          x[i + 1] -= dl[i] * x[i];
        } else {
          const double tmp = x[i];
          x[i] = x[i + 1];
          x[i + 1] = tmp - dl[i] * x[i];
        }
      }
      x[n - 1] /= d[n - 1];
      x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
      for (std::size_t i = n - 2; i-- > 0;) {
        x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
      }
      const double nrm = std::sqrt(dot(x, x));
      scale(x, 1.0 / nrm);
    }
    return x;
  }

 private:
  std::span<const double> a_;
  std::span<const double> b_;
  double scale_ = 1.0;
};

std::vector<double> start_vector(std::size_t n, const LanczosOptions& options) {
  std::vector<double> v(n, 0.0);
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> r(n);
  for (auto& x : r) x = dist(rng);
  const double rn = std::sqrt(dot(r, r));
  v[0] = 1.0;
  if (rn > 0.0) axpy(options.perturbation / rn, r, v);
  scale(v, 1.0 / std::sqrt(dot(v, v)));
  return v;
}

}  // namespace

GroundStateResult lanczos_ground(const SparseHamiltonian& h, const LanczosOptions& options) {
  const std::size_t n = h.dimension();
  if (n == 0) throw ContractError("lanczos_ground on an empty operator");
  if (!(options.tol > 0.0)) throw ContractError("lanczos_ground needs tol > 0");

  GroundStateResult result;
  if (n == 1) {
    result.energy = h.diagonal()[0];
    result.vector = {1.0};
    result.iterations = 1;
    result.converged = true;
    return result;
  }

  const std::size_t m = std::max<std::size_t>(2, std::min(options.krylov_dim, n));
  std::vector<double> v = start_vector(n, options);
  std::vector<std::vector<double>> basis;
  basis.reserve(m);
  std::vector<double> w(n);
  std::vector<double> hy(n);

  while (true) {
    basis.clear();
    basis.push_back(v);
    std::vector<double> alpha;
    std::vector<double> beta;
    std::vector<double> ritz;
    double norm_estimate = 0.0;

    for (std::size_t j = 0; j < m; ++j) {
      h.matvec(basis[j], w);
      ++result.iterations;
      const double a = dot(basis[j], w);
      axpy(-a, basis[j], w);
      if (j > 0) axpy(-beta[j - 1], basis[j - 1], w);
      // Full reorthogonalization, two Gram-Schmidt passes.
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& q : basis) axpy(-dot(q, w), q, w);
      }
      const double b = std::sqrt(dot(w, w));
      alpha.push_back(a);
      norm_estimate = std::max(norm_estimate, std::abs(a) + b + (j > 0 ? beta[j - 1] : 0.0));

      Tridiagonal t(alpha, beta);
      const double theta = t.lowest_eigenvalue();
      ritz = t.eigenvector(theta);
      const double estimate = b * std::abs(ritz.back());
      const bool breakdown = b <= 1e-13 * std::max(norm_estimate, 1.0);
      if (estimate <= 0.1 * options.tol || breakdown || j + 1 == m ||
          result.iterations + 1 >= options.max_iter) {  // keep one product for the residual
        break;
      }
      beta.push_back(b);
      scale(w, 1.0 / b);
      basis.push_back(w);
    }

    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < ritz.size(); ++i) axpy(ritz[i], basis[i], y);
    scale(y, 1.0 / std::sqrt(dot(y, y)));
    h.matvec(y, hy);
    ++result.iterations;
    const double energy = dot(y, hy);
    axpy(-energy, y, hy);
    const double residual = std::sqrt(dot(hy, hy));

    result.energy = energy;
    result.residual = residual;
    result.vector = y;
    if (residual <= options.tol) {
      result.converged = true;
      return result;
    }
    if (result.iterations >= options.max_iter) return result;
    v = std::move(y);
  }
}

std::vector<double> dense_symmetric_eigenvalues(std::vector<double> a, std::size_t n) {
  if (a.size() != n * n) throw ContractError("dense matrix has wrong size");
  if (n == 0) return {};
  auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };

  // Householder reduction to tridiagonal form.
  std::vector<double> v(n), p(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double xnorm2 = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) xnorm2 += at(i, k) * at(i, k);
    if (xnorm2 == 0.0) continue;
    const double x0 = at(k + 1, k);
    const double alpha = -std::copysign(std::sqrt(xnorm2), x0);
    for (std::size_t i = k + 1; i < n; ++i) v[i] = at(i, k);
    v[k + 1] -= alpha;
    double vnorm2 = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) vnorm2 += v[i] * v[i];
    if (vnorm2 == 0.0) continue;
    const double beta = 2.0 / vnorm2;
    for (std::size_t i = k + 1; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) s += at(i, j) * v[j];
      p[i] = beta * s;
    }
    double vp = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) vp += v[i] * p[i];
    const double kk = 0.5 * beta * vp;
    for (std::size_t i = k + 1; i < n; ++i) p[i] -= kk * v[i];
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) at(i, j) -= v[i] * p[j] + p[i] * v[j];
    }
    at(k + 1, k) = alpha;
    at(k, k + 1) = alpha;
    for (std::size_t i = k + 2; i < n; ++i) at(i, k) = at(k, i) = 0.0;
  }

  std::vector<double> d(n), e(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) d[i] = at(i, i);
  for (std::size_t i = 0; i + 1 < n; ++i) e[i] = at(i + 1, i);

  // Implicit QL with Wilkinson-type shifts, eigenvalues only.
  const auto nn = static_cast<long>(n);
  for (long l = 0; l < nn; ++l) {
    int iter = 0;
    long m = l;
    do {
      for (m = l; m < nn - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= kEps * dd) break;
      }
      if (m != l) {
        if (iter++ == 60) throw std::runtime_error("dense eigensolver: QL failed to converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0;
        double c = 1.0;
        double pp = 0.0;
        long i = m - 1;
        for (; i >= l; --i) {
          const double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= pp;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - pp;
          r = (d[i] - g) * s + 2.0 * c * b;
          pp = s * r;
          d[i + 1] = g + pp;
          g = c * r - b;
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= pp;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  std::sort(d.begin(), d.end());
  return d;
}

double dense_ground_oracle(const SparseHamiltonian& h, std::size_t max_dimension) {
  const std::size_t n = h.dimension();
  if (n == 0) throw ContractError("dense oracle on an empty operator");
  if (n > max_dimension) {
    throw ResourceError("dense oracle refuses dimension " + std::to_string(n) + " (limit " +
                        std::to_string(max_dimension) + ")");
  }
  return dense_symmetric_eigenvalues(h.dense(), n).front();
}

}  // namespace polaron
