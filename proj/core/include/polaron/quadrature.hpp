#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace polaron {

/// Axis-aligned integration box. An upper bound of +infinity is admitted and handled by the
/// substitution x = a + t / (1 - t), t in [0, 1).
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dimension() const { return lower.size(); }
};

struct QuadOptions {
  double abs_tol = 0.0;
  double rel_tol = 1e-10;
  std::size_t max_regions = 200000;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error, >= 0
  std::size_t subdivisions = 0;
  bool converged = false;
};

using Integrand = std::function<double(std::span<const double>)>;

/// Globally adaptive cubature: 7/15-point Gauss-Kronrod for d = 1, the degree-7 Genz-Malik
/// rule with embedded degree-5 error estimate for 2 <= d <= 6. The region with the largest
/// error is bisected until the total error is below max(abs_tol, rel_tol |value|) or the
/// region budget is used up (converged = false). Sequential and bit-reproducible.
/// Throws QuadratureError if the integrand returns a non-finite value.
QuadResult quad(const Integrand& f, const Box& box, const QuadOptions& options = {});

/// One-dimensional convenience overload; b may be +infinity.
QuadResult quad(const std::function<double(double)>& f, double a, double b,
                const QuadOptions& options = {});

/// Sum of two independent estimates: values add, errors add, converged if both are.
QuadResult combine(const QuadResult& a, const QuadResult& b, double sign_b = 1.0);

}  // namespace polaron
