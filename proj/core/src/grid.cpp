#include "polaron/grid.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <utility>

#include "polaron/errors.hpp"
#include "polaron/hash.hpp"

namespace polaron {

std::string to_string(GridKind kind) {
  return kind == GridKind::cartesian ? "cartesian" : "spherical_m0";
}

GridKind grid_kind_from_string(const std::string& text) {
  if (text == "cartesian") return GridKind::cartesian;
  if (text == "spherical_m0") return GridKind::spherical_m0;
  throw ConfigError("unknown grid kind '" + text + "' (expected cartesian or spherical_m0)");
}

Grid::Grid(GridSpec spec, std::vector<Mode> modes) : spec_(spec), modes_(std::move(modes)) {}

double Grid::total_weight() const {
  double sum = 0.0;
  for (const auto& m : modes_) sum += m.weight;
  return sum;
}

std::uint64_t Grid::hash() const {
  Fnv1a h;
  h.add(static_cast<std::uint64_t>(spec_.kind));
  h.add(static_cast<std::uint64_t>(modes_.size()));
  for (const auto& m : modes_) {
    h.add(m.k.x);
    h.add(m.k.y);
    h.add(m.k.z);
    h.add(m.weight);
    h.add(m.coupling);
  }
  return h.value();
}

QuadratureRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw ConfigError("Gauss-Legendre rule needs n >= 1");
  // (P_n(x), P_{n-1}(x)) by the three-term recurrence.
  auto legendre = [n](double x) {
    double prev = 1.0;
    double cur = x;
    for (int k = 2; k <= n; ++k) {
      const double next = ((2.0 * k - 1.0) * x * cur - (k - 1.0) * prev) / k;
      prev = cur;
      cur = next;
    }
    return std::pair{cur, prev};
  };
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [pn, pm] = legendre(x);
      const double dp = n * (x * pn - pm) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const auto [pn, pm] = legendre(x);
    const double dp = n * (x * pn - pm) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = mid - half * x;
    rule.nodes[n - 1 - i] = mid + half * x;
    rule.weights[i] = rule.weights[n - 1 - i] = half * w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = mid;
  return rule;
}

namespace {

void validate(const GridSpec& spec) {
  if (!(std::isfinite(spec.kmax) && spec.kmax > 0.0)) throw ConfigError("grid kmax must be > 0");
  if (spec.kind == GridKind::cartesian) {
    if (spec.n < 1) throw ConfigError("grid n must be >= 1");
    const double count = std::pow(static_cast<double>(spec.n), 3);
    if (count > static_cast<double>(spec.max_modes)) {
      throw ResourceError("cartesian grid with n = " + std::to_string(spec.n) + " has " +
                          std::to_string(static_cast<long long>(count)) +
                          " modes, above the budget of " + std::to_string(spec.max_modes));
    }
  } else {
    if (spec.n_radial < 1 || spec.n_angular < 1) {
      throw ConfigError("spherical grid needs n_radial >= 1 and n_angular >= 1");
    }
    const auto count = static_cast<std::size_t>(spec.n_radial) * spec.n_angular;
    if (count > spec.max_modes) {
      throw ResourceError("spherical grid has " + std::to_string(count) +
                          " modes, above the budget of " + std::to_string(spec.max_modes));
    }
  }
}

std::vector<Mode> cartesian_modes(const GridSpec& spec) {
  const double h = 2.0 * spec.kmax / spec.n;
  const double w = h * h * h;
  const bool drop_origin = spec.origin_excluded() && spec.n % 2 == 1;
  const int centre = spec.n / 2;
  std::vector<Mode> modes;
  modes.reserve(static_cast<std::size_t>(spec.n) * spec.n * spec.n);
  // Integer offsets keep k -> -k an exact floating-point symmetry and put the odd-n
  // centre cell exactly at 0.
  const double half_h = spec.kmax / spec.n;
  auto coord = [&](int i) { return (2 * i - spec.n + 1) * half_h; };
  for (int ix = 0; ix < spec.n; ++ix) {
    for (int iy = 0; iy < spec.n; ++iy) {
      for (int iz = 0; iz < spec.n; ++iz) {
        if (drop_origin && ix == centre && iy == centre && iz == centre) continue;
        const Vec3 k{coord(ix), coord(iy), coord(iz)};
        modes.push_back({k, w, 0.0});
      }
    }
  }
  return modes;
}

std::vector<Mode> spherical_modes(const GridSpec& spec) {
  const auto radial = gauss_legendre(spec.n_radial, 0.0, spec.kmax);
  const auto angular = gauss_legendre(spec.n_angular, -1.0, 1.0);
  std::vector<Mode> modes;
  modes.reserve(radial.nodes.size() * angular.nodes.size());
  for (std::size_t a = 0; a < radial.nodes.size(); ++a) {
    const double r = radial.nodes[a];
    for (std::size_t b = 0; b < angular.nodes.size(); ++b) {
      const double cos_t = angular.nodes[b];
      const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
      const double w = 2.0 * std::numbers::pi * r * r * radial.weights[a] * angular.weights[b];
      modes.push_back({Vec3{r * sin_t, 0.0, r * cos_t}, w, 0.0});
    }
  }
  return modes;
}

}  // namespace

Grid build_grid(const GridSpec& spec, const ModelParams& params) {
  validate(spec);
  auto modes = spec.kind == GridKind::cartesian ? cartesian_modes(spec) : spherical_modes(spec);
  for (auto& m : modes) m.coupling = form_factor(m.k, params) * std::sqrt(m.weight);
  return Grid(spec, std::move(modes));
}

double min_mode_norm(const Grid& grid) {
  if (grid.size() == 0) throw ContractError("min_mode_norm on an empty grid");
  double coupled = std::numeric_limits<double>::infinity();
  double any = std::numeric_limits<double>::infinity();
  for (const auto& m : grid.modes()) {
    const double k = norm(m.k);
    if (m.coupling != 0.0) coupled = std::min(coupled, k);
    if (k > 0.0) any = std::min(any, k);
  }
  // Fully decoupled grids (g = 0) fall back to the smallest nonzero momentum.
  return std::isfinite(coupled) ? coupled : any;
}

void write_grid_csv(const Grid& grid, std::ostream& out) {
  const auto old_precision = out.precision(17);
  out << "j,kx,ky,kz,w,coupling\n";
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const auto& m = grid[j];
    out << j << ',' << m.k.x << ',' << m.k.y << ',' << m.k.z << ',' << m.weight << ','
        << m.coupling << '\n';
  }
  out.precision(old_precision);
}

}  // namespace polaron
