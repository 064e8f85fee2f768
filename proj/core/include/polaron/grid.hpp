#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "polaron/model.hpp"
#include "polaron/vec3.hpp"

namespace polaron {

enum class GridKind { cartesian, spherical_m0 };

std::string to_string(GridKind kind);
GridKind grid_kind_from_string(const std::string& text);

struct GridSpec {
  GridKind kind = GridKind::cartesian;
  double kmax = 2.0;
  int n = 4;  // cartesian: points per axis
  int n_radial = 8;
  int n_angular = 8;
  // Unset means: drop the origin cell for odd n (cartesian only).
  std::optional<bool> exclude_origin;
  std::size_t max_modes = 200000;

  bool origin_excluded() const { return exclude_origin.value_or(n % 2 == 1); }
};

/// One phonon mode: representative momentum, cell weight and the coupling amplitude
/// v_Lambda(k) sqrt(w).
struct Mode {
  Vec3 k;
  double weight = 0.0;
  double coupling = 0.0;
};

/// Immutable finite set of phonon modes.
///
/// For spherical_m0 grids each mode is a ring of zero azimuthal quantum number about the
/// z axis; `k` is its representative in the xz half-plane (kx = |k| sin(theta) >= 0).
class Grid {
 public:
  Grid(GridSpec spec, std::vector<Mode> modes);

  const GridSpec& spec() const { return spec_; }
  GridKind kind() const { return spec_.kind; }
  bool axial() const { return spec_.kind == GridKind::spherical_m0; }
  std::size_t size() const { return modes_.size(); }
  const std::vector<Mode>& modes() const { return modes_; }
  const Mode& operator[](std::size_t j) const { return modes_[j]; }

  double total_weight() const;
  /// Stable content hash (kind, momenta, weights, couplings).
  std::uint64_t hash() const;

 private:
  GridSpec spec_;
  std::vector<Mode> modes_;
};

/// Nodes and weights of the n-point Gauss-Legendre rule on [a, b], nodes ascending.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

Grid build_grid(const GridSpec& spec, const ModelParams& params);

/// Smallest |k_j| among modes with nonzero coupling.
double min_mode_norm(const Grid& grid);

/// CSV with header `j,kx,ky,kz,w,coupling`, full precision.
void write_grid_csv(const Grid& grid, std::ostream& out);

}  // namespace polaron
