#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "polaron/grid.hpp"
#include "polaron/model.hpp"
#include "polaron/vec3.hpp"

namespace polaron {

/// Truncated bosonic Fock basis over M modes with at most nmax phonons.
///
/// A state is stored as its sorted multiset of occupied mode indices. States are ordered by
/// total phonon number, then lexicographically by that sorted index tuple, so state 0 is the
/// vacuum and state 1 + j holds one phonon in mode j. Ranking is O(n) through the
/// combinatorial number system; no hash map is involved.
class FockBasis {
 public:
  static constexpr std::size_t kDefaultMaxStates = 20'000'000;
  static constexpr int kMaxOccupation = 255;

  FockBasis(std::size_t modes, int nmax, std::size_t max_states = kDefaultMaxStates);

  /// Sum_{n=0}^{nmax} C(M + n - 1, n); saturates at UINT64_MAX on overflow.
  static std::uint64_t count(std::size_t modes, int nmax);

  std::size_t size() const { return size_; }
  std::size_t modes() const { return modes_; }
  int nmax() const { return nmax_; }

  int phonon_number(std::size_t s) const;
  /// Sorted mode indices of state s (length = phonon number).
  std::span<const std::uint32_t> state(std::size_t s) const;
  int occupation(std::size_t s, std::size_t mode) const;
  std::vector<std::uint8_t> occupations(std::size_t s) const;

  /// Ordinal of a sorted index tuple; throws ContractError for invalid tuples.
  std::size_t rank(std::span<const std::uint32_t> sorted_modes) const;
  /// Index of s + 1_j, or nullopt when s already holds nmax phonons.
  std::optional<std::size_t> raised(std::size_t s, std::size_t mode) const;
  /// Index of s - 1_j, or nullopt when mode j is empty in s.
  std::optional<std::size_t> lowered(std::size_t s, std::size_t mode) const;

 private:
  std::uint64_t tail_count(int m, std::size_t a) const {
    return tail_counts_[static_cast<std::size_t>(m) * (modes_ + 1) + a];
  }

  std::size_t modes_;
  int nmax_;
  std::size_t size_ = 0;
  std::vector<std::size_t> sector_begin_;  // first state index with n phonons, n = 0..nmax+1
  std::vector<std::size_t> sector_data_;   // offset of sector n in data_
  std::vector<std::uint32_t> data_;
  // tail_counts_[m][a]: number of sorted m-tuples with every entry >= a.
  std::vector<std::uint64_t> tail_counts_;
};

FockBasis enumerate_basis(std::size_t modes, int nmax,
                          std::size_t max_states = FockBasis::kDefaultMaxStates);

struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

/// Real symmetric sparse operator. The off-diagonal part is stored once (upper triangle, CSR)
/// together with a transposed index into the same values; matvec walks both per row so the
/// accumulation order is fixed and rows can be processed in parallel.
class SparseHamiltonian {
 public:
  struct Metadata {
    std::optional<ModelParams> params;
    std::uint64_t grid_hash = 0;
    int nmax = -1;
  };

  /// Entries with row > col are mirrored into the upper triangle; duplicates are summed.
  static SparseHamiltonian from_triplets(std::size_t dim, std::span<const Triplet> entries);

  std::size_t dimension() const { return diagonal_.size(); }
  const std::vector<double>& diagonal() const { return diagonal_; }
  std::size_t off_diagonal_count() const;
  /// Stored entries: full diagonal plus upper off-diagonal.
  std::size_t stored_entries() const { return dimension() + off_diagonal_count(); }
  const Metadata& metadata() const { return metadata_; }

  /// Upper-triangle entries (diagonal included), row-major.
  std::vector<Triplet> upper_entries() const;
  /// Dense row-major copy; intended for small oracles only.
  std::vector<double> dense() const;

  /// Same off-diagonal structure (shared, not copied) with a replaced diagonal.
  SparseHamiltonian with_diagonal(std::vector<double> diagonal, Metadata metadata) const;

  void matvec(std::span<const double> x, std::span<double> y) const;
  std::vector<double> matvec(std::span<const double> x) const;

 private:
  struct OffDiagonal {
    std::vector<std::size_t> row_begin;  // dim + 1
    std::vector<std::size_t> col;
    std::vector<double> value;
    std::vector<std::size_t> t_row_begin;  // transposed view: for column c, entries (r, c)
    std::vector<std::size_t> t_source_row;
    std::vector<std::size_t> t_entry;
  };

  SparseHamiltonian(std::vector<double> diagonal, std::shared_ptr<const OffDiagonal> off,
                    Metadata metadata);
  static std::shared_ptr<const OffDiagonal> build_off_diagonal(std::size_t dim,
                                                               std::vector<std::size_t> row_begin,
                                                               std::vector<std::size_t> col,
                                                               std::vector<double> value);

  friend SparseHamiltonian assemble(const Grid&, const FockBasis&, const ModelParams&);

  std::vector<double> diagonal_;
  std::shared_ptr<const OffDiagonal> off_;
  Metadata metadata_;
};

/// 1/2 |P - sum k|^2 + sum omega_kappa(k) per basis state, P = params.momentum(). Axial grids
/// require P along z and drop the azimuthal cross terms between different phonons.
std::vector<double> assemble_diagonal(const Grid& grid, const FockBasis& basis,
                                      const ModelParams& params);

/// H(P) on the truncated basis: the diagonal above plus phi(v), which links s and s + 1_j
/// with amplitude g_j sqrt(n_j + 1). Modes with zero coupling contribute no entries.
SparseHamiltonian assemble(const Grid& grid, const FockBasis& basis, const ModelParams& params);

/// Same operator at another total momentum / infrared mass; only the diagonal changes.
SparseHamiltonian reassemble_diagonal(const SparseHamiltonian& h, const Grid& grid,
                                      const FockBasis& basis, const ModelParams& params);

struct AnnihilationResult {
  std::vector<double> amplitudes;
  double norm = 0.0;
};

/// a_j psi expressed in the same basis.
AnnihilationResult annihilation_amplitudes(std::span<const double> state, const FockBasis& basis,
                                           std::size_t mode);

struct StateObservables {
  double vacuum_overlap = 0.0;  // Z = |<Omega, psi>|^2
  double mean_number = 0.0;     // <psi, N psi>
  Vec3 mean_momentum;           // <psi, dGamma(p) psi>
};

StateObservables observe(std::span<const double> state, const FockBasis& basis, const Grid& grid);

/// Little-endian layout: u64 dimension, u64 nnz, then nnz (u64 row, u64 col, f64 value) triples
/// of the upper triangle including the diagonal.
void write_matrix_binary(const SparseHamiltonian& h, std::ostream& out);
SparseHamiltonian read_matrix_binary(std::istream& in);

}  // namespace polaron
