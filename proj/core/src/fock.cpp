#include "polaron/fock.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <string>

#include "polaron/errors.hpp"

namespace polaron {

namespace {

__extension__ using Wide = unsigned __int128;

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
  return (a > kSaturated - b) ? kSaturated : a + b;
}

// Number of sorted m-tuples over M modes with every entry >= a, for m = 0..nmax, a = 0..M.
std::vector<std::uint64_t> tail_count_table(std::size_t modes, int nmax) {
  const std::size_t width = modes + 1;
  std::vector<std::uint64_t> t(static_cast<std::size_t>(nmax + 1) * width, 0);
  for (std::size_t a = 0; a <= modes; ++a) t[a] = 1;
  for (int m = 1; m <= nmax; ++m) {
    auto* row = &t[static_cast<std::size_t>(m) * width];
    const auto* prev = &t[static_cast<std::size_t>(m - 1) * width];
    row[modes] = 0;
    for (std::size_t a = modes; a-- > 0;) row[a] = saturating_add(row[a + 1], prev[a]);
  }
  return t;
}

}  // namespace

std::uint64_t FockBasis::count(std::size_t modes, int nmax) {
  if (modes == 0 || nmax < 0) return nmax < 0 ? 0 : 1;
  // The sum telescopes to C(M + nmax, nmax); each partial product C(M + i, i) is exact.
  Wide r = 1;
  for (int i = 1; i <= nmax; ++i) {
    r = r * (static_cast<Wide>(modes) + i) / i;
    if (r > kSaturated) return kSaturated;
  }
  return static_cast<std::uint64_t>(r);
}

FockBasis::FockBasis(std::size_t modes, int nmax, std::size_t max_states)
    : modes_(modes), nmax_(nmax) {
  if (modes < 1) throw ContractError("Fock basis needs at least one mode");
  if (nmax < 0) throw ContractError("Fock basis needs nmax >= 0");
  if (nmax > kMaxOccupation) {
    throw ResourceError("nmax = " + std::to_string(nmax) + " exceeds the occupation cap of 255");
  }
  if (modes > std::numeric_limits<std::uint32_t>::max()) {
    throw ResourceError("too many modes for the Fock basis index type");
  }
  const std::uint64_t total = count(modes, nmax);
  if (total > max_states) {
    throw ResourceError("Fock basis with M = " + std::to_string(modes) +
                        ", nmax = " + std::to_string(nmax) + " has " +
                        (total == kSaturated ? std::string("more than 2^64")
                                             : std::to_string(total)) +
                        " states, above the budget of " + std::to_string(max_states));
  }
  size_ = static_cast<std::size_t>(total);
  tail_counts_ = tail_count_table(modes, nmax);

  sector_begin_.assign(nmax + 2, 0);
  sector_data_.assign(nmax + 2, 0);
  for (int n = 0; n <= nmax; ++n) {
    const auto in_sector = static_cast<std::size_t>(tail_count(n, 0));
    sector_begin_[n + 1] = sector_begin_[n] + in_sector;
    sector_data_[n + 1] = sector_data_[n] + in_sector * n;
  }
  data_.resize(sector_data_[nmax + 1]);

  // Lexicographic successor of a non-decreasing tuple: bump the rightmost entry that can grow
  // and copy it to every later position.
  const auto top = static_cast<std::uint32_t>(modes - 1);
  for (int n = 1; n <= nmax; ++n) {
    std::vector<std::uint32_t> tuple(n, 0);
    auto* out = data_.data() + sector_data_[n];
    const std::size_t states = sector_begin_[n + 1] - sector_begin_[n];
    for (std::size_t s = 0; s < states; ++s) {
      std::copy(tuple.begin(), tuple.end(), out + s * n);
      int t = n - 1;
      while (t >= 0 && tuple[t] == top) --t;
      if (t < 0) break;
      const std::uint32_t v = tuple[t] + 1;
      std::fill(tuple.begin() + t, tuple.end(), v);
    }
  }
}

int FockBasis::phonon_number(std::size_t s) const {
  const auto it = std::upper_bound(sector_begin_.begin(), sector_begin_.end(), s);
  return static_cast<int>(it - sector_begin_.begin()) - 1;
}

std::span<const std::uint32_t> FockBasis::state(std::size_t s) const {
  const int n = phonon_number(s);
  const std::size_t offset = sector_data_[n] + (s - sector_begin_[n]) * n;
  return {data_.data() + offset, static_cast<std::size_t>(n)};
}

int FockBasis::occupation(std::size_t s, std::size_t mode) const {
  const auto st = state(s);
  const auto range = std::equal_range(st.begin(), st.end(), static_cast<std::uint32_t>(mode));
  return static_cast<int>(range.second - range.first);
}

std::vector<std::uint8_t> FockBasis::occupations(std::size_t s) const {
  std::vector<std::uint8_t> occ(modes_, 0);
  for (auto j : state(s)) ++occ[j];
  return occ;
}

std::size_t FockBasis::rank(std::span<const std::uint32_t> sorted_modes) const {
  const auto n = static_cast<int>(sorted_modes.size());
  if (n > nmax_) throw ContractError("tuple holds more phonons than nmax");
  std::uint64_t r = sector_begin_[n];
  std::size_t prev = 0;
  for (int t = 0; t < n; ++t) {
    const std::size_t cur = sorted_modes[t];
    if (cur >= modes_ || cur < prev) throw ContractError("tuple is not a sorted mode multiset");
    const int remaining = n - t;
    r += tail_count(remaining, prev) - tail_count(remaining, cur);
    prev = cur;
  }
  return static_cast<std::size_t>(r);
}

std::optional<std::size_t> FockBasis::raised(std::size_t s, std::size_t mode) const {
  const auto st = state(s);
  if (static_cast<int>(st.size()) >= nmax_) return std::nullopt;
  std::array<std::uint32_t, kMaxOccupation + 1> buf{};
  const auto j = static_cast<std::uint32_t>(mode);
  const auto pos = std::upper_bound(st.begin(), st.end(), j) - st.begin();
  std::copy(st.begin(), st.begin() + pos, buf.begin());
  buf[pos] = j;
  std::copy(st.begin() + pos, st.end(), buf.begin() + pos + 1);
  return rank({buf.data(), st.size() + 1});
}

std::optional<std::size_t> FockBasis::lowered(std::size_t s, std::size_t mode) const {
  const auto st = state(s);
  const auto j = static_cast<std::uint32_t>(mode);
  const auto it = std::lower_bound(st.begin(), st.end(), j);
  if (it == st.end() || *it != j) return std::nullopt;
  std::array<std::uint32_t, kMaxOccupation + 1> buf{};
  const auto pos = it - st.begin();
  std::copy(st.begin(), it, buf.begin());
  std::copy(it + 1, st.end(), buf.begin() + pos);
  return rank({buf.data(), st.size() - 1});
}

FockBasis enumerate_basis(std::size_t modes, int nmax, std::size_t max_states) {
  return FockBasis(modes, nmax, max_states);
}

// ---------------------------------------------------------------------------------------------

SparseHamiltonian::SparseHamiltonian(std::vector<double> diagonal,
                                     std::shared_ptr<const OffDiagonal> off, Metadata metadata)
    : diagonal_(std::move(diagonal)), off_(std::move(off)), metadata_(std::move(metadata)) {}

std::shared_ptr<const SparseHamiltonian::OffDiagonal> SparseHamiltonian::build_off_diagonal(
    std::size_t dim, std::vector<std::size_t> row_begin, std::vector<std::size_t> col,
    std::vector<double> value) {
  auto off = std::make_shared<OffDiagonal>();
  off->t_row_begin.assign(dim + 1, 0);
  for (auto c : col) ++off->t_row_begin[c + 1];
  for (std::size_t i = 0; i < dim; ++i) off->t_row_begin[i + 1] += off->t_row_begin[i];
  off->t_source_row.resize(col.size());
  off->t_entry.resize(col.size());
  std::vector<std::size_t> fill(off->t_row_begin.begin(), off->t_row_begin.end() - 1);
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t e = row_begin[r]; e < row_begin[r + 1]; ++e) {
      const std::size_t slot = fill[col[e]]++;
      off->t_source_row[slot] = r;
      off->t_entry[slot] = e;
    }
  }
  off->row_begin = std::move(row_begin);
  off->col = std::move(col);
  off->value = std::move(value);
  return off;
}

SparseHamiltonian SparseHamiltonian::from_triplets(std::size_t dim,
                                                   std::span<const Triplet> entries) {
  std::vector<double> diag(dim, 0.0);
  std::map<std::pair<std::size_t, std::size_t>, double> upper;
  for (const auto& e : entries) {
    if (e.row >= dim || e.col >= dim) throw ContractError("triplet index out of range");
    if (e.row == e.col) {
      diag[e.row] += e.value;
    } else {
      upper[{std::min(e.row, e.col), std::max(e.row, e.col)}] += e.value;
    }
  }
  std::vector<std::size_t> row_begin(dim + 1, 0);
  std::vector<std::size_t> col;
  std::vector<double> value;
  col.reserve(upper.size());
  value.reserve(upper.size());
  for (const auto& [rc, v] : upper) {
    ++row_begin[rc.first + 1];
    col.push_back(rc.second);
    value.push_back(v);
  }
  for (std::size_t i = 0; i < dim; ++i) row_begin[i + 1] += row_begin[i];
  auto off = build_off_diagonal(dim, std::move(row_begin), std::move(col), std::move(value));
  return SparseHamiltonian(std::move(diag), std::move(off), {});
}

std::size_t SparseHamiltonian::off_diagonal_count() const { return off_->col.size(); }

std::vector<Triplet> SparseHamiltonian::upper_entries() const {
  std::vector<Triplet> out;
  out.reserve(stored_entries());
  for (std::size_t r = 0; r < dimension(); ++r) {
    out.push_back({r, r, diagonal_[r]});
    for (std::size_t e = off_->row_begin[r]; e < off_->row_begin[r + 1]; ++e) {
      out.push_back({r, off_->col[e], off_->value[e]});
    }
  }
  return out;
}

std::vector<double> SparseHamiltonian::dense() const {
  const std::size_t n = dimension();
  std::vector<double> a(n * n, 0.0);
  for (const auto& t : upper_entries()) {
    a[t.row * n + t.col] = t.value;
    a[t.col * n + t.row] = t.value;
  }
  return a;
}

SparseHamiltonian SparseHamiltonian::with_diagonal(std::vector<double> diagonal,
                                                   Metadata metadata) const {
  if (diagonal.size() != dimension()) throw ContractError("replacement diagonal has wrong size");
  return SparseHamiltonian(std::move(diagonal), off_, std::move(metadata));
}

void SparseHamiltonian::matvec(std::span<const double> x, std::span<double> y) const {
  const std::size_t n = dimension();
  if (x.size() != n || y.size() != n) {
    throw ContractError("matvec dimension mismatch: operator " + std::to_string(n) + ", x " +
                        std::to_string(x.size()) + ", y " + std::to_string(y.size()));
  }
  const auto& off = *off_;
  const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ri = 0; ri < rows; ++ri) {
    const auto r = static_cast<std::size_t>(ri);
    double acc = diagonal_[r] * x[r];
    for (std::size_t e = off.t_row_begin[r]; e < off.t_row_begin[r + 1]; ++e) {
      acc += off.value[off.t_entry[e]] * x[off.t_source_row[e]];
    }
    for (std::size_t e = off.row_begin[r]; e < off.row_begin[r + 1]; ++e) {
      acc += off.value[e] * x[off.col[e]];
    }
    y[r] = acc;
  }
}

std::vector<double> SparseHamiltonian::matvec(std::span<const double> x) const {
  std::vector<double> y(dimension());
  matvec(x, y);
  return y;
}

// ---------------------------------------------------------------------------------------------

namespace {

void check_consistent(const Grid& grid, const FockBasis& basis) {
  if (grid.size() != basis.modes()) {
    throw ContractError("grid has " + std::to_string(grid.size()) + " modes but the basis has " +
                        std::to_string(basis.modes()));
  }
}

SparseHamiltonian::Metadata metadata_for(const Grid& grid, const FockBasis& basis,
                                         const ModelParams& params) {
  return {params, grid.hash(), basis.nmax()};
}

}  // namespace

std::vector<double> assemble_diagonal(const Grid& grid, const FockBasis& basis,
                                      const ModelParams& params) {
  check_consistent(grid, basis);
  const Vec3& P = params.momentum();
  const bool axial = grid.axial();
  if (axial && (P.x != 0.0 || P.y != 0.0)) {
    throw ContractError("axial (spherical_m0) grids need the total momentum along +z");
  }
  std::vector<double> omega(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) omega[j] = dispersion(grid[j].k, params);

  std::vector<double> diag(basis.size());
  const auto dim = static_cast<std::ptrdiff_t>(basis.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t si = 0; si < dim; ++si) {
    const auto s = static_cast<std::size_t>(si);
    Vec3 total;
    double field = 0.0;
    double transverse = 0.0;
    for (auto j : basis.state(s)) {
      total += grid[j].k;
      field += omega[j];
      transverse += grid[j].k.x * grid[j].k.x;
    }
    const double kinetic = axial ? 0.5 * ((P.z - total.z) * (P.z - total.z) + transverse)
                                 : 0.5 * norm2(P - total);
    diag[s] = kinetic + field;
  }
  return diag;
}

SparseHamiltonian assemble(const Grid& grid, const FockBasis& basis, const ModelParams& params) {
  check_consistent(grid, basis);
  auto diag = assemble_diagonal(grid, basis, params);

  std::vector<std::size_t> coupled;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (grid[j].coupling != 0.0) coupled.push_back(j);
  }
  const std::size_t dim = basis.size();
  std::vector<std::size_t> row_begin(dim + 1, 0);
  for (std::size_t s = 0; s < dim; ++s) {
    const bool can_raise = basis.phonon_number(s) < basis.nmax();
    row_begin[s + 1] = row_begin[s] + (can_raise ? coupled.size() : 0);
  }
  std::vector<std::size_t> col(row_begin[dim]);
  std::vector<double> value(row_begin[dim]);
  const auto rows = static_cast<std::ptrdiff_t>(dim);
#pragma omp parallel for schedule(dynamic, 256)
  for (std::ptrdiff_t si = 0; si < rows; ++si) {
    const auto s = static_cast<std::size_t>(si);
    std::size_t e = row_begin[s];
    if (e == row_begin[s + 1]) continue;
    for (auto j : coupled) {
      col[e] = *basis.raised(s, j);
      value[e] = grid[j].coupling * std::sqrt(static_cast<double>(basis.occupation(s, j) + 1));
      ++e;
    }
  }
  auto off = SparseHamiltonian::build_off_diagonal(dim, std::move(row_begin), std::move(col),
                                                   std::move(value));
  return SparseHamiltonian(std::move(diag), std::move(off), metadata_for(grid, basis, params));
}

SparseHamiltonian reassemble_diagonal(const SparseHamiltonian& h, const Grid& grid,
                                      const FockBasis& basis, const ModelParams& params) {
  const auto& meta = h.metadata();
  if (meta.grid_hash != grid.hash() || meta.nmax != basis.nmax()) {
    throw ContractError("reassemble_diagonal: operator was built on a different grid or basis");
  }
  if (meta.params) {
    const auto& old = *meta.params;
    if (old.g() != params.g() || old.c() != params.c() || old.xi() != params.xi() ||
        old.lambda() != params.lambda()) {
      throw ContractError("reassemble_diagonal: coupling parameters changed; assemble anew");
    }
  }
  return h.with_diagonal(assemble_diagonal(grid, basis, params), metadata_for(grid, basis, params));
}

AnnihilationResult annihilation_amplitudes(std::span<const double> state, const FockBasis& basis,
                                           std::size_t mode) {
  if (state.size() != basis.size()) throw ContractError("state vector has wrong dimension");
  if (mode >= basis.modes()) throw ContractError("mode index out of range");
  AnnihilationResult out;
  out.amplitudes.assign(basis.size(), 0.0);
  double sum = 0.0;
  for (std::size_t t = 0; t < basis.size(); ++t) {
    const auto s = basis.raised(t, mode);
    if (!s) break;  // states past this point all hold nmax phonons
    const double a = std::sqrt(static_cast<double>(basis.occupation(t, mode) + 1)) * state[*s];
    out.amplitudes[t] = a;
    sum += a * a;
  }
  out.norm = std::sqrt(sum);
  return out;
}

StateObservables observe(std::span<const double> state, const FockBasis& basis, const Grid& grid) {
  if (state.size() != basis.size()) throw ContractError("state vector has wrong dimension");
  StateObservables obs;
  obs.vacuum_overlap = state[0] * state[0];
  for (std::size_t s = 0; s < basis.size(); ++s) {
    const double p = state[s] * state[s];
    if (p == 0.0) continue;
    Vec3 total;
    const auto st = basis.state(s);
    for (auto j : st) total += grid[j].k;
    obs.mean_number += p * static_cast<double>(st.size());
    if (grid.axial()) total.x = 0.0;  // rings carry no net transverse momentum
    obs.mean_momentum += p * total;
  }
  return obs;
}

// ---------------------------------------------------------------------------------------------

namespace {

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffU);
  out.write(b.data(), 8);
}

std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> b{};
  in.read(reinterpret_cast<char*>(b.data()), 8);
  if (!in) throw ContractError("truncated matrix dump");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void write_matrix_binary(const SparseHamiltonian& h, std::ostream& out) {
  const auto entries = h.upper_entries();
  put_u64(out, h.dimension());
  put_u64(out, entries.size());
  for (const auto& t : entries) {
    put_u64(out, t.row);
    put_u64(out, t.col);
    put_u64(out, std::bit_cast<std::uint64_t>(t.value));
  }
}

SparseHamiltonian read_matrix_binary(std::istream& in) {
  const auto dim = get_u64(in);
  const auto nnz = get_u64(in);
  std::vector<Triplet> entries;
  entries.reserve(nnz);
  for (std::uint64_t i = 0; i < nnz; ++i) {
    Triplet t;
    t.row = get_u64(in);
    t.col = get_u64(in);
    t.value = std::bit_cast<double>(get_u64(in));
    entries.push_back(t);
  }
  return SparseHamiltonian::from_triplets(dim, entries);
}

}  // namespace polaron
