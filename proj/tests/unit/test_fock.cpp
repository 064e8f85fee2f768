#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "polaron/errors.hpp"
#include "polaron/fock.hpp"
#include "polaron/solver.hpp"

namespace polaron {
namespace {

using Occupation = std::vector<std::uint8_t>;

// All occupation vectors with total <= nmax, by plain recursion.
void brute_force_states(std::size_t modes, int nmax, Occupation& cur, std::size_t j,
                        std::vector<Occupation>& out) {
  if (j == modes) {
    out.push_back(cur);
    return;
  }
  int used = 0;
  for (std::size_t i = 0; i < j; ++i) used += cur[i];
  for (int n = 0; used + n <= nmax; ++n) {
    cur[j] = static_cast<std::uint8_t>(n);
    brute_force_states(modes, nmax, cur, j + 1, out);
  }
  cur[j] = 0;
}

// Reference dense H(P) built directly from occupation vectors.
std::vector<double> reference_dense(const Grid& grid, const FockBasis& basis,
                                    const ModelParams& params) {
  const std::size_t dim = basis.size();
  std::map<Occupation, std::size_t> index;
  for (std::size_t s = 0; s < dim; ++s) index[basis.occupations(s)] = s;
  std::vector<double> h(dim * dim, 0.0);
  for (std::size_t s = 0; s < dim; ++s) {
    const Occupation occ = basis.occupations(s);
    Vec3 total;
    double energy = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      total += static_cast<double>(occ[j]) * grid[j].k;
      energy += occ[j] * (std::sqrt(params.c() * params.c() * norm2(grid[j].k) +
                                    params.xi() * params.xi() * norm2(grid[j].k) *
                                        norm2(grid[j].k)) +
                          params.kappa());
    }
    h[s * dim + s] = 0.5 * norm2(params.momentum() - total) + energy;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      Occupation up = occ;
      ++up[j];
      const auto it = index.find(up);
      if (it == index.end()) continue;
      const double amp = grid[j].coupling * std::sqrt(occ[j] + 1.0);
      h[s * dim + it->second] += amp;
      h[it->second * dim + s] += amp;
    }
  }
  return h;
}

Grid small_grid(int n, const ModelParams& params, double kmax = 1.5) {
  GridSpec spec;
  spec.kmax = kmax;
  spec.n = n;
  return build_grid(spec, params);
}

TEST(FockBasis, StarsAndBarsCounts) {
  EXPECT_EQ(enumerate_basis(3, 2).size(), 10u);
  EXPECT_EQ(enumerate_basis(2, 2).size(), 6u);
  EXPECT_EQ(FockBasis::count(343, 2), 59340u);
  EXPECT_EQ(enumerate_basis(343, 2).size(), 59340u);
  EXPECT_EQ(FockBasis::count(5, 0), 1u);
  EXPECT_EQ(FockBasis::count(1, 7), 8u);
  EXPECT_EQ(FockBasis::count(10, 3), 1u + 10u + 55u + 220u);
}

TEST(FockBasis, OverflowIsResourceError) {
  EXPECT_THROW(FockBasis(1000, 3, 1000), ResourceError);
  EXPECT_THROW(FockBasis(0, 1), ContractError);
  EXPECT_THROW(FockBasis(3, -1), ContractError);
  EXPECT_EQ(FockBasis::count(1u << 30, 40), std::numeric_limits<std::uint64_t>::max());
  try {
    FockBasis(1000, 3, 1000);
  } catch (const ResourceError& e) {
    EXPECT_NE(std::string(e.what()).find("167668501"), std::string::npos) << e.what();
  }
}

TEST(FockBasis, BijectionAgainstBruteForce) {
  for (auto [m, nmax] : {std::pair{1, 4}, {3, 2}, {4, 3}, {6, 2}, {5, 0}}) {
    const FockBasis basis(m, nmax);
    std::vector<Occupation> all;
    Occupation cur(m, 0);
    brute_force_states(m, nmax, cur, 0, all);
    ASSERT_EQ(basis.size(), all.size());
    std::map<Occupation, std::size_t> seen;
    for (std::size_t s = 0; s < basis.size(); ++s) {
      const auto occ = basis.occupations(s);
      EXPECT_TRUE(seen.emplace(occ, s).second);
      EXPECT_EQ(basis.rank(basis.state(s)), s);
      if (s > 0) EXPECT_GE(basis.phonon_number(s), basis.phonon_number(s - 1));
    }
    for (const auto& occ : all) EXPECT_TRUE(seen.count(occ));
  }
}

TEST(FockBasis, VacuumAndSinglePhononLayout) {
  const FockBasis basis(7, 2);
  EXPECT_EQ(basis.phonon_number(0), 0);
  for (std::size_t j = 0; j < 7; ++j) {
    EXPECT_EQ(basis.occupation(1 + j, j), 1);
    EXPECT_EQ(basis.raised(0, j), 1 + j);
    EXPECT_EQ(basis.lowered(1 + j, j), 0u);
  }
  EXPECT_FALSE(basis.lowered(0, 3).has_value());
}

TEST(FockBasis, RaiseLowerAreInverse) {
  const FockBasis basis(5, 3);
  for (std::size_t s = 0; s < basis.size(); ++s) {
    for (std::size_t j = 0; j < 5; ++j) {
      const auto up = basis.raised(s, j);
      if (basis.phonon_number(s) == 3) {
        EXPECT_FALSE(up.has_value());
        continue;
      }
      ASSERT_TRUE(up.has_value());
      EXPECT_EQ(basis.occupation(*up, j), basis.occupation(s, j) + 1);
      EXPECT_EQ(basis.lowered(*up, j), s);
    }
  }
}

TEST(Assemble, MatchesReferenceDense) {
  const ModelParams params(0.9, 1.1, 1.3, 0.2, 1.4, {0.0, 0.0, 0.35});
  for (int nmax : {0, 1, 2, 3}) {
    const Grid grid = small_grid(2, params);
    const FockBasis basis(grid.size(), nmax);
    const auto h = assemble(grid, basis, params);
    const auto expected = reference_dense(grid, basis, params);
    const auto got = h.dense();
    ASSERT_EQ(got.size(), expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_NEAR(got[i], expected[i], 1e-13 * (1 + std::abs(expected[i])));
    }
  }
}

TEST(Assemble, SingleModeTwoByTwo) {
  const ModelParams params(1.0, 1.0, 0.8, 0.1, 3.0, {0.0, 0.0, 0.4});
  GridSpec spec;
  const Vec3 k{0.2, -0.1, 0.5};
  const double w = 0.3;
  const Grid grid(spec, {Mode{k, w, form_factor(k, params) * std::sqrt(w)}});
  const FockBasis basis(1, 1);
  const auto dense = assemble(grid, basis, params).dense();
  const double g1 = form_factor(k, params) * std::sqrt(w);
  EXPECT_NEAR(dense[0], 0.5 * 0.16, 1e-15);
  EXPECT_NEAR(dense[1], g1, 1e-15);
  EXPECT_NEAR(dense[2], g1, 1e-15);
  EXPECT_NEAR(dense[3], 0.5 * norm2(params.momentum() - k) + dispersion(k, params), 1e-15);
}

TEST(Assemble, EntryCountAtOnePhonon) {
  const ModelParams params(1.0, 1.0, 1.0, 0.0, kInfiniteCutoff);
  const Grid grid = small_grid(4, params);
  const FockBasis basis(grid.size(), 1);
  const auto h = assemble(grid, basis, params);
  EXPECT_EQ(h.off_diagonal_count(), grid.size());
  EXPECT_EQ(h.stored_entries(), 2 * grid.size() + 1);
}

TEST(Assemble, SymmetricAndNumberChangingByOne) {
  const ModelParams params(1.0, 1.0, 1.0, 0.0, 2.0, {0.0, 0.0, 0.5});
  const Grid grid = small_grid(3, params);
  const FockBasis basis(grid.size(), 3);
  const auto h = assemble(grid, basis, params);
  for (const auto& t : h.upper_entries()) {
    EXPECT_LE(t.row, t.col);
    if (t.row != t.col) {
      EXPECT_EQ(std::abs(basis.phonon_number(t.row) - basis.phonon_number(t.col)), 1);
    }
  }
  const auto dense = h.dense();
  const std::size_t dim = h.dimension();
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t c = 0; c < dim; ++c) ASSERT_EQ(dense[r * dim + c], dense[c * dim + r]);
  }
}

TEST(Assemble, InfraredMassShiftsByNumberOperator) {
  const ModelParams params(1.0, 1.0, 1.0, 0.0, 2.0, {0.0, 0.0, 0.3});
  const double kappa = 0.37;
  const Grid grid = small_grid(3, params);
  const FockBasis basis(grid.size(), 2);
  const auto h0 = assemble(grid, basis, params);
  const auto hk = assemble(grid, basis, params.with_kappa(kappa));
  const auto d0 = h0.dense();
  const auto dk = hk.dense();
  const std::size_t dim = basis.size();
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      const double shift = r == c ? kappa * basis.phonon_number(r) : 0.0;
      EXPECT_NEAR(dk[r * dim + c], d0[r * dim + c] + shift, 1e-14);
    }
  }
}

TEST(Assemble, DecoupledIsDiagonal) {
  const ModelParams params(1.0, 1.0, 0.0, 0.0, kInfiniteCutoff, {0.0, 0.0, 0.2});
  const Grid grid = small_grid(4, params);
  const FockBasis basis(grid.size(), 2);
  const auto h = assemble(grid, basis, params);
  EXPECT_EQ(h.off_diagonal_count(), 0u);
  EXPECT_NEAR(h.diagonal()[0], 0.02, 1e-16);
  const auto y = h.matvec(std::vector<double>(basis.size(), 0.0));
  std::vector<double> e0(basis.size(), 0.0);
  e0[0] = 1.0;
  const auto y0 = h.matvec(e0);
  EXPECT_NEAR(y0[0], 0.02, 1e-16);
  for (std::size_t s = 1; s < y0.size(); ++s) EXPECT_EQ(y0[s], 0.0);
  EXPECT_EQ(y.size(), basis.size());
}

TEST(Assemble, MismatchIsContractError) {
  const ModelParams params(1.0, 1.0, 1.0);
  const Grid grid = small_grid(2, params);
  EXPECT_THROW(assemble(grid, FockBasis(5, 1), params), ContractError);
}

TEST(Matvec, VacuumCreatesCouplings) {
  const ModelParams params(1.0, 1.0, 0.7, 0.0, 1.6);
  const Grid grid = small_grid(3, params);
  const FockBasis basis(grid.size(), 2);
  const auto h = assemble(grid, basis, params);
  std::vector<double> e0(basis.size(), 0.0);
  e0[0] = 1.0;
  const auto y = h.matvec(e0);
  for (std::size_t j = 0; j < grid.size(); ++j) EXPECT_EQ(y[1 + j], grid[j].coupling);
  for (std::size_t s = 1 + grid.size(); s < y.size(); ++s) EXPECT_EQ(y[s], 0.0);
}

TEST(Matvec, MatchesDenseMultiply) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const ModelParams params(1.0, 0.6, 1.2, 0.1, 1.9, {0.0, 0.0, 0.25});
  const Grid grid = small_grid(3, params, 1.2);
  const FockBasis basis(grid.size(), 2);  // 1 + 26 + 351 = 378 > 200, restrict below
  const auto h = assemble(grid, basis, params);
  const auto dense = h.dense();
  const std::size_t dim = h.dimension();
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> x(dim);
    for (auto& v : x) v = u(rng);
    const auto y = h.matvec(x);
    for (std::size_t r = 0; r < dim; ++r) {
      double ref = 0.0;
      for (std::size_t c = 0; c < dim; ++c) ref += dense[r * dim + c] * x[c];
      EXPECT_NEAR(y[r], ref, 1e-12);
    }
  }
  std::vector<double> bad(dim + 1);
  std::vector<double> out(dim);
  EXPECT_THROW(h.matvec(bad, out), ContractError);
}

TEST(Matvec, FromTripletsMirrorsAndSums) {
  const std::vector<Triplet> entries{{0, 0, 1.0}, {2, 0, 0.5}, {0, 2, 0.25}, {1, 1, -2.0}};
  const auto h = SparseHamiltonian::from_triplets(3, entries);
  const auto d = h.dense();
  EXPECT_EQ(d[2], 0.75);
  EXPECT_EQ(d[6], 0.75);
  EXPECT_EQ(d[4], -2.0);
  EXPECT_EQ(h.off_diagonal_count(), 1u);
}

TEST(Matvec, Deterministic) {
  const ModelParams params(1.0, 1.0, 1.0, 0.0, 2.0);
  const Grid grid = small_grid(4, params, 2.0);
  const FockBasis basis(grid.size(), 2);
  const auto h = assemble(grid, basis, params);
  std::vector<double> x(h.dimension());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.37 * i);
  const auto a = h.matvec(x);
  const auto b = h.matvec(x);
  EXPECT_EQ(a, b);
}

TEST(ReassembleDiagonal, MatchesFullAssembly) {
  const ModelParams params(1.0, 1.0, 1.0, 0.0, 2.0, {0.0, 0.0, 0.1});
  const Grid grid = small_grid(3, params);
  const FockBasis basis(grid.size(), 2);
  const auto h = assemble(grid, basis, params);
  const ModelParams moved = params.with_momentum({0.0, 0.0, 0.9}).with_kappa(0.05);
  const auto fast = reassemble_diagonal(h, grid, basis, moved);
  const auto full = assemble(grid, basis, moved);
  EXPECT_EQ(fast.dense(), full.dense());
  EXPECT_THROW(reassemble_diagonal(h, grid, basis, params.with_g(0.5)), ContractError);
}

TEST(SphericalAxial, DiagonalDropsAzimuthalCrossTerms) {
  const ModelParams params(1.0, 1.0, 1.0, 0.0, 2.0, {0.0, 0.0, 0.5});
  GridSpec spec;
  spec.kind = GridKind::spherical_m0;
  spec.kmax = 2.0;
  spec.n_radial = 2;
  spec.n_angular = 2;
  const Grid grid = build_grid(spec, params);
  const FockBasis basis(grid.size(), 2);
  const auto diag = assemble_diagonal(grid, basis, params);
  for (std::size_t s = 0; s < basis.size(); ++s) {
    double kz = 0.0, kx2 = 0.0, w = 0.0;
    for (auto j : basis.state(s)) {
      kz += grid[j].k.z;
      kx2 += grid[j].k.x * grid[j].k.x;
      w += dispersion(grid[j].k, params);
    }
    EXPECT_NEAR(diag[s], 0.5 * ((0.5 - kz) * (0.5 - kz) + kx2) + w, 1e-14);
  }
  EXPECT_THROW(assemble_diagonal(grid, basis, params.with_momentum({0.3, 0.0, 0.0})),
               ContractError);
}

TEST(Annihilation, BosonicAmplitudes) {
  const FockBasis basis(3, 2);
  std::vector<double> psi(basis.size(), 0.0);
  psi[0] = 1.0;
  for (std::size_t j = 0; j < 3; ++j) {
    const auto r = annihilation_amplitudes(psi, basis, j);
    EXPECT_EQ(r.norm, 0.0);
  }
  std::fill(psi.begin(), psi.end(), 0.0);
  psi[2] = 1.0;  // one phonon in mode 1
  auto r = annihilation_amplitudes(psi, basis, 1);
  EXPECT_NEAR(r.amplitudes[0], 1.0, 1e-15);
  EXPECT_NEAR(r.norm, 1.0, 1e-15);
  std::fill(psi.begin(), psi.end(), 0.0);
  const std::uint32_t twice[] = {1, 1};
  psi[basis.rank(twice)] = 1.0;
  r = annihilation_amplitudes(psi, basis, 1);
  EXPECT_NEAR(r.amplitudes[2], std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(r.norm, std::sqrt(2.0), 1e-15);
}

TEST(Annihilation, NormsSumToMeanNumber) {
  const ModelParams params(1.0, 1.0, 1.5, 0.0, 2.0, {0.0, 0.0, 0.3});
  const Grid grid = small_grid(2, params);
  const FockBasis basis(grid.size(), 3);
  const auto h = assemble(grid, basis, params);
  const auto gs = lanczos_ground(h);
  ASSERT_TRUE(gs.converged);
  double sum = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const auto r = annihilation_amplitudes(gs.vector, basis, j);
    sum += r.norm * r.norm;
  }
  const auto obs = observe(gs.vector, basis, grid);
  EXPECT_NEAR(sum, obs.mean_number, 1e-12);
  EXPECT_GT(obs.vacuum_overlap, 0.0);
  EXPECT_LE(obs.vacuum_overlap, 1.0);
}

TEST(MatrixBinary, RoundTrip) {
  const ModelParams params(1.0, 1.0, 1.0, 0.0, 2.0, {0.0, 0.0, 0.2});
  const Grid grid = small_grid(2, params);
  const FockBasis basis(grid.size(), 2);
  const auto h = assemble(grid, basis, params);
  std::stringstream buf;
  write_matrix_binary(h, buf);
  EXPECT_EQ(buf.str().size(), 16 + 24 * h.stored_entries());
  const auto back = read_matrix_binary(buf);
  EXPECT_EQ(back.dense(), h.dense());
}

}  // namespace
}  // namespace polaron
