#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "polaron/errors.hpp"
#include "polaron/fock.hpp"
#include "polaron/solver.hpp"

namespace polaron {
namespace {

// Cyclic Jacobi rotations; independent of the Householder/QL route under test.
std::vector<double> jacobi_eigenvalues(std::vector<double> a, std::size_t n) {
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1.0 / std::sqrt(t * t + 1);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a[i * n + i];
  std::sort(ev.begin(), ev.end());
  return ev;
}

SparseHamiltonian random_sparse(std::size_t dim, double density, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<Triplet> entries;
  for (std::size_t r = 0; r < dim; ++r) {
    entries.push_back({r, r, 3.0 * u(rng)});
    for (std::size_t c = r + 1; c < dim; ++c) {
      if (coin(rng) < density) entries.push_back({r, c, u(rng)});
    }
  }
  return SparseHamiltonian::from_triplets(dim, entries);
}

double residual_norm(const SparseHamiltonian& h, const GroundStateResult& r) {
  const auto y = h.matvec(r.vector);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - r.energy * r.vector[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double vector_norm(const std::vector<double>& v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

TEST(Lanczos, DiagonalOperator) {
  const std::vector<Triplet> entries{{0, 0, 3.0}, {1, 1, 1.0}, {2, 2, 2.0}};
  const auto h = SparseHamiltonian::from_triplets(3, entries);
  const auto r = lanczos_ground(h);
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.energy, 1.0, 1e-12);
  EXPECT_NEAR(std::abs(r.vector[1]), 1.0, 1e-9);
}

TEST(Lanczos, TwoByTwoClosedForm) {
  const std::vector<Triplet> entries{{0, 0, 0.0}, {0, 1, 1.0}, {1, 1, 3.0}};
  const auto h = SparseHamiltonian::from_triplets(2, entries);
  const double exact = 1.5 - std::sqrt(2.25 + 1.0);
  EXPECT_NEAR(exact, -0.30278, 1e-5);
  const auto r = lanczos_ground(h);
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.energy, exact, 1e-12);
  EXPECT_NEAR(dense_ground_oracle(h), exact, 1e-14);
}

TEST(Lanczos, OneDimensional) {
  const std::vector<Triplet> entries{{0, 0, -4.5}};
  const auto r = lanczos_ground(SparseHamiltonian::from_triplets(1, entries));
  ASSERT_TRUE(r.converged);
  EXPECT_EQ(r.energy, -4.5);
}

TEST(Lanczos, RandomSparseAgreesWithDenseOracle) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> dims(2, 500);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t dim = dims(rng);
    const auto h = random_sparse(dim, std::min(1.0, 6.0 / dim), rng);
    LanczosOptions opts;
    opts.seed = static_cast<std::uint64_t>(trial);
    const auto r = lanczos_ground(h, opts);
    ASSERT_TRUE(r.converged) << "trial " << trial << " dim " << dim;
    EXPECT_NEAR(r.energy, dense_ground_oracle(h), 1e-9) << "trial " << trial;
    EXPECT_LE(r.residual, opts.tol);
    EXPECT_NEAR(residual_norm(h, r), r.residual, 1e-10);
    EXPECT_NEAR(vector_norm(r.vector), 1.0, 1e-12);
  }
}

TEST(Lanczos, DeterministicForSeed) {
  std::mt19937_64 rng(5);
  const auto h = random_sparse(300, 0.02, rng);
  LanczosOptions opts;
  opts.seed = 42;
  const auto a = lanczos_ground(h, opts);
  const auto b = lanczos_ground(h, opts);
  EXPECT_EQ(a.energy, b.energy);
  EXPECT_EQ(a.vector, b.vector);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(Lanczos, ReportsNonConvergence) {
  std::mt19937_64 rng(9);
  const auto h = random_sparse(400, 0.05, rng);
  LanczosOptions opts;
  opts.max_iter = 3;
  opts.krylov_dim = 3;
  const auto r = lanczos_ground(h, opts);
  EXPECT_FALSE(r.converged);
  EXPECT_LE(r.iterations, 3u);
  EXPECT_GT(r.residual, opts.tol);
}

TEST(Lanczos, PermutationInvariance) {
  std::mt19937_64 rng(31);
  const std::size_t dim = 150;
  const auto h = random_sparse(dim, 0.05, rng);
  std::vector<std::size_t> perm(dim);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Triplet> moved;
  for (const auto& t : h.upper_entries()) moved.push_back({perm[t.row], perm[t.col], t.value});
  const auto hp = SparseHamiltonian::from_triplets(dim, moved);
  EXPECT_NEAR(lanczos_ground(h).energy, lanczos_ground(hp).energy, 1e-9);
}

TEST(Lanczos, DecoupledReturnsDiagonalMinimum) {
  const ModelParams params(1.0, 1.0, 0.0, 0.0, kInfiniteCutoff, {0.0, 0.0, 1.7});
  GridSpec spec;
  spec.kmax = 2.0;
  spec.n = 4;
  const Grid grid = build_grid(spec, params);
  const FockBasis basis(grid.size(), 2);
  const auto h = assemble(grid, basis, params);
  const double expected = *std::min_element(h.diagonal().begin(), h.diagonal().end());
  const auto r = lanczos_ground(h);
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.energy, expected, 1e-9);
}

TEST(Lanczos, NestedTruncationsAreMonotone) {
  const ModelParams params(1.0, 1.0, 1.5, 0.0, 2.0, {0.0, 0.0, 0.4});
  GridSpec spec;
  spec.kmax = 2.0;
  spec.n = 3;
  const Grid grid = build_grid(spec, params);
  double previous = std::numeric_limits<double>::infinity();
  for (int nmax = 0; nmax <= 3; ++nmax) {
    const FockBasis basis(grid.size(), nmax);
    const auto r = lanczos_ground(assemble(grid, basis, params));
    ASSERT_TRUE(r.converged);
    EXPECT_LE(r.energy, previous + 1e-9);
    previous = r.energy;
  }
}

TEST(Lanczos, ParitySymmetry) {
  const ModelParams params(1.0, 1.0, 1.2, 0.0, 2.0);
  GridSpec spec;
  spec.kmax = 2.0;
  spec.n = 4;
  const Grid grid = build_grid(spec, params);
  const FockBasis basis(grid.size(), 2);
  const Vec3 p{0.1, -0.3, 0.5};
  const auto plus = lanczos_ground(assemble(grid, basis, params.with_momentum(p)));
  const auto minus = lanczos_ground(assemble(grid, basis, params.with_momentum(-p)));
  EXPECT_NEAR(plus.energy, minus.energy, 1e-9);
}

TEST(DenseOracle, TrivialSpectra) {
  std::vector<Triplet> id;
  for (std::size_t i = 0; i < 4; ++i) id.push_back({i, i, 1.0});
  EXPECT_NEAR(dense_ground_oracle(SparseHamiltonian::from_triplets(4, id)), 1.0, 1e-15);
  const std::vector<Triplet> d{{0, 0, -5.0}, {1, 1, 0.0}, {2, 2, 5.0}};
  EXPECT_NEAR(dense_ground_oracle(SparseHamiltonian::from_triplets(3, d)), -5.0, 1e-15);
}

TEST(DenseOracle, AgreesWithJacobiOnFullSpectrum) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t n : {1u, 2u, 3u, 7u, 20u, 45u}) {
    std::vector<double> a(n * n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = r; c < n; ++c) a[r * n + c] = a[c * n + r] = u(rng);
    const auto got = dense_symmetric_eigenvalues(a, n);
    const auto ref = jacobi_eigenvalues(a, n);
    ASSERT_EQ(got.size(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(got[i], ref[i], 1e-11);
  }
}

TEST(DenseOracle, RefusesLargeDimension) {
  std::vector<Triplet> d;
  for (std::size_t i = 0; i < 30; ++i) d.push_back({i, i, 1.0});
  EXPECT_THROW(dense_ground_oracle(SparseHamiltonian::from_triplets(30, d), 20), ResourceError);
}

}  // namespace
}  // namespace polaron
