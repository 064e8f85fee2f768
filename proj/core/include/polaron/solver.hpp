#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "polaron/fock.hpp"

namespace polaron {

struct LanczosOptions {
  double tol = 1e-9;            // absolute residual ||H psi - E psi||
  std::size_t max_iter = 20000;  // total matrix-vector products, residual checks included
  std::uint64_t seed = 0;
  std::size_t krylov_dim = 120;  // Lanczos vectors kept per restart cycle
  double perturbation = 1e-2;    // norm of the random admixture to the vacuum start vector
};

struct GroundStateResult {
  double energy = 0.0;
  std::vector<double> vector;  // normalized
  double residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Lowest eigenpair by restarted Lanczos with full reorthogonalization.
///
/// The start vector is the vacuum e_0 plus a seeded random admixture. Each cycle builds up to
/// `krylov_dim` orthonormal vectors, restarts from the best Ritz vector, and stops once the
/// explicitly computed residual is below `tol`. Never throws on non-convergence: the result
/// carries converged = false instead.
GroundStateResult lanczos_ground(const SparseHamiltonian& h, const LanczosOptions& options = {});

/// Smallest eigenvalue by dense Householder tridiagonalization followed by implicit QL.
/// Refuses (ResourceError) above `max_dimension`.
double dense_ground_oracle(const SparseHamiltonian& h, std::size_t max_dimension = 2000);

/// All eigenvalues of a dense symmetric row-major matrix, ascending (Householder + QL).
std::vector<double> dense_symmetric_eigenvalues(std::vector<double> a, std::size_t n);

}  // namespace polaron
