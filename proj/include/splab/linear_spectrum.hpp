#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "splab/fem.hpp"

namespace splab {

struct LinearEigenpair {
  double eigenvalue = 0.0;  // -E_j < 0
  Eigen::VectorXd vector;   // all nodes; zero at r_max; uᵀMu = 1; u(0) > 0
  int nodes = 0;

  double E() const noexcept { return -eigenvalue; }
};

/// Eigenvalues in [-continuum_floor, 0) are treated as discretized continuum.
inline constexpr double kContinuumFloor = 1e-8;

/// Number of resolved negative eigenvalues of (K_dir + V_dir, M_dir).
int count_bound_states(const AssembledOperators& ops, double continuum_floor = kContinuumFloor);

/// The k most negative eigenpairs of (K_dir + V_dir) x = λ M_dir x, sorted by λ.
/// Eigenvalues are isolated by Sturm-count bisection on the tridiagonal pencil and
/// eigenvectors refined by shift-invert iteration at the converged shift.
/// Throws InsufficientDomainError if fewer than k bound states are resolved.
std::vector<LinearEigenpair> solve_linear_states(const AssembledOperators& ops, int k,
                                                 double continuum_floor = kContinuumFloor);

/// Node counts must strictly increase with the eigenvalue and no two eigenvalues
/// may coincide within simplicity_tol (relative). Throws SpectralStructureError.
void sturm_check(std::span<const LinearEigenpair> pairs, double simplicity_tol = 1e-10);

}  // namespace splab
