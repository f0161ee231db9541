#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace splab {

/// Eigenvalues (ascending) of the symmetric-definite pencil A x = λ B x.
/// Both matrices are copied; only their lower triangles are read.
Eigen::VectorXd generalized_symmetric_eigenvalues(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

/// Eigenvalues of a general real matrix.
std::vector<std::complex<double>> general_eigenvalues(Eigen::MatrixXd A);

/// X = A⁻¹ B by LU with partial pivoting.
Eigen::MatrixXd lu_solve(Eigen::MatrixXd A, Eigen::MatrixXd B);

/// A⁻¹ by LU with partial pivoting.
Eigen::MatrixXd lu_inverse(Eigen::MatrixXd A);

struct Inertia {
  int negative = 0;
  int zero = 0;
  int positive = 0;
};

/// Sylvester inertia of a symmetric matrix from its Bunch-Kaufman factorization.
/// Pivot blocks with |d| <= zero_tol·max|d| are counted as zero.
Inertia symmetric_inertia(Eigen::MatrixXd A, double zero_tol = 0.0);

}  // namespace splab
