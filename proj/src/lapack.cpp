#include "splab/lapack.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "splab/errors.hpp"

namespace splab {

Eigen::VectorXd generalized_symmetric_eigenvalues(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  const lapack_int n = static_cast<lapack_int>(A.rows());
  if (A.cols() != n || B.rows() != n || B.cols() != n)
    throw DomainError("generalized_symmetric_eigenvalues: dimension mismatch");
  Eigen::MatrixXd a = A, b = B;
  Eigen::VectorXd w(n);
  const lapack_int info = LAPACKE_dsygvd(LAPACK_COL_MAJOR, 1, 'N', 'L', n, a.data(), n, b.data(), n, w.data());
  if (info != 0) throw LinearAlgebraError("dsygvd failed with info = " + std::to_string(info));
  return w;
}

std::vector<std::complex<double>> general_eigenvalues(Eigen::MatrixXd A) {
  const lapack_int n = static_cast<lapack_int>(A.rows());
  if (A.cols() != n) throw DomainError("general_eigenvalues: matrix must be square");
  std::vector<double> wr(static_cast<std::size_t>(n)), wi(static_cast<std::size_t>(n));
  const lapack_int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', n, A.data(), n, wr.data(), wi.data(), nullptr,
                                        1, nullptr, 1);
  if (info != 0) throw LinearAlgebraError("dgeev failed with info = " + std::to_string(info));
  std::vector<std::complex<double>> out(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {wr[i], wi[i]};
  return out;
}

Eigen::MatrixXd lu_solve(Eigen::MatrixXd A, Eigen::MatrixXd B) {
  const lapack_int n = static_cast<lapack_int>(A.rows());
  if (A.cols() != n || B.rows() != n) throw DomainError("lu_solve: dimension mismatch");
  std::vector<lapack_int> ipiv(static_cast<std::size_t>(n));
  const lapack_int info = LAPACKE_dgesv(LAPACK_COL_MAJOR, n, static_cast<lapack_int>(B.cols()), A.data(), n,
                                        ipiv.data(), B.data(), n);
  if (info != 0) throw LinearAlgebraError("dgesv failed with info = " + std::to_string(info));
  return B;
}

Eigen::MatrixXd lu_inverse(Eigen::MatrixXd A) {
  const lapack_int n = static_cast<lapack_int>(A.rows());
  if (A.cols() != n) throw DomainError("lu_inverse: matrix must be square");
  std::vector<lapack_int> ipiv(static_cast<std::size_t>(n));
  lapack_int info = LAPACKE_dgetrf(LAPACK_COL_MAJOR, n, n, A.data(), n, ipiv.data());
  if (info != 0) throw LinearAlgebraError("dgetrf failed with info = " + std::to_string(info));
  info = LAPACKE_dgetri(LAPACK_COL_MAJOR, n, A.data(), n, ipiv.data());
  if (info != 0) throw LinearAlgebraError("dgetri failed with info = " + std::to_string(info));
  return A;
}

Inertia symmetric_inertia(Eigen::MatrixXd A, double zero_tol) {
  const lapack_int n = static_cast<lapack_int>(A.rows());
  if (A.cols() != n) throw DomainError("symmetric_inertia: matrix must be square");
  std::vector<lapack_int> ipiv(static_cast<std::size_t>(n));
  const lapack_int info = LAPACKE_dsytrf(LAPACK_COL_MAJOR, 'L', n, A.data(), n, ipiv.data());
  if (info < 0) throw LinearAlgebraError("dsytrf failed with info = " + std::to_string(info));

  // eigenvalues of the block-diagonal factor D
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(n));
  for (lapack_int k = 0; k < n;) {
    if (ipiv[static_cast<std::size_t>(k)] > 0 || k + 1 == n) {
      d.push_back(A(k, k));
      ++k;
    } else {
      const double a = A(k, k), b = A(k + 1, k), c = A(k + 1, k + 1);
      const double mean = 0.5 * (a + c);
      const double rad = std::hypot(0.5 * (a - c), b);
      d.push_back(mean - rad);
      d.push_back(mean + rad);
      k += 2;
    }
  }
  double dmax = 0.0;
  for (double x : d) dmax = std::max(dmax, std::abs(x));
  Inertia in;
  for (double x : d) {
    if (std::abs(x) <= zero_tol * dmax)
      ++in.zero;
    else if (x < 0.0)
      ++in.negative;
    else
      ++in.positive;
  }
  return in;
}

}  // namespace splab
