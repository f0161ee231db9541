#include "splab/tridiag.hpp"

#include <lapacke.h>

#include <cmath>
#include <limits>
#include <vector>

#include "splab/errors.hpp"

namespace splab {

Eigen::VectorXd SymTridiag::operator*(const Eigen::VectorXd& x) const {
  const Eigen::Index n = size();
  Eigen::VectorXd y = diag.cwiseProduct(x);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    y(i) += off(i) * x(i + 1);
    y(i + 1) += off(i) * x(i);
  }
  return y;
}

Eigen::VectorXcd SymTridiag::operator*(const Eigen::VectorXcd& x) const {
  const Eigen::Index n = size();
  Eigen::VectorXcd y = diag.cast<std::complex<double>>().cwiseProduct(x);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    y(i) += off(i) * x(i + 1);
    y(i + 1) += off(i) * x(i);
  }
  return y;
}

SymTridiag SymTridiag::leading(Eigen::Index k) const {
  SymTridiag out;
  out.diag = diag.head(k);
  out.off = off.head(k > 0 ? k - 1 : 0);
  return out;
}

Eigen::MatrixXd SymTridiag::dense() const {
  const Eigen::Index n = size();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  A.diagonal() = diag;
  for (Eigen::Index i = 0; i + 1 < n; ++i) A(i, i + 1) = A(i + 1, i) = off(i);
  return A;
}

Eigen::SparseMatrix<double> SymTridiag::sparse() const {
  const Eigen::Index n = size();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(3 * n));
  for (Eigen::Index i = 0; i < n; ++i) t.emplace_back(i, i, diag(i));
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    t.emplace_back(i, i + 1, off(i));
    t.emplace_back(i + 1, i, off(i));
  }
  Eigen::SparseMatrix<double> S(n, n);
  S.setFromTriplets(t.begin(), t.end());
  return S;
}

SymTridiag& SymTridiag::operator+=(const SymTridiag& o) {
  diag += o.diag;
  off += o.off;
  return *this;
}

SymTridiag& SymTridiag::operator-=(const SymTridiag& o) {
  diag -= o.diag;
  off -= o.off;
  return *this;
}

SymTridiag& SymTridiag::operator*=(double s) {
  diag *= s;
  off *= s;
  return *this;
}

SymTridiag operator+(SymTridiag a, const SymTridiag& b) { return a += b; }
SymTridiag operator-(SymTridiag a, const SymTridiag& b) { return a -= b; }
SymTridiag operator*(double s, SymTridiag a) { return a *= s; }

TridiagCholesky::TridiagCholesky(const SymTridiag& A) {
  const Eigen::Index n = A.size();
  l_diag_.resize(n);
  l_sub_.resize(n > 0 ? n - 1 : 0);
  double prev = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double d = A.diag(i);
    if (i > 0) {
      l_sub_(i - 1) = A.off(i - 1) / prev;
      d -= l_sub_(i - 1) * l_sub_(i - 1);
    }
    if (!(d > 0.0)) throw LinearAlgebraError("tridiagonal Cholesky: matrix not positive definite");
    prev = std::sqrt(d);
    l_diag_(i) = prev;
  }
}

Eigen::VectorXd TridiagCholesky::solve(const Eigen::VectorXd& b) const {
  Eigen::MatrixXd x = b;
  solve_lower_inplace(x);
  solve_upper_inplace(x);
  return x.col(0);
}

void TridiagCholesky::solve_lower_inplace(Eigen::Ref<Eigen::MatrixXd> X) const {
  const Eigen::Index n = size();
  X.row(0) /= l_diag_(0);
  for (Eigen::Index i = 1; i < n; ++i) {
    X.row(i) -= l_sub_(i - 1) * X.row(i - 1);
    X.row(i) /= l_diag_(i);
  }
}

void TridiagCholesky::solve_upper_inplace(Eigen::Ref<Eigen::MatrixXd> X) const {
  const Eigen::Index n = size();
  X.row(n - 1) /= l_diag_(n - 1);
  for (Eigen::Index i = n - 2; i >= 0; --i) {
    X.row(i) -= l_sub_(i) * X.row(i + 1);
    X.row(i) /= l_diag_(i);
  }
}

Eigen::VectorXd TridiagCholesky::apply_upper(const Eigen::VectorXd& x) const {
  const Eigen::Index n = size();
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = l_diag_(i) * x(i);
    if (i + 1 < n) y(i) += l_sub_(i) * x(i + 1);
  }
  return y;
}

ComplexTridiagLU::ComplexTridiagLU(const Eigen::VectorXcd& diag, const Eigen::VectorXcd& off)
    : d_(diag), l_(Eigen::VectorXcd::Zero(off.size())), off_(off) {
  const Eigen::Index n = diag.size();
  for (Eigen::Index i = 1; i < n; ++i) {
    if (std::abs(d_(i - 1)) == 0.0) throw LinearAlgebraError("complex tridiagonal LU: zero pivot");
    l_(i - 1) = off_(i - 1) / d_(i - 1);
    d_(i) -= l_(i - 1) * off_(i - 1);
  }
}

Eigen::VectorXcd ComplexTridiagLU::solve(const Eigen::VectorXcd& b) const {
  const Eigen::Index n = d_.size();
  Eigen::VectorXcd x = b;
  for (Eigen::Index i = 1; i < n; ++i) x(i) -= l_(i - 1) * x(i - 1);
  x(n - 1) /= d_(n - 1);
  for (Eigen::Index i = n - 2; i >= 0; --i) x(i) = (x(i) - off_(i) * x(i + 1)) / d_(i);
  return x;
}

int count_below(const SymTridiag& A, const SymTridiag& B, double sigma) {
  const Eigen::Index n = A.size();
  int negatives = 0;
  double d = 0.0;
  constexpr double tiny = std::numeric_limits<double>::min() * 1e4;
  for (Eigen::Index i = 0; i < n; ++i) {
    double c = A.diag(i) - sigma * B.diag(i);
    if (i > 0) {
      const double e = A.off(i - 1) - sigma * B.off(i - 1);
      c -= e * e / d;
    }
    if (c == 0.0) c = -tiny;
    if (c < 0.0) ++negatives;
    d = c;
  }
  return negatives;
}

Eigen::VectorXd solve_shifted(const SymTridiag& A, const SymTridiag& B, double sigma,
                              const Eigen::VectorXd& b) {
  const lapack_int n = static_cast<lapack_int>(A.size());
  std::vector<double> dl(static_cast<std::size_t>(n - 1)), d(static_cast<std::size_t>(n)),
      du(static_cast<std::size_t>(n - 1));
  for (lapack_int i = 0; i < n; ++i) d[i] = A.diag(i) - sigma * B.diag(i);
  for (lapack_int i = 0; i + 1 < n; ++i) dl[i] = du[i] = A.off(i) - sigma * B.off(i);
  Eigen::VectorXd x = b;
  const lapack_int info = LAPACKE_dgtsv(LAPACK_COL_MAJOR, n, 1, dl.data(), d.data(), du.data(), x.data(), n);
  if (info != 0) throw LinearAlgebraError("dgtsv failed (info=" + std::to_string(info) + ")");
  return x;
}

}  // namespace splab
