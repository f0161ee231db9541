#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <cstddef>

namespace splab {

/// Symmetric tridiagonal matrix: the storage of every P1 operator assembled
/// in the hat-function basis.
struct SymTridiag {
  Eigen::VectorXd diag;
  Eigen::VectorXd off;  // off(i) couples rows i and i+1

  SymTridiag() = default;
  explicit SymTridiag(Eigen::Index n) : diag(Eigen::VectorXd::Zero(n)), off(Eigen::VectorXd::Zero(n > 0 ? n - 1 : 0)) {}

  Eigen::Index size() const noexcept { return diag.size(); }

  Eigen::VectorXd operator*(const Eigen::VectorXd& x) const;
  Eigen::VectorXcd operator*(const Eigen::VectorXcd& x) const;
  double quad(const Eigen::VectorXd& x) const { return x.dot((*this) * x); }

  /// Leading k×k block (realizes the interior selection I^{k,n}).
  SymTridiag leading(Eigen::Index k) const;

  Eigen::MatrixXd dense() const;
  Eigen::SparseMatrix<double> sparse() const;

  SymTridiag& operator+=(const SymTridiag& o);
  SymTridiag& operator-=(const SymTridiag& o);
  SymTridiag& operator*=(double s);
};

SymTridiag operator+(SymTridiag a, const SymTridiag& b);
SymTridiag operator-(SymTridiag a, const SymTridiag& b);
SymTridiag operator*(double s, SymTridiag a);

/// Cholesky factorization of a symmetric positive definite tridiagonal matrix.
class TridiagCholesky {
 public:
  TridiagCholesky() = default;
  explicit TridiagCholesky(const SymTridiag& A);

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  /// Applies R^{-1} and R^{-T} where A = R Rᵀ, R lower bidiagonal.
  void solve_lower_inplace(Eigen::Ref<Eigen::MatrixXd> X) const;
  void solve_upper_inplace(Eigen::Ref<Eigen::MatrixXd> X) const;
  /// x ↦ Rᵀ x.
  Eigen::VectorXd apply_upper(const Eigen::VectorXd& x) const;
  Eigen::Index size() const noexcept { return l_diag_.size(); }

 private:
  Eigen::VectorXd l_diag_;
  Eigen::VectorXd l_sub_;
};

/// LU of a (complex) tridiagonal matrix without pivoting. Safe for matrices
/// whose Hermitian part is definite, e.g. M + iτA with M SPD and A real symmetric.
class ComplexTridiagLU {
 public:
  ComplexTridiagLU() = default;
  ComplexTridiagLU(const Eigen::VectorXcd& diag, const Eigen::VectorXcd& off);
  Eigen::VectorXcd solve(const Eigen::VectorXcd& b) const;

 private:
  Eigen::VectorXcd d_;    // pivots
  Eigen::VectorXcd l_;    // multipliers
  Eigen::VectorXcd off_;  // superdiagonal (= subdiagonal, symmetric)
};

/// Number of eigenvalues of the pencil (A, B) strictly below sigma
/// (Sylvester inertia of A - σB via the LDLᵀ pivot signs). B must be SPD.
int count_below(const SymTridiag& A, const SymTridiag& B, double sigma);

/// Solves the general tridiagonal system (A - σB)x = b with partial pivoting.
Eigen::VectorXd solve_shifted(const SymTridiag& A, const SymTridiag& B, double sigma,
                              const Eigen::VectorXd& b);

}  // namespace splab
