#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "splab/bvp.hpp"
#include "splab/fem.hpp"
#include "splab/potential.hpp"

namespace splab {

/// Bound state of the Galerkin problem
///   (K + V + E M) u - U(w) u = 0 on the interior nodes,  K_rob w = U(u) u,
/// with u(r_max) = 0.
struct FemBoundState {
  Eigen::VectorXd u;  // all nodes
  Eigen::VectorXd w;  // all nodes
  double E = 0.0;
  int branch = 0;
  double residual = 0.0;  // max |F| / max (|L₋| |u|)
};

/// Newton iteration at fixed E on the Galerkin equations, started from the
/// collocation state (Hermite-interpolated onto the FEM nodes). After
/// convergence L₋u = 0 holds to rounding, which the JL deflation relies on.
FemBoundState polish_fem_state(const AssembledOperators& ops, const BoundState& guess, double tol = 1e-14,
                               int max_iterations = 30);

/// T = I U K_rob⁻¹ U I with U = weighted_overlap(u): dense, symmetric, PSD.
Eigen::MatrixXd assemble_T(const AssembledOperators& ops, const Eigen::VectorXd& u);

struct LinearizationMatrices {
  SymTridiag L_minus;  // K + V + E M - U(w), Dirichlet block
  SymTridiag M;        // Dirichlet mass matrix
  Eigen::MatrixXd T;
  Eigen::VectorXd u;  // interior values of the state
  double E = 0.0;

  Eigen::Index size() const noexcept { return M.size(); }
  Eigen::MatrixXd L_plus() const;  // L_minus - 2T
};

LinearizationMatrices linearize(const AssembledOperators& ops, const FemBoundState& s);
LinearizationMatrices linearize(const AssembledOperators& ops, const Eigen::VectorXd& u, double E);

inline constexpr double kNegativeThreshold = -1e-10;

struct LpmSpectrum {
  Eigen::VectorXd minus;  // generalized eigenvalues vs M, ascending
  Eigen::VectorXd plus;
  int n_minus = 0;
  int n_plus = 0;
  double min_abs_plus = 0.0;
  double norm_plus = 0.0;
  bool kernel_warning = false;  // min |eig(L₊)| <= 1e-8·‖L₊‖
};

/// Full generalized symmetric eigensolves; negative counts below kNegativeThreshold.
LpmSpectrum spectra_Lpm(const LinearizationMatrices& lin);

struct NegativeCounts {
  int n_minus = 0;
  int n_plus = 0;
};

/// The same counts by Sylvester inertia of L - threshold·M (tridiagonal Sturm
/// for L₋, Bunch-Kaufman for L₊), for meshes where full eigensolves are costly.
NegativeCounts negative_counts(const LinearizationMatrices& lin);

struct Quartet {
  std::complex<double> lambda;  // representative with Re > 0, Im > 0
};

struct JLSpectrum {
  std::vector<std::complex<double>> eigenvalues;
  double sigma_max = 0.0;
  std::vector<Quartet> quartets;
  std::vector<double> real_pairs;  // positive members of purely real pairs
  double symmetry_error = 0.0;     // max distance from λ to the nearest of -λ, λ̄, -λ̄
  bool deflated = false;
  bool reduced = false;
  double trusted_radius = INFINITY;  // eigenvalues beyond this magnitude are not reliable
};

struct JLOptions {
  double real_tol = -1.0;  // |Re λ| above this counts as nonzero; < 0 selects 1e-5·(1 + E)
  double imag_tol = 1e-6;  // |Im λ| above this counts as nonzero
};

/// Eigenvalues of [[0, L₋], [-L₊, 0]] v = λ diag(M, M) v. The pencil is reduced
/// to standard form with the Cholesky factor of M and, when u ≠ 0, restricted
/// to the symplectic complement of the phase-symmetry Jordan chain; the
/// remaining 2(n-1)-dimensional real matrix goes to a dense QR eigensolver.
JLSpectrum spectrum_JL(const LinearizationMatrices& lin, const JLOptions& opts = {});

/// Eigenvalues near the origin from λ⁻² = eig(-(L₊⁻¹ L₋⁻¹)) on the deflated
/// space (dimension n-1). Accurate for |λ| up to `trusted_radius`; larger
/// eigenvalues are dropped.
JLSpectrum spectrum_JL_reduced(const LinearizationMatrices& lin, double trusted_radius = 10.0,
                               const JLOptions& opts = {});

/// Fills sigma_max, quartets, real pairs and the symmetry error from the eigenvalue list.
void analyze_JL(JLSpectrum& spec, double E, const JLOptions& opts = {});

enum class Verdict { OrbitallyStable, OrbitallyUnstable, LinearlyUnstable, Inconclusive };
std::string to_string(Verdict v);

inline double unstable_threshold(double E) { return 1e-5 * (1.0 + E); }

/// Stability by the negative-count criterion, falling back to the measured
/// σ_max when n(L) - p is a nonzero even number.
Verdict classify(int n_minus, int n_plus, int p, double sigma_max, double E);

struct BoundConstants {
  double C_HLS = 2.2940;   // sharp constant for the |x|⁻¹ kernel (6/5, 6/5 exponents)
  double C_GN = 0.42705;   // ‖u‖²_{L³} <= C ‖∇u‖ ‖u‖ via the sharp Sobolev constant
};

struct UnstableBound {
  double bound = 0.0;          // C_HLS C_GN ‖u‖² √(E/3 + ‖V‖/3 + 2‖rV'‖/3)
  double hls = 0.0;            // C_HLS ‖u‖²_{L³}
  double gradient_form = 0.0;  // C_HLS C_GN ‖∇u‖ ‖u‖
  BoundConstants constants;
};

/// All norms in the radial measure r² dr; the 4π of the three-dimensional
/// norms cancels against the Green's function normalization of the Hartree term.
UnstableBound unstable_bound(const BoundState& s, const PotentialNorms& norms, const BoundConstants& c = {});

}  // namespace splab
