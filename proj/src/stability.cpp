#include "splab/stability.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

#include "splab/errors.hpp"
#include "splab/lapack.hpp"

namespace splab {

namespace {

bool same_nodes(const RadialMesh& a, const RadialMesh& b) {
  const auto x = a.nodes(), y = b.nodes();
  return x.size() == y.size() && std::equal(x.begin(), x.end(), y.begin());
}

void add_tridiag(std::vector<Eigen::Triplet<double>>& t, const SymTridiag& A, Eigen::Index n_rows, Eigen::Index n_cols,
                 Eigen::Index row0, Eigen::Index col0, double scale) {
  for (Eigen::Index i = 0; i < std::min(n_rows, A.size()); ++i) {
    for (Eigen::Index j = std::max<Eigen::Index>(0, i - 1); j <= std::min(A.size() - 1, i + 1); ++j) {
      if (j >= n_cols) continue;
      const double v = (i == j) ? A.diag(i) : A.off(std::min(i, j));
      t.emplace_back(static_cast<int>(row0 + i), static_cast<int>(col0 + j), scale * v);
    }
  }
}

// M = R Rᵀ; returns R⁻¹ L R⁻ᵀ for symmetric L.
Eigen::MatrixXd to_standard_form(const TridiagCholesky& R, Eigen::MatrixXd L) {
  R.solve_lower_inplace(L);
  L.transposeInPlace();
  R.solve_lower_inplace(L);
  return 0.5 * (L + L.transpose());
}

// Householder reflector H = I - 2vvᵀ with H q ∝ e₁; columns 1.. of H span q^⊥.
Eigen::VectorXd householder_vector(const Eigen::VectorXd& q) {
  Eigen::VectorXd v = q / q.norm();
  v(0) += (v(0) >= 0.0 ? 1.0 : -1.0);
  return v / v.norm();
}

// rows 1.. and columns 1.. of H_a X H_b
Eigen::MatrixXd compress(const Eigen::MatrixXd& X, const Eigen::VectorXd& va, const Eigen::VectorXd& vb) {
  Eigen::MatrixXd Y = X;
  // left: H_a Y
  const Eigen::RowVectorXd ra = va.transpose() * Y;
  Y.noalias() -= 2.0 * va * ra;
  // right: Y H_b
  const Eigen::VectorXd cb = Y * vb;
  Y.noalias() -= 2.0 * cb * vb.transpose();
  const Eigen::Index n = X.rows();
  return Y.bottomRightCorner(n - 1, n - 1);
}

struct StandardBlocks {
  Eigen::MatrixXd A;  // acts as L₋ on the deflated space
  Eigen::MatrixXd B;  // acts as L₊
  bool deflated = false;
};

StandardBlocks standard_blocks(const LinearizationMatrices& lin) {
  const TridiagCholesky R(lin.M);
  Eigen::MatrixXd Lm = to_standard_form(R, lin.L_minus.dense());
  Eigen::MatrixXd Lp = to_standard_form(R, lin.L_plus());
  StandardBlocks out;
  if (lin.u.norm() == 0.0) {
    out.A = std::move(Lm);
    out.B = std::move(Lp);
    return out;
  }
  const Eigen::VectorXd ut = R.apply_upper(lin.u);
  const Eigen::VectorXd yt = lu_solve(Lp, ut);
  const Eigen::VectorXd va = householder_vector(ut);
  const Eigen::VectorXd vb = householder_vector(yt);
  out.A = compress(Lm, va, vb);
  out.B = compress(Lp, vb, va);
  out.deflated = true;
  return out;
}

}  // namespace

FemBoundState polish_fem_state(const AssembledOperators& ops, const BoundState& guess, double tol,
                               int max_iterations) {
  const Eigen::Index nn = ops.nodes();
  const Eigen::Index n = ops.interior();
  Eigen::VectorXd u;
  if (same_nodes(ops.mesh, guess.mesh))
    u = guess.u;
  else
    u = interpolate_hermite(guess.mesh, guess.u, guess.v, ops.mesh.nodes());
  u(nn - 1) = 0.0;
  const double E = guess.E;
  const SymTridiag A = ops.K_full + ops.V_full + E * ops.M_full;

  FemBoundState out;
  out.E = E;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  double previous = INFINITY;
  for (int it = 0;; ++it) {
    const Eigen::VectorXd w = hartree_potential(ops, u);
    const SymTridiag Uw = weighted_overlap(ops.mesh, w);
    const Eigen::VectorXd F = ((A * u) - (Uw * u)).head(n);
    SymTridiag absA = A - Uw;
    absA.diag = absA.diag.cwiseAbs();
    absA.off = absA.off.cwiseAbs();
    const double res = F.cwiseAbs().maxCoeff() / (absA * Eigen::VectorXd(u.cwiseAbs())).maxCoeff();
    if (!std::isfinite(res)) throw ConvergenceError("FEM bound-state polish produced a non-finite residual", res);
    // converged, or stagnating at the rounding floor
    if (res < tol || (res < 1e-10 && res > 0.5 * previous)) {
      out.u = u;
      out.w = w;
      out.residual = res;
      break;
    }
    if (it >= max_iterations) throw ConvergenceError("FEM bound-state polish did not converge", res);
    previous = res;
    // [[L₋, -U_{I,:}], [-2U_{:,I}, K_rob]] [δu_I; δw] = [-F; 0]
    const SymTridiag Uu = weighted_overlap(ops.mesh, u);
    const SymTridiag Lm = (A - Uw).leading(n);
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(15 * nn));
    add_tridiag(t, Lm, n, n, 0, 0, 1.0);
    add_tridiag(t, Uu, n, nn, 0, n, -1.0);
    add_tridiag(t, Uu, nn, n, n, 0, -2.0);
    add_tridiag(t, ops.K_rob, nn, nn, n, n, 1.0);
    Eigen::SparseMatrix<double> J(n + nn, n + nn);
    J.setFromTriplets(t.begin(), t.end());
    lu.compute(J);
    if (lu.info() != Eigen::Success) throw SingularJacobianError("FEM bound-state polish: singular Jacobian", res);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + nn);
    rhs.head(n) = -F;
    const Eigen::VectorXd d = lu.solve(rhs);
    u.head(n) += d.head(n);
  }
  out.branch = count_zero_crossings(out.u);
  return out;
}

Eigen::MatrixXd assemble_T(const AssembledOperators& ops, const Eigen::VectorXd& u) {
  const Eigen::Index nn = ops.nodes();
  const Eigen::Index n = ops.interior();
  const SymTridiag U = weighted_overlap(ops.mesh, u);
  // X = K_rob⁻¹ U_{:,I}
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(nn, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    X(j, j) = U.diag(j);
    if (j > 0) X(j - 1, j) = U.off(j - 1);
    X(j + 1, j) = U.off(j);
  }
  ops.K_rob_factor.solve_lower_inplace(X);
  ops.K_rob_factor.solve_upper_inplace(X);
  Eigen::MatrixXd T(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    T.row(i) = U.diag(i) * X.row(i) + U.off(i) * X.row(i + 1);
    if (i > 0) T.row(i) += U.off(i - 1) * X.row(i - 1);
  }
  return 0.5 * (T + T.transpose());
}

Eigen::MatrixXd LinearizationMatrices::L_plus() const { return L_minus.dense() - 2.0 * T; }

LinearizationMatrices linearize(const AssembledOperators& ops, const Eigen::VectorXd& u, double E) {
  const Eigen::Index n = ops.interior();
  if (u.size() != ops.nodes()) throw DomainError("linearize: state does not live on this mesh");
  LinearizationMatrices lin;
  const Eigen::VectorXd w = hartree_potential(ops, u);
  lin.L_minus = (ops.K_full + ops.V_full + E * ops.M_full - weighted_overlap(ops.mesh, w)).leading(n);
  lin.M = ops.M_dir();
  lin.T = assemble_T(ops, u);
  lin.u = u.head(n);
  lin.E = E;
  return lin;
}

LinearizationMatrices linearize(const AssembledOperators& ops, const FemBoundState& s) {
  return linearize(ops, s.u, s.E);
}

LpmSpectrum spectra_Lpm(const LinearizationMatrices& lin) {
  LpmSpectrum out;
  const Eigen::MatrixXd M = lin.M.dense();
  out.minus = generalized_symmetric_eigenvalues(lin.L_minus.dense(), M);
  out.plus = generalized_symmetric_eigenvalues(lin.L_plus(), M);
  out.n_minus = static_cast<int>((out.minus.array() < kNegativeThreshold).count());
  out.n_plus = static_cast<int>((out.plus.array() < kNegativeThreshold).count());
  out.min_abs_plus = out.plus.cwiseAbs().minCoeff();
  out.norm_plus = out.plus.cwiseAbs().maxCoeff();
  out.kernel_warning = out.min_abs_plus <= 1e-8 * out.norm_plus;
  return out;
}

NegativeCounts negative_counts(const LinearizationMatrices& lin) {
  NegativeCounts c;
  c.n_minus = count_below(lin.L_minus, lin.M, kNegativeThreshold);
  Eigen::MatrixXd shifted = lin.L_plus() - kNegativeThreshold * lin.M.dense();
  c.n_plus = symmetric_inertia(std::move(shifted)).negative;
  return c;
}

void analyze_JL(JLSpectrum& spec, double E, const JLOptions& opts) {
  const double rtol = opts.real_tol >= 0.0 ? opts.real_tol : unstable_threshold(E);
  const double itol = opts.imag_tol;
  const auto& ev = spec.eigenvalues;
  spec.sigma_max = 0.0;
  spec.quartets.clear();
  spec.real_pairs.clear();
  for (const auto& l : ev) {
    spec.sigma_max = std::max(spec.sigma_max, l.real());
    if (l.real() > rtol && l.imag() > itol) spec.quartets.push_back({l});
    if (l.real() > rtol && std::abs(l.imag()) <= itol) spec.real_pairs.push_back(l.real());
  }
  std::sort(spec.real_pairs.begin(), spec.real_pairs.end());

  auto nearest = [&](std::complex<double> z) {
    double best = INFINITY;
    for (const auto& l : ev) best = std::min(best, std::abs(l - z));
    return best;
  };
  spec.symmetry_error = 0.0;
  for (const auto& l : ev) {
    const double e = std::max({nearest(-l), nearest(std::conj(l)), nearest(-std::conj(l))});
    spec.symmetry_error = std::max(spec.symmetry_error, e);
  }
}

JLSpectrum spectrum_JL(const LinearizationMatrices& lin, const JLOptions& opts) {
  const StandardBlocks b = standard_blocks(lin);
  const Eigen::Index m = b.A.rows();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  J.topRightCorner(m, m) = b.A;
  J.bottomLeftCorner(m, m) = -b.B;
  JLSpectrum spec;
  spec.eigenvalues = general_eigenvalues(std::move(J));
  spec.deflated = b.deflated;
  analyze_JL(spec, lin.E, opts);
  return spec;
}

JLSpectrum spectrum_JL_reduced(const LinearizationMatrices& lin, double trusted_radius, const JLOptions& opts) {
  const StandardBlocks b = standard_blocks(lin);
  // λ⁻² are the eigenvalues of -(AB)⁻¹ = -B⁻¹A⁻¹
  Eigen::MatrixXd C = -lu_solve(b.B, lu_inverse(b.A));
  const auto mu = general_eigenvalues(std::move(C));
  JLSpectrum spec;
  spec.deflated = b.deflated;
  spec.reduced = true;
  spec.trusted_radius = trusted_radius;
  for (const auto& x : mu) {
    if (std::abs(x) == 0.0) continue;
    const std::complex<double> l = 1.0 / std::sqrt(x);
    if (std::abs(l) > trusted_radius) continue;
    spec.eigenvalues.push_back(l);
    spec.eigenvalues.push_back(-l);
  }
  analyze_JL(spec, lin.E, opts);
  return spec;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::OrbitallyStable: return "orbitally-stable";
    case Verdict::OrbitallyUnstable: return "orbitally-unstable";
    case Verdict::LinearlyUnstable: return "linearly-unstable";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

Verdict classify(int n_minus, int n_plus, int p, double sigma_max, double E) {
  if (n_minus < 0 || n_plus < 0 || (p != 0 && p != 1)) throw DomainError("classify: invalid counts");
  const int nL = n_minus + n_plus;
  if (nL == p) return Verdict::OrbitallyStable;
  if ((nL - p) % 2 != 0) return Verdict::OrbitallyUnstable;
  return sigma_max > unstable_threshold(E) ? Verdict::LinearlyUnstable : Verdict::Inconclusive;
}

UnstableBound unstable_bound(const BoundState& s, const PotentialNorms& norms, const BoundConstants& c) {
  UnstableBound out;
  out.constants = c;
  const RadialMesh& mesh = s.mesh;
  double kinetic = 0.0, mass = 0.0, cubic = 0.0;
  for (std::size_t e = 0; e < mesh.elements(); ++e) {
    const double a = mesh[e], h = mesh.width(e);
    const auto i = static_cast<Eigen::Index>(e);
    for (int g = 0; g < 3; ++g) {
      const double t = 0.5 * (Gauss3::x[g] + 1.0);
      const double r = a + t * h;
      const double wt = 0.5 * h * Gauss3::w[g] * r * r;
      const double u = (1 + 2 * t) * (1 - t) * (1 - t) * s.u(i) + t * (1 - t) * (1 - t) * h * s.v(i) +
                       t * t * (3 - 2 * t) * s.u(i + 1) + t * t * (t - 1) * h * s.v(i + 1);
      const double du = (6 * t * t - 6 * t) / h * s.u(i) + (3 * t * t - 4 * t + 1) * s.v(i) +
                        (6 * t - 6 * t * t) / h * s.u(i + 1) + (3 * t * t - 2 * t) * s.v(i + 1);
      kinetic += wt * du * du;
      mass += wt * u * u;
      cubic += wt * std::abs(u) * u * u;
    }
  }
  constexpr double four_pi = 4.0 * M_PI;
  out.hls = c.C_HLS / four_pi * std::pow(four_pi * cubic, 2.0 / 3.0);
  out.gradient_form = c.C_HLS * c.C_GN * std::sqrt(kinetic * mass);
  out.bound = c.C_HLS * c.C_GN * mass *
              std::sqrt(s.E / 3.0 + norms.sup_abs_V / 3.0 + 2.0 * norms.sup_abs_rdV / 3.0);
  return out;
}

}  // namespace splab
