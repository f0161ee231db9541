#include "splab/evolution.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <complex>

#include "splab/errors.hpp"

namespace splab {

namespace {

using cd = std::complex<double>;

// |A|·|x|, the natural scale of the rounding error in A x
Eigen::VectorXd abs_product(const SymTridiag& A, const Eigen::VectorXd& x) {
  SymTridiag B = A;
  B.diag = B.diag.cwiseAbs();
  B.off = B.off.cwiseAbs();
  return B * Eigen::VectorXd(x.cwiseAbs());
}

// Newton on [[J_uu, J_uw], [-2 M_L U, K_rob]] [δu; δw] = [-G; 0] for the
// interior unknowns u and the Hartree potential w on all nodes.
template <class Residual, class Blocks>
Eigen::VectorXd newton_with_poisson(const EvolutionSystem& sys, Eigen::VectorXd u, double tol, int max_iterations,
                                    Residual residual, Blocks blocks, const char* what) {
  const AssembledOperators& ops = sys.ops();
  const Eigen::Index nn = ops.nodes();
  const Eigen::Index n = ops.interior();
  const Eigen::VectorXd& ml = sys.lumped_mass();
  u(nn - 1) = 0.0;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  double previous = INFINITY;
  for (int it = 0;; ++it) {
    const Eigen::VectorXd w = ops.K_rob_factor.solve(ml.cwiseProduct(u.cwiseAbs2()));
    double scale = 0.0;
    const Eigen::VectorXd G = residual(u, w, scale);
    const double res = G.cwiseAbs().maxCoeff() / scale;
    if (!std::isfinite(res)) throw ConvergenceError(std::string(what) + ": non-finite residual", res);
    if (res < tol || (res < 1e-10 && res > 0.5 * previous)) break;  // converged or at the rounding floor
    if (it >= max_iterations) throw ConvergenceError(std::string(what) + ": no convergence", res);
    previous = res;
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(12 * nn));
    blocks(u, w, t);  // rows 0..n-1
    for (Eigen::Index i = 0; i < nn; ++i) {
      t.emplace_back(static_cast<int>(n + i), static_cast<int>(n + i), ops.K_rob.diag(i));
      if (i + 1 < nn) {
        t.emplace_back(static_cast<int>(n + i), static_cast<int>(n + i + 1), ops.K_rob.off(i));
        t.emplace_back(static_cast<int>(n + i + 1), static_cast<int>(n + i), ops.K_rob.off(i));
      }
      if (i < n) t.emplace_back(static_cast<int>(n + i), static_cast<int>(i), -2.0 * ml(i) * u(i));
    }
    Eigen::SparseMatrix<double> J(n + nn, n + nn);
    J.setFromTriplets(t.begin(), t.end());
    lu.compute(J);
    if (lu.info() != Eigen::Success) throw SingularJacobianError(std::string(what) + ": singular Jacobian", res);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + nn);
    rhs.head(n) = -G;
    const Eigen::VectorXd d = lu.solve(rhs);
    u.head(n) += d.head(n);
  }
  return u;
}

}  // namespace

EvolutionSystem::EvolutionSystem(const RadialMesh& mesh, const Potential& V, double dt)
    : ops_(assemble(mesh, V)), dt_(dt) {
  if (!(dt > 0.0)) throw ConfigError("time step dt must be > 0");
  const Eigen::Index nn = ops_.nodes();
  lumped_ = ops_.M_full.diag;
  lumped_.head(nn - 1) += ops_.M_full.off;
  lumped_.tail(nn - 1) += ops_.M_full.off;
  A_ = ops_.K_dir() + ops_.V_dir();
  const double tau = 0.5 * dt_;
  const Eigen::Index n = ops_.interior();
  Eigen::VectorXcd d(n), o(n - 1);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = cd(lumped_(i), tau * A_.diag(i));
  for (Eigen::Index i = 0; i + 1 < n; ++i) o(i) = cd(0.0, tau * A_.off(i));
  cn_ = ComplexTridiagLU(d, o);
}

Eigen::VectorXd EvolutionSystem::hartree(const Eigen::VectorXcd& phi) const {
  return ops_.K_rob_factor.solve(lumped_.cwiseProduct(phi.cwiseAbs2()));
}

void EvolutionSystem::phase_step(Eigen::VectorXcd& phi, double tau) const {
  const Eigen::VectorXd w = hartree(phi);
  for (Eigen::Index i = 0; i < phi.size(); ++i) phi(i) *= std::polar(1.0, tau * w(i));
}

void EvolutionSystem::linear_step(Eigen::VectorXcd& phi, bool backward) const {
  const Eigen::Index n = ops_.interior();
  const double tau = 0.5 * dt_;
  const Eigen::VectorXcd x = phi.head(n);
  const Eigen::VectorXcd Ax = A_ * x;
  const cd s = backward ? cd(0.0, tau) : cd(0.0, -tau);
  Eigen::VectorXcd rhs = lumped_.head(n).cwiseProduct(x) + s * Ax;
  if (!backward)
    phi.head(n) = cn_.solve(rhs);
  else
    phi.head(n) = cn_.solve(rhs.conjugate()).conjugate();
  phi(n) = 0.0;
}

void EvolutionSystem::strang_step(Eigen::VectorXcd& phi) const {
  phase_step(phi, 0.5 * dt_);
  linear_step(phi);
  phase_step(phi, 0.5 * dt_);
}

double EvolutionSystem::mass(const Eigen::VectorXcd& phi) const { return lumped_.dot(phi.cwiseAbs2()); }

double EvolutionSystem::energy(const Eigen::VectorXcd& phi) const {
  const Eigen::Index n = ops_.interior();
  const Eigen::VectorXcd x = phi.head(n);
  const double lin = x.dot(A_ * x).real();
  const Eigen::VectorXd s = lumped_.cwiseProduct(phi.cwiseAbs2());
  return lin - 0.5 * s.dot(ops_.K_rob_factor.solve(s));
}

std::optional<std::string> ic_resolution_warning(const RadialMesh& mesh) {
  if (mesh.r_max() <= 10.0) return "evolution domain does not contain the perturbation center r = 10";
  const std::size_t e = mesh.locate(10.0);
  if (mesh.width(e) > 0.25)
    return "evolution mesh spacing near r = 10 exceeds 0.25; the perturbation is under-resolved";
  return std::nullopt;
}

EvolutionField perturbed_ic(const RadialMesh& mesh, const Eigen::VectorXd& u, double eps) {
  if (u.size() != static_cast<Eigen::Index>(mesh.size())) throw DomainError("perturbed_ic: profile size mismatch");
  if (!(eps >= 0.0)) throw ConfigError("perturbation amplitude eps must be >= 0");
  EvolutionField f;
  f.phi = u.cast<cd>();
  if (eps > 0.0)
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      const double d = mesh[static_cast<std::size_t>(i)] - 10.0;
      f.phi(i) += eps * std::exp(-4.0 * d * d);
    }
  f.phi(u.size() - 1) = 0.0;
  return f;
}

Eigen::VectorXd polish_semidiscrete_state(const EvolutionSystem& sys, Eigen::VectorXd u, double E, double tol,
                                          int max_iterations) {
  const Eigen::Index n = sys.ops().interior();
  const SymTridiag& A = sys.hamiltonian();
  const Eigen::VectorXd ml = sys.lumped_mass().head(n);
  auto residual = [&](const Eigen::VectorXd& uu, const Eigen::VectorXd& w, double& scale) {
    const Eigen::VectorXd x = uu.head(n);
    const Eigen::VectorXd Ax = A * x;
    scale = abs_product(A, x).maxCoeff();
    return Eigen::VectorXd(Ax + ml.cwiseProduct((E - w.head(n).array()).matrix().cwiseProduct(x)));
  };
  auto blocks = [&](const Eigen::VectorXd& uu, const Eigen::VectorXd& w, std::vector<Eigen::Triplet<double>>& t) {
    for (Eigen::Index i = 0; i < n; ++i) {
      t.emplace_back(static_cast<int>(i), static_cast<int>(i), A.diag(i) + ml(i) * (E - w(i)));
      if (i + 1 < n) {
        t.emplace_back(static_cast<int>(i), static_cast<int>(i + 1), A.off(i));
        t.emplace_back(static_cast<int>(i + 1), static_cast<int>(i), A.off(i));
      }
      t.emplace_back(static_cast<int>(i), static_cast<int>(n + i), -ml(i) * uu(i));
    }
  };
  return newton_with_poisson(sys, std::move(u), tol, max_iterations, residual, blocks, "semi-discrete polish");
}

Eigen::VectorXd polish_strang_state(const EvolutionSystem& sys, Eigen::VectorXd u, double E, double tol,
                                    int max_iterations) {
  const Eigen::Index n = sys.ops().interior();
  const SymTridiag& A = sys.hamiltonian();
  const Eigen::VectorXd ml = sys.lumped_mass().head(n);
  const double tau = 0.5 * sys.dt();
  // G/τ = M_L sin(τ(w - E)) u / τ - A cos(τ(w - E)) u
  auto residual = [&](const Eigen::VectorXd& uu, const Eigen::VectorXd& w, double& scale) {
    const Eigen::ArrayXd ph = tau * (w.head(n).array() - E);
    const Eigen::ArrayXd x = uu.head(n).array();
    const Eigen::VectorXd cu = (ph.cos() * x).matrix();
    const Eigen::VectorXd Acu = A * cu;
    scale = abs_product(A, cu).maxCoeff();
    return Eigen::VectorXd((ml.array() * ph.sin() * x / tau).matrix() - Acu);
  };
  auto blocks = [&](const Eigen::VectorXd& uu, const Eigen::VectorXd& w, std::vector<Eigen::Triplet<double>>& t) {
    const Eigen::ArrayXd ph = tau * (w.head(n).array() - E);
    const Eigen::ArrayXd s = ph.sin(), c = ph.cos();
    const Eigen::ArrayXd x = uu.head(n).array();
    for (Eigen::Index i = 0; i < n; ++i) {
      // ∂/∂u_j: M_L s/τ δ_ij - A_ij c_j ; ∂/∂w_j: M_L c u δ_ij + τ A_ij s_j u_j
      for (Eigen::Index j = std::max<Eigen::Index>(0, i - 1); j <= std::min(n - 1, i + 1); ++j) {
        const double a = (i == j) ? A.diag(i) : A.off(std::min(i, j));
        double du = -a * c(j), dw = tau * a * s(j) * x(j);
        if (i == j) {
          du += ml(i) * s(i) / tau;
          dw += ml(i) * c(i) * x(i);
        }
        t.emplace_back(static_cast<int>(i), static_cast<int>(j), du);
        t.emplace_back(static_cast<int>(i), static_cast<int>(n + j), dw);
      }
    }
  };
  return newton_with_poisson(sys, std::move(u), tol, max_iterations, residual, blocks, "Strang-map polish");
}

EvolutionResult evolve(const EvolutionSystem& sys, EvolutionField field, const EvolveOptions& opts) {
  if (!(opts.t_final > 0.0)) throw ConfigError("t_final must be > 0");
  if (opts.snapshot_stride < 1 || opts.trace_stride < 1) throw ConfigError("strides must be >= 1");
  const RadialMesh& mesh = sys.mesh();
  const Eigen::Index nn = static_cast<Eigen::Index>(mesh.size());
  if (field.phi.size() != nn) throw DomainError("evolve: field does not live on the evolution mesh");

  EvolutionResult res;
  res.sample_radii = opts.sample_radii;
  if (res.sample_radii.empty()) {
    const double top = std::min(mesh.r_max(), 100.0);
    for (int i = 0; i < 512; ++i) res.sample_radii.push_back(top * i / 511.0);
  }
  if (auto w = ic_resolution_warning(mesh)) res.warnings.push_back(*w);

  const Eigen::VectorXd mod0 = field.phi.cwiseAbs();
  res.initial_peak = mod0.maxCoeff();
  const double m0 = sys.mass(field.phi);
  const double h0 = sys.energy(field.phi);
  bool boundary_warned = false;

  auto record = [&](const Eigen::VectorXcd& phi, double t, bool trace_row, bool snap) {
    const double m = sys.mass(phi), h = sys.energy(phi);
    const double bmag = std::abs(phi(nn - 2));
    res.trace.max_mass_drift = std::max(res.trace.max_mass_drift, std::abs(m - m0) / std::abs(m0));
    res.trace.max_energy_drift = std::max(res.trace.max_energy_drift, std::abs(h - h0) / std::abs(h0));
    if (trace_row) {
      res.trace.t.push_back(t);
      res.trace.mass.push_back(m);
      res.trace.energy.push_back(h);
      res.trace.boundary_mag.push_back(bmag);
    }
    const Eigen::VectorXd mod = phi.cwiseAbs();
    if (!boundary_warned && bmag > 1e-6 * mod.maxCoeff()) {
      res.warnings.push_back("boundary magnitude exceeded 1e-6 of the peak at t = " + std::to_string(t));
      boundary_warned = true;
    }
    if (snap) {
      const Eigen::VectorXd s = interpolate_linear(mesh, mod, res.sample_radii);
      res.snapshot_t.push_back(t);
      res.snapshots.emplace_back(s.data(), s.data() + s.size());
    }
  };
  record(field.phi, field.t, true, true);

  const long steps = std::lround(opts.t_final / sys.dt());
  for (long k = 1; k <= steps; ++k) {
    sys.strang_step(field.phi);
    field.t = static_cast<double>(k) * sys.dt();
    if (!field.phi.allFinite()) throw BlowUpError("evolution blew up (non-finite field)", field.t);
    res.max_modulus_deviation =
        std::max(res.max_modulus_deviation, (field.phi.cwiseAbs() - mod0).cwiseAbs().maxCoeff());
    record(field.phi, field.t, k % opts.trace_stride == 0 || k == steps, k % opts.snapshot_stride == 0 || k == steps);
  }
  res.steps = steps;
  res.final_field = std::move(field);
  return res;
}

}  // namespace splab
