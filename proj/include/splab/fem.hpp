#pragma once

#include <Eigen/Dense>
#include <span>

#include "splab/mesh.hpp"
#include "splab/potential.hpp"
#include "splab/tridiag.hpp"

namespace splab {

/// P1 radial finite-element operators with weight r² dr.
///
/// Full-size operators act on all nodes 0..n; the Dirichlet variants are their
/// leading n×n blocks (node n = r_max removed). K_rob carries the boundary term
/// r_max·φ_n(r_max)² of the condition w' + w/r_max = 0.
struct AssembledOperators {
  RadialMesh mesh;
  SymTridiag K_full;
  SymTridiag M_full;
  SymTridiag V_full;
  SymTridiag K_rob;
  TridiagCholesky K_rob_factor;
  double charge = 0.0;  // far-field charge of the potential

  Eigen::Index nodes() const noexcept { return K_full.size(); }
  Eigen::Index interior() const noexcept { return K_full.size() - 1; }

  SymTridiag K_dir() const { return K_full.leading(interior()); }
  SymTridiag M_dir() const { return M_full.leading(interior()); }
  SymTridiag V_dir() const { return V_full.leading(interior()); }
};

AssembledOperators assemble(const RadialMesh& mesh, const Potential& V);

/// 3-point Gauss-Legendre abscissae/weights on [-1, 1].
struct Gauss3 {
  static constexpr double x[3] = {-0.7745966692414833770, 0.0, 0.7745966692414833770};
  static constexpr double w[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
};

/// (U)_ij = ∫ u_h φ_i φ_j r² dr with u_h the P1 interpolant of the nodal values.
SymTridiag weighted_overlap(const RadialMesh& mesh, const Eigen::VectorXd& u);

/// Solves K_rob w = M_full·source for nodal source values (all nodes).
Eigen::VectorXd poisson_solve_robin(const AssembledOperators& ops, const Eigen::VectorXd& source);

/// Hartree potential with the Galerkin source: K_rob w = U(u)·u, i.e. the
/// right-hand side ∫ u_h² φ_k r² is integrated exactly. This is the source whose
/// derivative in u produces the nonlocal matrix T = U K_rob⁻¹ U.
Eigen::VectorXd hartree_potential(const AssembledOperators& ops, const Eigen::VectorXd& u);

/// uᵀ M u over all nodes.
double discrete_mass(const AssembledOperators& ops, const Eigen::VectorXd& u);
double discrete_mass(const AssembledOperators& ops, const Eigen::VectorXcd& u);

/// uᵀ(K + V)u - ½ sᵀ K_rob⁻¹ s with the Galerkin density s_k = ∫|u_h|² φ_k r² dr,
/// the functional whose gradient is the discrete equation used by hartree_potential.
double discrete_energy(const AssembledOperators& ops, const Eigen::VectorXd& u);
double discrete_energy(const AssembledOperators& ops, const Eigen::VectorXcd& u);

/// Same without the Hartree term (linear Rayleigh numerator).
double discrete_linear_energy(const AssembledOperators& ops, const Eigen::VectorXd& u);

/// Relative noise floor below which nodes are ignored when counting sign changes.
inline constexpr double kZeroCrossingFloor = 1e-8;

/// Strict sign changes between consecutive significant nodes.
int count_zero_crossings(std::span<const double> u, double rel_floor = kZeroCrossingFloor);
int count_zero_crossings(const Eigen::VectorXd& u, double rel_floor = kZeroCrossingFloor);

/// P1 interpolation of nodal values onto arbitrary radii (held constant outside).
Eigen::VectorXd interpolate_linear(const RadialMesh& mesh, const Eigen::VectorXd& f,
                                   std::span<const double> radii);

/// Cubic Hermite interpolation from nodal values and derivatives.
Eigen::VectorXd interpolate_hermite(const RadialMesh& mesh, const Eigen::VectorXd& f,
                                    const Eigen::VectorXd& df, std::span<const double> radii);

/// ∫₀^{r_j} f_h(s) s² ds at every node, f_h the P1 interpolant (exact per element).
Eigen::VectorXd cumulative_weighted_integral(const RadialMesh& mesh, const Eigen::VectorXd& f);

}  // namespace splab
