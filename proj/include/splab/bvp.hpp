#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>

#include "splab/fem.hpp"
#include "splab/linear_spectrum.hpp"
#include "splab/mesh.hpp"
#include "splab/potential.hpp"

namespace splab {

/// Nonlinear radial bound state on the collocation mesh: the state vector
/// (u, v = u', w, z = w', m) of the first-order system at every node.
struct BoundState {
  RadialMesh mesh;
  Eigen::VectorXd u, v, w, z, m;
  double E = 0.0;
  double gamma = 0.0;
  double mass = 0.0;  // m(r_max)
  int branch = 0;     // zero crossings of u
  double residual = 0.0;
};

using State5 = std::array<double, 5>;

/// (u', v', w', z', m') at r > 0 for the homotopy
///   E u - u'' - (2/r)u' + V u - γ w u = 0,  -w'' - (2/r)w' = u²,  m' = u² r².
/// Throws DomainError at r <= 0; the collocation solver uses the regularized
/// origin form instead.
State5 first_order_rhs(const State5& y, double r, double gamma, double E, const Potential& V);

enum class BvpMode { FixedMass, FixedE };

struct BvpParameters {
  BvpMode mode = BvpMode::FixedMass;
  double gamma = 1.0;
  double target_mass = 1.0;  // FixedMass
  double E = 0.0;            // FixedE (in FixedMass mode: ignored, E is an unknown)
};

/// Robin coefficient of the far-field condition v + c·u = 0 at r_max:
///   c = 1/R + √E - (Z + γ m(R)) / (2 R √E).
double far_field_robin_coefficient(double R, double E, double Z, double gamma, double m_R);

/// Boundary residuals: {v(0), z(0), m(0), [m(R) - target,] z(R) + w(R)/R, v(R) + c·u(R)}.
/// The mass row is present only in FixedMass mode. Throws DomainError for E <= 0.
Eigen::VectorXd boundary_residuals(const State5& at_origin, const State5& at_rmax, double r_max, double E,
                                   double Z, const BvpParameters& params);

struct BvpOptions {
  double tolerance = 1e-10;  // on the component-scaled max residual
  int max_iterations = 60;
  double min_damping = 1.0 / 4096.0;
};

/// Lobatto IIIA (3-stage, Hermite-Simpson) collocation of the first-order system
/// on the nodes of a radial mesh, solved by damped Newton with a sparse LU. In
/// FixedMass mode E is appended to the unknowns.
class CollocationBvp {
 public:
  CollocationBvp(RadialMesh mesh, Potential V);

  const RadialMesh& mesh() const noexcept { return mesh_; }
  const Potential& potential() const noexcept { return V_; }

  BoundState solve(const BoundState& guess, const BvpParameters& params, const BvpOptions& opts = {}) const;

  /// Max component-scaled residual of a state (collocation equations and boundary rows).
  double scaled_residual(const BoundState& state, const BvpParameters& params) const;

 private:
  struct Workspace;
  Eigen::VectorXd residual_vector(const Eigen::VectorXd& x, double E, const BvpParameters& params,
                                  const Eigen::Array<double, 5, 1>& scale, Workspace* jac) const;

  RadialMesh mesh_;
  Potential V_;
  Eigen::VectorXd V_nodes_;
  Eigen::VectorXd V_mid_;
};

/// Builds a γ = 0 guess (u, u', Hartree w and w', accumulated mass) from a linear
/// eigenpair computed on `pair_ops`, interpolated onto `mesh` when they differ.
BoundState seed_from_linear(const LinearEigenpair& pair, const AssembledOperators& pair_ops,
                            const RadialMesh& mesh, const Potential& V);

}  // namespace splab
