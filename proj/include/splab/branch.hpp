#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "splab/bvp.hpp"

namespace splab {

struct GammaContinuationOptions {
  double step = 0.05;
  double min_step = 0.0125;
  double target_mass = 1.0;
  BvpOptions bvp;
};

/// Fixed-mass states along 0 = γ₀ < ... < γ_last = 1, warm-started; the first
/// entry is the γ = 0 solve of the seed, the last the γ = 1 state.
struct GammaPath {
  std::vector<BoundState> states;
  const BoundState& final_state() const { return states.back(); }
};

/// Throws BranchIntegrityError when the zero-crossing count changes and
/// rethrows solver failures with the failing γ in the message.
GammaPath gamma_continuation(const CollocationBvp& bvp, const BoundState& seed,
                             const GammaContinuationOptions& opts = {});

struct BranchSample {
  double E = 0.0;
  double mass = 0.0;
  BoundState state;
};

struct BranchCurve {
  int branch = 0;
  std::vector<BranchSample> samples;  // E strictly increasing
  std::string provenance;
  std::string stop_reason;  // empty when every requested E was reached
};

struct SweepOptions {
  double tail_ratio = 1e-4;    // downward sweeps stop when |u(r_max)|/max|u| exceeds this
  double collapse_mass = 1e-10;
  int max_halvings = 4;        // local refinement of a failing step
  BvpOptions bvp;
};

/// Fixed-E solves at γ = 1 warm-started along E_values (monotone, either
/// direction). The sweep stops at the first failure, recording the reason; the
/// returned curve is sorted by E and includes the start state.
BranchCurve sweep_E(const CollocationBvp& bvp, const BoundState& start, const std::vector<double>& E_values,
                    const SweepOptions& opts = {});

/// Traces a whole branch from a γ = 1 state: downward toward the linear
/// eigenvalue E_linear with E - E_linear geometrically spaced (down to
/// min_gap·E_linear), upward geometrically to E_high. Both halves are merged.
BranchCurve trace_branch(const CollocationBvp& bvp, const BoundState& start, double E_linear, double E_high,
                         int per_decade = 25, double min_gap = 1e-3, const SweepOptions& opts = {});

/// Geometric points strictly after `from` up to and including `to`.
std::vector<double> geometric_grid(double from, double to, int per_decade);

struct SlopeRow {
  double E_mid = 0.0;
  double dd_dE = 0.0;     // finite difference of d = H + E·M
  double mass_mid = 0.0;  // trapezoid mean of the masses
  double rel_error = 0.0;
};

struct SlopeReport {
  int p = 0;  // 1 iff mass strictly increasing across all samples
  bool mixed = false;
  std::vector<SlopeRow> table;
  double max_rel_error = 0.0;
};

/// p(d'') from the mass column plus the finite-difference check d'(E) = M with
/// d computed from the Galerkin energy functional on the state mesh.
SlopeReport d_second_sign(const BranchCurve& curve, const Potential& V);

/// p(d'') from a bare mass sequence (E increasing).
int d_second_sign(const std::vector<double>& masses);

/// ũ(y) = u(y/√E)/E on the given y grid.
Eigen::VectorXd rescale_profile(const BoundState& s, const std::vector<double>& y);

/// Inverse of rescale_profile at nodal radii r (for the algebraic identity).
Eigen::VectorXd unrescale_profile(const Eigen::VectorXd& u_tilde, const std::vector<double>& y, double E,
                                  const std::vector<double>& r);

struct RescaleReport {
  double slope = 0.0;
  double E_lo = 0.0;
  double E_hi = 0.0;
  std::vector<double> y;
  std::vector<double> cauchy_E;      // E_k of consecutive pairs (E_k, 2E_k)
  std::vector<double> cauchy_diff;   // relative sup difference of rescaled profiles
  bool cauchy_decreasing = false;
};

/// Least-squares slope of log(mass) vs log(E) over the largest computed decade,
/// and sup-norm differences of rescaled profiles at E and 2E along the tail
/// (E = E_top/2^k, solved by warm-started fixed-E solves).
/// Throws DomainError when the curve spans less than one decade.
RescaleReport rescale_check(const CollocationBvp& bvp, const BranchCurve& curve, int cauchy_pairs = 4,
                            double y_max = 8.0, int y_points = 801);

/// Energy functional d(E) = H + E·M of a γ = 1 state (same quadrature as pohozaev).
double scalar_energy(const BoundState& s, const Potential& V);

/// u on [0, r_max] (cubic Hermite) continued beyond r_max by
/// K e^{-√E r} r^{-1 + (Z + γ m(r_max))/(2√E)} with K matching u(r_max).
Eigen::VectorXd farfield_extend(const BoundState& s, double Z, std::span<const double> radii);

/// Exponent of the algebraic far-field factor.
double farfield_exponent(const BoundState& s, double Z);

struct PohozaevResult {
  double kinetic = 0.0;     // ∫ u'² r² dr
  double mass = 0.0;        // ∫ u² r² dr
  double potential = 0.0;   // ∫ V u² r² dr
  double moment = 0.0;      // ∫ (r V') u² r² dr
  double predicted = 0.0;   // (E·mass + potential + 2·moment)/3
  double residual = 0.0;    // |kinetic - predicted| / kinetic
  double residual_alt_sign = 0.0;  // same with the potential term entering with a minus sign
};

/// Virial identity of a γ = 1 state, integrated with cubic Hermite
/// reconstructions of u and u' and 3-point Gauss quadrature per element.
PohozaevResult pohozaev(const BoundState& s, const Potential& V);

}  // namespace splab
