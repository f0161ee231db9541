#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "splab/branch.hpp"
#include "splab/evolution.hpp"
#include "splab/io.hpp"
#include "splab/stability.hpp"

namespace splab {

/// -Z/r sampled on a log grid of `points` radii in [1e-8, r_max], for the
/// tabulated-potential path.
Potential tabulated_coulomb(double Z, double r_max, int points = 40001);

/// Two-column (r, V) file; '#' lines are comments.
Potential load_potential_table(const std::string& path);

Potential potential_from_config(const RunConfig& config);

/// One discretization: sinh mesh, FEM operators and the collocation solver.
struct Stage {
  Stage(Potential V, std::size_t n, double r_max);
  Potential V;
  RadialMesh mesh;
  AssembledOperators ops;
  CollocationBvp bvp;
};

/// Linear seed on the stage, continued in γ at fixed mass to γ = 1.
GammaPath continue_branch(const Stage& stage, const LinearEigenpair& pair, const GammaContinuationOptions& opts = {});

/// Fixed-E sweep from a γ = 1 state to E along a geometric grid. Throws
/// ConvergenceError when the sweep stops short.
BoundState state_at_E(const Stage& stage, const BoundState& start, double E, const SweepOptions& opts = {},
                      int per_decade = 25);

/// p(d'') at a state from the masses at E(1 ± rel).
int local_p(const Stage& stage, const BoundState& s, double rel = 1e-3, const SweepOptions& opts = {});

struct StabilityOptions {
  bool full_jl = true;     // full 2(n-1) eigensolve; otherwise the reduced form
  bool full_lpm = false;   // generalized eigenvalues of L±, otherwise inertia counts only
  BoundConstants constants;
};

struct StabilityReport {
  FemBoundState fem;
  NegativeCounts counts;
  std::optional<LpmSpectrum> lpm;
  JLSpectrum jl;
  int p = 1;
  Verdict verdict = Verdict::Inconclusive;
  UnstableBound bound;
  std::vector<std::string> warnings;
};

StabilityReport analyze_stability(const Stage& stage, const BoundState& s, int p, const StabilityOptions& opts = {});

struct TransitionRow {
  double E = 0.0;
  double sigma_max = 0.0;
  double mass = 0.0;
  double bound = 0.0;
  int quartets = 0;
  int real_pairs = 0;
};

struct TransitionOptions {
  double E_from = 0.05;
  double E_to = 0.16;
  double E_step = 0.01;
  double tolerance = 0.0025;  // bracket width of the reported crossing
  BoundConstants constants;
  SweepOptions sweep;
};

struct TransitionReport {
  std::vector<TransitionRow> rows;  // sorted by E
  bool crossing_found = false;
  double crossing_E = 0.0;          // midpoint of the final bracket
  double bracket_lo = 0.0, bracket_hi = 0.0;
};

/// σ_max(E) along a branch from a γ = 1 state, by the reduced JL form, with
/// bisection of the first stable-to-unstable change down to opts.tolerance.
TransitionReport transition_scan(const Stage& stage, const BoundState& start, const TransitionOptions& opts = {});

struct EvolutionSetup {
  std::size_t n = 8000;
  double r_max = 400.0;
  double dt = 0.005;
  double eps = 1e-4;
  bool strang_ic = true;  // polish to a relative equilibrium of the Strang map
  EvolveOptions evolve;
};

struct EvolutionRun {
  EvolutionResult result;
  Eigen::VectorXd profile;  // polished stationary profile on the evolution mesh
  double E = 0.0;
};

/// Transfers a γ = 1 state onto the evolution mesh (far-field continuation
/// beyond its r_max), polishes it and evolves the perturbed field.
EvolutionRun run_evolution(const Potential& V, const BoundState& s, const EvolutionSetup& setup);

/// Runs tasks on at most `workers` threads; the first exception is rethrown
/// after all workers have joined.
void run_parallel(std::vector<std::function<void()>> tasks, int workers);

/// CSV builders for the documented schemas.
CsvTable profile_table(const BoundState& s);
BoundState profile_from_table(const CsvTable& t);
CsvTable branch_table();
void add_branch_row(CsvTable& t, const BoundState& s);
CsvTable spectrum_table(const StabilityReport& r);
CsvTable trace_table(const EvolutionResult& r);
CsvTable snapshot_table(const EvolutionResult& r);

}  // namespace splab
