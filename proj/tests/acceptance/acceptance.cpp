// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Optional arguments select criteria by number, e.g. `acceptance 1 2 9`.

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "../oracles/shooting.hpp"
#include "splab/errors.hpp"
#include "splab/pipeline.hpp"

using namespace splab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

// States shared between criteria, built lazily.
struct Shared {
  Potential V = Potential::smoothed_exponential();
  std::unique_ptr<Stage> desk;                 // n = 2000, r_max = 100
  std::vector<LinearEigenpair> desk_pairs;
  std::vector<GammaPath> paths;                // γ-continuation, branches 0..3
  std::vector<BoundState> at_one;              // E = 1 on the desk stage

  const Stage& stage() {
    if (!desk) {
      desk = std::make_unique<Stage>(V, 2000, 100.0);
      desk_pairs = solve_linear_states(desk->ops, 4);
    }
    return *desk;
  }
  const std::vector<GammaPath>& gamma_paths() {
    if (paths.empty()) {
      const Stage& st = stage();
      for (int j = 0; j < 4; ++j) paths.push_back(continue_branch(st, desk_pairs[j]));
    }
    return paths;
  }
  const std::vector<BoundState>& states_at_one() {
    if (at_one.empty())
      for (const auto& p : gamma_paths()) at_one.push_back(state_at_E(stage(), p.final_state(), 1.0));
    return at_one;
  }
};

Shared shared;

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : "; ") + p;
  return out;
}

// 1. FEM linear eigenvalues vs Numerov shooting, 1e-5 relative.
Outcome linear_oracle() {
  const AssembledOperators ops = assemble(build_sinh_mesh(4000, 100.0), shared.V);
  const int count = count_bound_states(ops);
  const auto pairs = solve_linear_states(ops, 4);
  const oracle::Shooter shoot([](double r) { return smoothed_coulomb_V(r); }, 100.0, 200000);
  bool ok = count >= 4;
  double worst = 0.0;
  double upper = 0.6;
  for (int j = 0; j < 4; ++j) {
    const double E = shoot.state(j, 1e-6, upper).E;
    upper = E;
    const double rel = std::abs(pairs[j].E() - E) / E;
    worst = std::max(worst, rel);
    ok = ok && pairs[j].nodes == j && rel <= 1e-5;
  }
  return {ok, fmt::format("{} bound states, nodes 0-3, worst relative deviation from shooting {:.2e} (tol 1e-5)",
                          count, worst)};
}

// 2. Tabulated -1/r: -0.25 and -0.0625 within 1e-4.
Outcome hydrogen_oracle() {
  const AssembledOperators ops = assemble(build_sinh_mesh(4000, 100.0), tabulated_coulomb(1.0, 100.0));
  const auto pairs = solve_linear_states(ops, 2);
  const double d1 = std::abs(pairs[0].eigenvalue + 0.25), d2 = std::abs(pairs[1].eigenvalue + 0.0625);
  return {d1 <= 1e-4 && d2 <= 1e-4,
          fmt::format("eigenvalues {:.8f}, {:.8f}; errors {:.1e}, {:.1e} (tol 1e-4)", pairs[0].eigenvalue,
                      pairs[1].eigenvalue, d1, d2)};
}

// 3. γ-continuation of branches 0..3 at mass 1, δγ = 0.05, crossing count invariant.
Outcome gamma_continuation_check() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& paths = shared.gamma_paths();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool ok = secs < 300.0;
  std::vector<std::string> parts;
  for (int j = 0; j < 4; ++j) {
    const auto& p = paths[j];
    bool invariant = true;
    for (const auto& s : p.states) invariant = invariant && count_zero_crossings(s.u) == j && s.branch == j;
    const BoundState& f = p.final_state();
    ok = ok && invariant && f.gamma == 1.0 && std::abs(f.mass - 1.0) < 1e-9;
    parts.push_back(fmt::format("j={} E={:.6f} steps={}", j, f.E, p.states.size() - 1));
  }
  return {ok, join(parts) + fmt::format("; {:.0f} s (limit 300 s)", secs)};
}

// 4. Mass strictly increasing from near E_lin to 2x the mass-one E, d'(E) = M to 1e-3.
Outcome branch_monotonicity() {
  const Stage stage(shared.V, 3000, 300.0);
  const auto pairs = solve_linear_states(stage.ops, 4);
  bool ok = true;
  std::vector<std::string> parts;
  for (int j = 0; j < 4; ++j) {
    const BoundState start = continue_branch(stage, pairs[j]).final_state();
    const double E_lin = pairs[j].E();
    const BranchCurve c = trace_branch(stage.bvp, start, E_lin, 2.0 * start.E);
    bool increasing = true;
    for (std::size_t k = 1; k < c.samples.size(); ++k) increasing = increasing && c.samples[k].mass > c.samples[k - 1].mass;
    const SlopeReport slope = d_second_sign(c, stage.V);
    const double gap = (c.samples.front().E - E_lin) / E_lin;
    const bool reached = c.samples.back().E >= 2.0 * start.E * (1 - 1e-12) && gap <= 1e-2;
    ok = ok && increasing && reached && slope.p == 1 && slope.max_rel_error <= 1e-3 && c.stop_reason.empty();
    parts.push_back(fmt::format("j={}: {} samples, E/E_lin-1 from {:.1e}, p={}, d'=M err {:.1e}{}", j, c.samples.size(),
                                gap, slope.p, slope.max_rel_error, c.stop_reason.empty() ? "" : " [" + c.stop_reason + "]"));
  }
  return {ok, join(parts) + " (r_max=300, n=3000; tol 1e-3)"};
}

// 5. Slope of log mass vs log E on the branch-0 tail, 0.5 ± 0.05; rescaled profiles Cauchy.
Outcome scaling_limit() {
  const Stage& stage = shared.stage();
  const BoundState& start = shared.gamma_paths()[0].final_state();
  const BranchCurve c = sweep_E(stage.bvp, start, geometric_grid(start.E, 1000.0, 25));
  if (!c.stop_reason.empty()) return {false, "tail sweep stopped: " + c.stop_reason};
  const RescaleReport r = rescale_check(stage.bvp, c);
  std::string diffs;
  for (double d : r.cauchy_diff) diffs += fmt::format(" {:.2e}", d);
  const bool ok = std::abs(r.slope - 0.5) <= 0.05 && r.cauchy_decreasing && r.cauchy_diff.size() >= 3;
  return {ok, fmt::format("slope {:.4f} on E in [{:.0f}, {:.0f}] (tol 0.5 +- 0.05); sup differences at E, 2E:{}",
                          r.slope, r.E_lo, r.E_hi, diffs)};
}

// 6. Virial identity on the γ = 1 states: <= 1e-4, flagged up to 1e-2.
Outcome pohozaev_check() {
  double worst = 0.0;
  std::vector<std::string> parts;
  for (const auto& p : shared.gamma_paths()) {
    const PohozaevResult r = pohozaev(p.final_state(), shared.V);
    worst = std::max(worst, r.residual);
    parts.push_back(fmt::format("j={} {:.1e}", p.final_state().branch, r.residual));
  }
  std::string note = worst <= 1e-4 ? "" : worst <= 1e-2 ? " FLAGGED (between 1e-4 and 1e-2)" : "";
  return {worst <= 1e-2, "relative residuals " + join(parts) + " (tol 1e-4, flag to 1e-2)" + note};
}

// 7. n(L-) = j, n(L+) = j + 1 at E = 1 for n = 2000 and n = 4000.
Outcome negative_counts_check() {
  bool ok = true;
  std::vector<std::string> parts;
  const auto& desk = shared.states_at_one();
  const Stage fine(shared.V, 4000, 100.0);
  const auto fine_pairs = solve_linear_states(fine.ops, 4);
  for (int j = 0; j < 4; ++j) {
    const NegativeCounts a = negative_counts(linearize(shared.stage().ops, polish_fem_state(shared.stage().ops, desk[j])));
    const BoundState s = state_at_E(fine, continue_branch(fine, fine_pairs[j]).final_state(), 1.0);
    const NegativeCounts b = negative_counts(linearize(fine.ops, polish_fem_state(fine.ops, s)));
    ok = ok && a.n_minus == j && a.n_plus == j + 1 && b.n_minus == j && b.n_plus == j + 1;
    parts.push_back(fmt::format("j={}: ({},{}) / ({},{})", j, a.n_minus, a.n_plus, b.n_minus, b.n_plus));
  }
  return {ok, "(n(L-),n(L+)) at n=2000 / n=4000: " + join(parts)};
}

// 8. Full JL spectra at E = 1.
Outcome jl_spectra() {
  bool ok = true;
  std::vector<std::string> parts;
  const double E = 1.0;
  for (int j = 0; j < 4; ++j) {
    const Stage& stage = shared.stage();
    const JLSpectrum s = spectrum_JL(linearize(stage.ops, polish_fem_state(stage.ops, shared.states_at_one()[j])));
    bool positive_quartet = false;
    for (const auto& q : s.quartets) positive_quartet = positive_quartet || q.lambda.real() > 0.0;
    const bool branch_ok = j == 0 ? (s.sigma_max < 1e-6 * (1 + E) && s.quartets.empty()) : positive_quartet;
    ok = ok && branch_ok && s.symmetry_error <= 1e-8;
    parts.push_back(fmt::format("j={}: sigma_max {:.2e}, {} quartets, symmetry {:.1e}", j, s.sigma_max,
                                s.quartets.size(), s.symmetry_error));
  }
  return {ok, join(parts) + " (n=2000, 3998 eigenvalues each)"};
}

// 9. σ_max(E) along branch 1: crossing in [0.10, 0.16], σ_max <= bound, σ_max -> 0 with mass.
Outcome transition_check() {
  const Stage& stage = shared.stage();
  const TransitionReport r = transition_scan(stage, shared.gamma_paths()[1].final_state());
  if (!r.crossing_found) return {false, "no crossing found in [0.05, 0.16]"};
  bool below_bound = true, split = true;
  const TransitionRow* lightest = &r.rows.front();
  for (const auto& row : r.rows) {
    below_bound = below_bound && row.sigma_max <= row.bound;
    if (row.E <= r.bracket_lo) split = split && row.sigma_max <= unstable_threshold(row.E);
    if (row.E >= r.bracket_hi) split = split && row.sigma_max > unstable_threshold(row.E);
    if (row.mass < lightest->mass) lightest = &row;
  }
  const bool vanishing = lightest->sigma_max <= unstable_threshold(lightest->E);
  const bool ok = r.crossing_E >= 0.10 && r.crossing_E <= 0.16 && below_bound && split && vanishing;
  return {ok, fmt::format("crossing at E = {:.4f} (bracket [{:.5f}, {:.5f}]); sigma_max <= bound on all {} rows: {}; "
                          "sigma_max {:.1e} at the lightest state (mass {:.3f}); sigma_max(0.16) = {:.2e}",
                          r.crossing_E, r.bracket_lo, r.bracket_hi, r.rows.size(), below_bound ? "yes" : "no",
                          lightest->sigma_max, lightest->mass, r.rows.back().sigma_max)};
}

// 10. Desk-scale evolution.
Outcome evolution_check() {
  const auto& states = shared.states_at_one();
  EvolutionSetup setup;  // r_max = 400, n = 8000, Δt = 0.005
  setup.evolve.t_final = 50.0;
  constexpr double eps = 1e-4;

  auto run = [&](int j, double e, double dt) {
    EvolutionSetup s = setup;
    s.eps = e;
    s.dt = dt;
    return run_evolution(shared.V, states[j], s).result;
  };
  const EvolutionResult still0 = run(0, 0.0, 0.005);
  const EvolutionResult still1 = run(1, 0.0, 0.005);
  const EvolutionResult pert0 = run(0, eps, 0.005);
  const EvolutionResult pert0_half = run(0, eps, 0.0025);
  const EvolutionResult pert1 = run(1, eps, 0.005);

  const bool stationary = still0.max_modulus_deviation <= 1e-5 && still1.max_modulus_deviation <= 1e-5;
  const bool ground_stays = pert0.max_modulus_deviation <= 10 * eps;
  const bool excited_departs = pert1.max_modulus_deviation > 10 * eps;
  double drift = 0.0;
  for (const auto* r : {&still0, &still1, &pert0, &pert0_half, &pert1})
    drift = std::max({drift, r->trace.max_mass_drift, r->trace.max_energy_drift});
  const double ratio = pert0.trace.max_energy_drift / pert0_half.trace.max_energy_drift;
  const bool second_order = ratio >= 3.5 && ratio <= 4.5;
  const bool ok = stationary && ground_stays && excited_departs && drift <= 1e-5 && second_order;
  return {ok, fmt::format("unperturbed deviation {:.1e}, {:.1e} (tol 1e-5); perturbed ground {:.2f} eps (<= 10), "
                          "perturbed first excited {:.1f} eps (> 10); max invariant drift {:.1e} (tol 1e-5); "
                          "energy drift ratio on halving dt {:.2f} (3.5-4.5)",
                          still0.max_modulus_deviation, still1.max_modulus_deviation, pert0.max_modulus_deviation / eps,
                          pert1.max_modulus_deviation / eps, drift, ratio)};
}

}  // namespace

int main(int argc, char** argv) {
  std::setvbuf(stdout, nullptr, _IONBF, 0);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"linear spectrum vs shooting oracle", linear_oracle},
      {"hydrogen oracle (tabulated -1/r)", hydrogen_oracle},
      {"gamma continuation, branches 0-3", gamma_continuation_check},
      {"branch monotonicity and d'(E) = M", branch_monotonicity},
      {"scaling limit of branch 0", scaling_limit},
      {"virial identity", pohozaev_check},
      {"negative counts of L-, L+", negative_counts_check},
      {"JL spectra at E = 1", jl_spectra},
      {"transition scan on branch 1", transition_check},
      {"desk-scale evolution", evolution_check},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k + 1);
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %d: %s -- %s [%.0f s]\n", o.pass ? "PASS" : "FAIL", id, criteria[k].first.c_str(),
                o.detail.c_str(), secs);
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
