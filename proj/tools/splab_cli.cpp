#include <CLI11.hpp>
#include <fmt/format.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "splab/errors.hpp"
#include "splab/pipeline.hpp"

namespace fs = std::filesystem;
using namespace splab;

namespace {

constexpr const char* kVersion = "splab 1.0.0";

struct Run {
  std::string subcommand;
  RunConfig config;
  fs::path out;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  nlohmann::json extra = nlohmann::json::object();
  std::mutex mu;

  void write(const std::string& name, const CsvTable& t) {
    write_csv(out / name, t);
    std::lock_guard lock(mu);
    outputs.push_back(name);
  }
  void write(const std::string& name, const nlohmann::json& j) {
    write_json(out / name, j);
    std::lock_guard lock(mu);
    outputs.push_back(name);
  }
};

std::string id_for(const Run& run, const std::string& fallback) {
  const std::string id = run.config.get_string("id");
  return id.empty() ? fallback : id;
}

Stage make_stage(const RunConfig& c) {
  return Stage(potential_from_config(c), static_cast<std::size_t>(c.get_int("n")), c.get_double("r_max"));
}

BvpOptions bvp_options(const RunConfig& c) {
  BvpOptions o;
  o.tolerance = c.get_double("bvp_tol");
  return o;
}

GammaContinuationOptions gamma_options(const RunConfig& c) {
  GammaContinuationOptions o;
  o.step = c.get_double("gamma_step");
  o.min_step = c.get_double("gamma_min_step");
  o.target_mass = c.get_double("target_mass");
  o.bvp = bvp_options(c);
  return o;
}

SweepOptions sweep_options(const RunConfig& c) {
  SweepOptions o;
  o.bvp = bvp_options(c);
  return o;
}

BoundConstants bound_constants(const RunConfig& c) {
  BoundConstants b;
  b.C_HLS = c.get_double("C_HLS");
  b.C_GN = c.get_double("C_GN");
  return b;
}

std::vector<LinearEigenpair> linear_pairs(const Stage& stage, int highest_branch) {
  auto pairs = solve_linear_states(stage.ops, highest_branch + 1);
  sturm_check(pairs);
  return pairs;
}

int max_of(const std::vector<int>& v) { return *std::max_element(v.begin(), v.end()); }

// γ = 1 state of a branch: reuse the continue-gamma output when it matches the mesh.
BoundState gamma_one_state(Run& run, const Stage& stage, const std::vector<LinearEigenpair>& pairs, int j) {
  const fs::path cached = run.out.parent_path() / "continue-gamma" / fmt::format("profile_b{}_gamma1.csv", j);
  if (fs::exists(cached)) {
    BoundState s = profile_from_table(read_csv(cached, kProfileSchema));
    const bool same = s.mesh.size() == stage.mesh.size() &&
                      std::equal(s.mesh.nodes().begin(), s.mesh.nodes().end(), stage.mesh.nodes().begin()) &&
                      s.gamma == 1.0 && s.mass == run.config.get_double("target_mass");
    if (same) {
      std::lock_guard lock(run.mu);
      run.inputs.push_back(cached.string());
      return s;
    }
  }
  return continue_branch(stage, pairs[static_cast<std::size_t>(j)], gamma_options(run.config)).final_state();
}

int cmd_linear(Run& run) {
  const RunConfig& c = run.config;
  const Stage stage = make_stage(c);
  const int k = static_cast<int>(c.get_int("linear_states"));
  const auto pairs = solve_linear_states(stage.ops, k);
  sturm_check(pairs);
  CsvTable t;
  t.schema = kLinearSchema;
  t.comments = {"bound_states=" + std::to_string(count_bound_states(stage.ops))};
  t.columns = {"index", "nodes", "eigenvalue", "E"};
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    t.add_row({std::to_string(i), std::to_string(p.nodes), format_double(p.eigenvalue), format_double(p.E())});
    run.write(fmt::format("profile_linear{}.csv", i), profile_table(seed_from_linear(p, stage.ops, stage.mesh, stage.V)));
    fmt::print("state {}: eigenvalue {:.12g}  nodes {}\n", i, p.eigenvalue, p.nodes);
  }
  run.write("linear.csv", t);
  return 0;
}

int cmd_continue_gamma(Run& run) {
  const RunConfig& c = run.config;
  const Stage stage = make_stage(c);
  const auto branches = c.get_int_list("branches");
  const auto pairs = linear_pairs(stage, max_of(branches));
  std::vector<GammaPath> paths(branches.size());
  std::vector<std::function<void()>> jobs;
  for (std::size_t b = 0; b < branches.size(); ++b)
    jobs.push_back([&, b] {
      const int j = branches[b];
      paths[b] = continue_branch(stage, pairs[static_cast<std::size_t>(j)], gamma_options(c));
      CsvTable t = branch_table();
      for (const auto& s : paths[b].states) add_branch_row(t, s);
      run.write(fmt::format("branch_b{}.csv", j), t);
      run.write(fmt::format("profile_b{}_gamma1.csv", j), profile_table(paths[b].final_state()));
    });
  run_parallel(std::move(jobs), static_cast<int>(c.get_int("jobs")));

  CsvTable all = branch_table();
  for (std::size_t b = 0; b < branches.size(); ++b) {
    for (const auto& s : paths[b].states) add_branch_row(all, s);
    const BoundState& f = paths[b].final_state();
    const PohozaevResult ph = pohozaev(f, stage.V);
    fmt::print("branch {}: gamma=1 E={:.12g} mass={:.12g} steps={} virial residual {:.3e}\n", branches[b], f.E,
               f.mass, paths[b].states.size() - 1, ph.residual);
    run.extra["virial_residual"][std::to_string(branches[b])] = ph.residual;
  }
  run.write("branch.csv", all);
  return 0;
}

int cmd_sweep_E(Run& run) {
  const RunConfig& c = run.config;
  const Stage stage = make_stage(c);
  const auto branches = c.get_int_list("branches");
  const auto pairs = linear_pairs(stage, max_of(branches));
  std::vector<BranchCurve> curves(branches.size());
  std::vector<SlopeReport> slopes(branches.size());
  std::vector<std::function<void()>> jobs;
  for (std::size_t b = 0; b < branches.size(); ++b)
    jobs.push_back([&, b] {
      const int j = branches[b];
      const BoundState start = gamma_one_state(run, stage, pairs, j);
      const double E_max = c.get_double("E_max") > 0.0 ? c.get_double("E_max") : 2.0 * start.E;
      curves[b] = trace_branch(stage.bvp, start, pairs[static_cast<std::size_t>(j)].E(), E_max,
                               static_cast<int>(c.get_int("per_decade")), c.get_double("min_gap"), sweep_options(c));
      slopes[b] = d_second_sign(curves[b], stage.V);
      CsvTable t = branch_table();
      t.comments = {"provenance=" + curves[b].provenance, "stop_reason=" + curves[b].stop_reason};
      for (const auto& s : curves[b].samples) add_branch_row(t, s.state);
      run.write(fmt::format("branch_b{}.csv", j), t);

      CsvTable sl;
      sl.schema = kSlopeSchema;
      sl.comments = {"p=" + std::to_string(slopes[b].p), "max_rel_error=" + format_double(slopes[b].max_rel_error)};
      sl.columns = {"E_mid", "dd_dE", "mass_mid", "rel_error"};
      for (const auto& r : slopes[b].table)
        sl.add_row({format_double(r.E_mid), format_double(r.dd_dE), format_double(r.mass_mid), format_double(r.rel_error)});
      run.write(fmt::format("slope_b{}.csv", j), sl);

      const auto& samples = curves[b].samples;
      for (std::size_t k = 0; k < samples.size(); ++k)
        if (c.get_string("profiles") == "all" || k == 0 || k + 1 == samples.size())
          run.write(fmt::format("profile_b{}_s{}.csv", j, k), profile_table(samples[k].state));
    });
  run_parallel(std::move(jobs), static_cast<int>(c.get_int("jobs")));

  CsvTable all = branch_table();
  for (std::size_t b = 0; b < branches.size(); ++b) {
    for (const auto& s : curves[b].samples) add_branch_row(all, s.state);
    const auto& cv = curves[b];
    fmt::print("branch {}: {} samples, E in [{:.6g}, {:.6g}], p={}, d'=M max rel error {:.3e}{}\n", branches[b],
               cv.samples.size(), cv.samples.front().E, cv.samples.back().E, slopes[b].p, slopes[b].max_rel_error,
               cv.stop_reason.empty() ? "" : "; stopped: " + cv.stop_reason);
    run.extra["p"][std::to_string(branches[b])] = slopes[b].p;
  }
  run.write("branch.csv", all);
  return 0;
}

int cmd_spectrum(Run& run) {
  const RunConfig& c = run.config;
  const Stage stage = make_stage(c);
  const auto branches = c.get_int_list("branches");
  const auto pairs = linear_pairs(stage, max_of(branches));
  const double E = c.get_double("E");
  std::vector<StabilityReport> reports(branches.size());
  std::vector<std::function<void()>> jobs;
  for (std::size_t b = 0; b < branches.size(); ++b)
    jobs.push_back([&, b] {
      const int j = branches[b];
      const BoundState s = state_at_E(stage, gamma_one_state(run, stage, pairs, j), E, sweep_options(c));
      StabilityOptions o;
      o.full_jl = c.get_bool("full_jl");
      o.full_lpm = true;
      o.constants = bound_constants(c);
      reports[b] = analyze_stability(stage, s, local_p(stage, s, 1e-3, sweep_options(c)), o);
      const StabilityReport& r = reports[b];
      run.write(fmt::format("spectrum_b{}.csv", j), spectrum_table(r));
      nlohmann::json v;
      v["branch"] = j;
      v["E"] = E;
      v["mass"] = s.mass;
      v["n_minus"] = r.counts.n_minus;
      v["n_plus"] = r.counts.n_plus;
      v["p"] = r.p;
      v["sigma_max"] = r.jl.sigma_max;
      v["quartets"] = r.jl.quartets.size();
      v["real_pairs"] = r.jl.real_pairs.size();
      v["symmetry_error"] = r.jl.symmetry_error;
      v["jl_form"] = r.jl.reduced ? "reduced" : "full";
      v["verdict"] = to_string(r.verdict);
      v["unstable_bound"] = {{"bound", r.bound.bound}, {"hls", r.bound.hls}, {"gradient_form", r.bound.gradient_form}};
      v["warnings"] = r.warnings;
      run.write(fmt::format("verdict_b{}.json", j), v);
    });
  run_parallel(std::move(jobs), static_cast<int>(c.get_int("jobs")));
  for (std::size_t b = 0; b < branches.size(); ++b) {
    const auto& r = reports[b];
    fmt::print("branch {} at E={:.6g}: n(L-)={} n(L+)={} p={} sigma_max={:.3e} quartets={} verdict={}\n", branches[b], E,
               r.counts.n_minus, r.counts.n_plus, r.p, r.jl.sigma_max, r.jl.quartets.size(), to_string(r.verdict));
    for (const auto& w : r.warnings) fmt::print("  warning: {}\n", w);
  }
  return 0;
}

int cmd_transition(Run& run) {
  const RunConfig& c = run.config;
  const Stage stage = make_stage(c);
  const int j = static_cast<int>(c.get_int("transition_branch"));
  const auto pairs = linear_pairs(stage, j);
  TransitionOptions o;
  o.E_from = c.get_double("transition_E_from");
  o.E_to = c.get_double("transition_E_to");
  o.E_step = c.get_double("transition_E_step");
  o.tolerance = c.get_double("transition_tol");
  o.constants = bound_constants(c);
  o.sweep = sweep_options(c);
  const TransitionReport rep = transition_scan(stage, gamma_one_state(run, stage, pairs, j), o);
  CsvTable t;
  t.schema = kTransitionSchema;
  t.comments = {"branch=" + std::to_string(j)};
  t.columns = {"E", "sigma_max", "mass", "bound", "quartets", "real_pairs"};
  for (const auto& r : rep.rows)
    t.add_row({format_double(r.E), format_double(r.sigma_max), format_double(r.mass), format_double(r.bound),
               std::to_string(r.quartets), std::to_string(r.real_pairs)});
  run.write("transition.csv", t);
  run.extra["crossing_found"] = rep.crossing_found;
  run.extra["crossing_E"] = rep.crossing_E;
  run.extra["bracket"] = {rep.bracket_lo, rep.bracket_hi};
  for (const auto& r : rep.rows)
    fmt::print("E={:.5f} sigma_max={:.4e} mass={:.4e} bound={:.4f}\n", r.E, r.sigma_max, r.mass, r.bound);
  if (rep.crossing_found)
    fmt::print("crossing at E = {:.5f} (bracket [{:.5f}, {:.5f}])\n", rep.crossing_E, rep.bracket_lo, rep.bracket_hi);
  else
    fmt::print("no stable-to-unstable crossing in the scanned range\n");
  return 0;
}

int cmd_evolve(Run& run) {
  RunConfig& c = run.config;
  if (c.get_bool("paper_scale")) {
    c.set("evo_r_max", "4000");
    c.set("evo_n", "64000");
    c.set("dt", "0.00125");
    c.set("t_final", "250");
  }
  const Stage stage = make_stage(c);
  const int j = static_cast<int>(c.get_int("branch"));
  const auto pairs = linear_pairs(stage, j);
  const BoundState s = state_at_E(stage, gamma_one_state(run, stage, pairs, j), c.get_double("evo_E"), sweep_options(c));
  EvolutionSetup setup;
  setup.n = static_cast<std::size_t>(c.get_int("evo_n"));
  setup.r_max = c.get_double("evo_r_max");
  setup.dt = c.get_double("dt");
  setup.eps = c.get_double("eps");
  setup.strang_ic = c.get_string("ic") == "strang";
  setup.evolve.t_final = c.get_double("t_final");
  setup.evolve.snapshot_stride = static_cast<int>(c.get_int("snapshot_stride"));
  setup.evolve.trace_stride = static_cast<int>(c.get_int("trace_stride"));
  const EvolutionRun ev = run_evolution(stage.V, s, setup);
  const std::string id = id_for(run, fmt::format("b{}", j));
  run.write(fmt::format("trace_{}.csv", id), trace_table(ev.result));
  run.write(fmt::format("snapshots_{}.csv", id), snapshot_table(ev.result));
  run.extra["max_modulus_deviation"] = ev.result.max_modulus_deviation;
  run.extra["max_mass_drift"] = ev.result.trace.max_mass_drift;
  run.extra["max_energy_drift"] = ev.result.trace.max_energy_drift;
  run.extra["warnings"] = ev.result.warnings;
  fmt::print("branch {} E={:.6g}: {} steps, sup modulus deviation {:.3e} ({:.2f} eps), mass drift {:.3e}, energy drift {:.3e}\n",
             j, ev.E, ev.result.steps, ev.result.max_modulus_deviation,
             setup.eps > 0.0 ? ev.result.max_modulus_deviation / setup.eps : 0.0, ev.result.trace.max_mass_drift,
             ev.result.trace.max_energy_drift);
  for (const auto& w : ev.result.warnings) fmt::print("  warning: {}\n", w);
  return 0;
}

int cmd_rescale_check(Run& run) {
  const RunConfig& c = run.config;
  const Stage stage = make_stage(c);
  const int j = static_cast<int>(c.get_int("branch"));
  const auto pairs = linear_pairs(stage, j);
  const BoundState start = gamma_one_state(run, stage, pairs, j);
  BranchCurve curve =
      sweep_E(stage.bvp, start, geometric_grid(start.E, c.get_double("rescale_E_max"), static_cast<int>(c.get_int("per_decade"))),
              sweep_options(c));
  if (!curve.stop_reason.empty()) throw ConvergenceError("tail sweep stopped: " + curve.stop_reason, NAN);
  const RescaleReport rep = rescale_check(stage.bvp, curve);
  CsvTable t;
  t.schema = kRescaleSchema;
  t.comments = {"slope=" + format_double(rep.slope), "fit_E_lo=" + format_double(rep.E_lo),
                "fit_E_hi=" + format_double(rep.E_hi)};
  t.columns = {"E", "cauchy_diff"};
  for (std::size_t k = 0; k < rep.cauchy_E.size(); ++k)
    t.add_row({format_double(rep.cauchy_E[k]), format_double(rep.cauchy_diff[k])});
  run.write("rescale.csv", t);
  CsvTable b = branch_table();
  for (const auto& s : curve.samples) add_branch_row(b, s.state);
  run.write(fmt::format("branch_b{}_tail.csv", j), b);
  run.extra["slope"] = rep.slope;
  run.extra["cauchy_decreasing"] = rep.cauchy_decreasing;
  fmt::print("log-log slope of mass vs E on [{:.4g}, {:.4g}]: {:.5f}\n", rep.E_lo, rep.E_hi, rep.slope);
  for (std::size_t k = 0; k < rep.cauchy_E.size(); ++k)
    fmt::print("  sup |u~(E) - u~(2E)| / sup |u~| at E={:.5g}: {:.4e}\n", rep.cauchy_E[k], rep.cauchy_diff[k]);
  return 0;
}

int cmd_validate(Run& run) {
  const RunConfig& c = run.config;
  std::vector<std::pair<std::string, bool>> checks;
  auto report = [&](const std::string& name, bool ok, const std::string& detail) {
    checks.emplace_back(name, ok);
    run.extra["checks"][name] = {{"pass", ok}, {"detail", detail}};
    fmt::print("{} {}: {}\n", ok ? "PASS" : "FAIL", name, detail);
  };

  {  // hydrogen with the tabulated Coulomb potential: E_n = Z²/(4n²)
    const double Z = 1.0;
    const Stage h(tabulated_coulomb(Z, 100.0), 4000, 100.0);
    const auto pairs = solve_linear_states(h.ops, 2);
    const double e1 = pairs[0].eigenvalue, e2 = pairs[1].eigenvalue;
    const bool ok = std::abs(e1 + hydrogen_reference(1, Z).E()) <= 1e-4 && std::abs(e2 + hydrogen_reference(2, Z).E()) <= 1e-4;
    report("hydrogen", ok, fmt::format("eigenvalues {:.8f}, {:.8f} (expected -0.25, -0.0625)", e1, e2));
  }
  const Stage stage = make_stage(c);
  std::vector<LinearEigenpair> pairs;
  try {
    pairs = solve_linear_states(stage.ops, static_cast<int>(c.get_int("linear_states")));
    sturm_check(pairs);
    std::string nodes;
    for (const auto& p : pairs) nodes += std::to_string(p.nodes) + " ";
    report("sturm", true, "node counts " + nodes + "strictly increasing, eigenvalues simple");
  } catch (const Error& e) {
    report("sturm", false, e.what());
  }
  if (!pairs.empty()) {
    const BoundState s = continue_branch(stage, pairs[0], gamma_options(c)).final_state();
    const PohozaevResult ph = pohozaev(s, stage.V);
    report("pohozaev", ph.residual <= 1e-4,
           fmt::format("relative residual {:.3e} at E={:.8g} (flag threshold 1e-4)", ph.residual, s.E));
  }
  {  // P1 operators integrate r² exactly: 1ᵀM1 = ∫r²dr and rᵀK r = ∫r²dr
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(stage.ops.nodes());
    Eigen::VectorXd r(stage.ops.nodes());
    for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = stage.mesh[static_cast<std::size_t>(i)];
    const double exact = std::pow(stage.mesh.r_max(), 3) / 3.0;
    const double em = std::abs(stage.ops.M_full.quad(one) - exact) / exact;
    const double ek = std::abs(stage.ops.K_full.quad(r) - exact) / exact;
    double eg = 0.0;  // Gauss3 exact through degree 5
    for (int d = 0; d <= 5; ++d) {
      double q = 0.0;
      for (int g = 0; g < 3; ++g) q += Gauss3::w[g] * std::pow(Gauss3::x[g], d);
      eg = std::max(eg, std::abs(q - (d % 2 ? 0.0 : 2.0 / (d + 1))));
    }
    report("quadrature", em < 1e-10 && ek < 1e-10 && eg < 1e-14,
           fmt::format("mass {:.2e}, stiffness {:.2e}, Gauss degree<=5 {:.2e}", em, ek, eg));
  }
  int failed = 0;
  for (const auto& [name, ok] : checks) failed += !ok;
  fmt::print("{} of {} checks passed\n", checks.size() - static_cast<std::size_t>(failed), checks.size());
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radial Schrödinger-Poisson bound states lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  const std::map<std::string, int (*)(Run&)> commands = {
      {"linear", cmd_linear},       {"continue-gamma", cmd_continue_gamma}, {"sweep-E", cmd_sweep_E},
      {"spectrum", cmd_spectrum},   {"transition", cmd_transition},         {"evolve", cmd_evolve},
      {"rescale-check", cmd_rescale_check}, {"validate", cmd_validate},
  };
  const std::map<std::string, std::string> help = {
      {"linear", "linear eigenvalues and profiles"},
      {"continue-gamma", "continue branches from the linear problem to gamma = 1 at fixed mass"},
      {"sweep-E", "trace branches in E at gamma = 1"},
      {"spectrum", "L-/L+ counts and JL spectrum at fixed E"},
      {"transition", "sigma_max(E) scan along one branch"},
      {"evolve", "Strang-splitting evolution of a perturbed bound state"},
      {"rescale-check", "large-E slope and rescaled-profile convergence"},
      {"validate", "oracle checks"},
  };

  std::string config_path;
  std::vector<std::string> assignments;
  std::map<std::string, std::string> flag_values;
  const RunConfig defaults = RunConfig::defaults();
  for (const auto& [name, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("-c,--config", config_path, "key=value configuration file");
    sub->add_option("-s,--set", assignments, "override, key=value (repeatable)");
    for (const auto& [key, value] : defaults.values())
      sub->add_option("--" + key, flag_values[key], "default: " + (value.empty() ? std::string("\"\"") : value));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  Run run;
  for (auto* sub : app.get_subcommands()) run.subcommand = sub->get_name();
  try {
    run.config = config_path.empty() ? RunConfig::defaults() : RunConfig::from_file(config_path);
    if (!config_path.empty()) run.inputs.push_back(config_path);
    if (const char* env = std::getenv("SPLAB_OUT_DIR")) run.config.set("out_dir", env);
    for (const auto& a : assignments) run.config.set_assignment(a);
    CLI::App* sub = app.get_subcommand(run.subcommand);
    for (const auto& [key, value] : flag_values)
      if (sub->count("--" + key) > 0) run.config.set(key, value);
    if (sub->count("--branch") > 0) run.config.set("branches", run.config.get_string("branch"));
    run.config.validate();
    if (run.config.get_string("potential") == "table") run.inputs.push_back(run.config.get_string("potential_table"));
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return 2;
  }

  const auto t0 = std::chrono::steady_clock::now();
  int rc = 0;
  std::string error;
  try {
    run.out = fs::path(run.config.get_string("out_dir")) / run.subcommand;
    fs::create_directories(run.out);
    rc = commands.at(run.subcommand)(run);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    error = e.what();
    rc = 1;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  try {
    const std::string id = id_for(run, run.subcommand);
    nlohmann::json m = make_manifest(id, run.subcommand, run.config);
    m["version"] = kVersion;
    m["wall_time_s"] = wall;
    m["inputs"] = run.inputs;
    std::sort(run.outputs.begin(), run.outputs.end());
    m["outputs"] = run.outputs;
    m["results"] = run.extra;
    m["exit_code"] = rc;
    if (!error.empty()) m["error"] = error;
    write_json(run.out / ("manifest_" + id + ".json"), m);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error writing manifest: {}\n", e.what());
    return rc ? rc : 1;
  }
  return rc;
}
