#include "splab/pipeline.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "splab/errors.hpp"

namespace splab {

Potential tabulated_coulomb(double Z, double r_max, int points) {
  if (!(Z > 0.0) || !(r_max > 1e-8) || points < 2) throw DomainError("tabulated_coulomb: invalid arguments");
  std::vector<double> r(static_cast<std::size_t>(points)), v(r.size());
  const double a = std::log(1e-8), b = std::log(r_max);
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
    v[i] = -Z / r[i];
  }
  r.back() = r_max;
  v.back() = -Z / r_max;
  return Potential::tabulated(std::move(r), std::move(v));
}

Potential load_potential_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("field 'potential_table': cannot read " + path);
  std::vector<double> r, v;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double a, b;
    if (!(row >> a >> b)) throw ConfigError("field 'potential_table': malformed row '" + line + "'");
    r.push_back(a);
    v.push_back(b);
  }
  return Potential::tabulated(std::move(r), std::move(v));
}

Potential potential_from_config(const RunConfig& config) {
  const std::string kind = config.get_string("potential");
  const double Z = config.get_double("Z");
  if (kind == "smoothed") return Potential::smoothed_exponential(Z);
  if (kind == "coulomb-table") return tabulated_coulomb(Z, config.get_double("r_max"));
  if (kind == "table") return load_potential_table(config.get_string("potential_table"));
  if (kind == "zero") return Potential::zero();
  throw ConfigError("field 'potential': unknown kind '" + kind + "'");
}

Stage::Stage(Potential V_, std::size_t n, double r_max)
    : V(std::move(V_)), mesh(build_sinh_mesh(n, r_max)), ops(assemble(mesh, V)), bvp(mesh, V) {}

GammaPath continue_branch(const Stage& stage, const LinearEigenpair& pair, const GammaContinuationOptions& opts) {
  return gamma_continuation(stage.bvp, seed_from_linear(pair, stage.ops, stage.mesh, stage.V), opts);
}

BoundState state_at_E(const Stage& stage, const BoundState& start, double E, const SweepOptions& opts,
                      int per_decade) {
  if (start.E == E) return start;
  BranchCurve c = sweep_E(stage.bvp, start, geometric_grid(start.E, E, per_decade), opts);
  for (auto& s : c.samples)
    if (s.E == E) return std::move(s.state);
  throw ConvergenceError("sweep from E = " + format_double(start.E) + " to E = " + format_double(E) +
                             " stopped: " + c.stop_reason,
                         NAN);
}

int local_p(const Stage& stage, const BoundState& s, double rel, const SweepOptions& opts) {
  const BranchCurve c = sweep_E(stage.bvp, s, {s.E * (1.0 - rel)}, opts);
  const BranchCurve d = sweep_E(stage.bvp, s, {s.E * (1.0 + rel)}, opts);
  if (c.samples.size() < 2 || d.samples.size() < 2)
    throw ConvergenceError("local slope solve failed near E = " + format_double(s.E), NAN);
  return d_second_sign(std::vector<double>{c.samples.front().mass, s.mass, d.samples.back().mass});
}

StabilityReport analyze_stability(const Stage& stage, const BoundState& s, int p, const StabilityOptions& opts) {
  StabilityReport r;
  r.p = p;
  r.fem = polish_fem_state(stage.ops, s);
  const LinearizationMatrices lin = linearize(stage.ops, r.fem);
  if (opts.full_lpm) {
    r.lpm = spectra_Lpm(lin);
    r.counts = {r.lpm->n_minus, r.lpm->n_plus};
    if (r.lpm->kernel_warning)
      r.warnings.push_back("L+ has an eigenvalue within 1e-8 of its norm of zero; counts may be unreliable");
  } else {
    r.counts = negative_counts(lin);
  }
  r.jl = opts.full_jl ? spectrum_JL(lin) : spectrum_JL_reduced(lin);
  r.verdict = classify(r.counts.n_minus, r.counts.n_plus, p, r.jl.sigma_max, s.E);
  r.bound = unstable_bound(s, potential_norms(stage.V), opts.constants);
  if (r.jl.sigma_max > r.bound.bound)
    r.warnings.push_back("measured sigma_max exceeds the analytic bound");
  return r;
}

namespace {

TransitionRow transition_row(const Stage& stage, const BoundState& s, const PotentialNorms& norms,
                             const BoundConstants& c) {
  const FemBoundState fem = polish_fem_state(stage.ops, s);
  const JLSpectrum jl = spectrum_JL_reduced(linearize(stage.ops, fem));
  TransitionRow row;
  row.E = s.E;
  row.sigma_max = jl.sigma_max;
  row.mass = s.mass;
  row.bound = unstable_bound(s, norms, c).bound;
  row.quartets = static_cast<int>(jl.quartets.size());
  row.real_pairs = static_cast<int>(jl.real_pairs.size());
  return row;
}

bool unstable(const TransitionRow& r) { return r.sigma_max > unstable_threshold(r.E); }

}  // namespace

TransitionReport transition_scan(const Stage& stage, const BoundState& start, const TransitionOptions& opts) {
  if (!(opts.E_from > 0.0 && opts.E_to > opts.E_from && opts.E_step > 0.0 && opts.tolerance > 0.0))
    throw ConfigError("transition scan: need 0 < E_from < E_to, positive step and tolerance");
  std::vector<double> grid;
  const int count = static_cast<int>(std::floor((opts.E_to - opts.E_from) / opts.E_step + 1e-9));
  for (int k = 0; k <= count; ++k) grid.push_back(opts.E_from + k * opts.E_step);
  if (grid.back() < opts.E_to - 1e-12) grid.push_back(opts.E_to);

  std::vector<double> down, up;
  for (double E : grid) (E < start.E ? down : up).push_back(E);
  std::reverse(down.begin(), down.end());

  std::vector<BranchSample> samples;
  for (const auto* part : {&down, &up}) {
    if (part->empty()) continue;
    BranchCurve c = sweep_E(stage.bvp, start, *part, opts.sweep);
    for (auto& s : c.samples)
      if (std::find(grid.begin(), grid.end(), s.E) != grid.end()) samples.push_back(std::move(s));
    if (!c.stop_reason.empty())
      throw ConvergenceError("transition scan sweep stopped: " + c.stop_reason, NAN);
  }
  std::sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) { return a.E < b.E; });

  const PotentialNorms norms = potential_norms(stage.V);
  TransitionReport rep;
  for (const auto& s : samples) rep.rows.push_back(transition_row(stage, s.state, norms, opts.constants));

  for (std::size_t k = 0; k + 1 < rep.rows.size(); ++k) {
    if (unstable(rep.rows[k]) || !unstable(rep.rows[k + 1])) continue;
    BoundState lo = samples[k].state;
    double hi_E = samples[k + 1].E;
    while (hi_E - lo.E > opts.tolerance) {
      const double mid = 0.5 * (lo.E + hi_E);
      BoundState s = state_at_E(stage, lo, mid, opts.sweep);
      const TransitionRow row = transition_row(stage, s, norms, opts.constants);
      rep.rows.push_back(row);
      if (unstable(row)) hi_E = mid;
      else lo = std::move(s);
    }
    rep.crossing_found = true;
    rep.bracket_lo = lo.E;
    rep.bracket_hi = hi_E;
    rep.crossing_E = 0.5 * (lo.E + hi_E);
    break;
  }
  std::sort(rep.rows.begin(), rep.rows.end(), [](const auto& a, const auto& b) { return a.E < b.E; });
  return rep;
}

EvolutionRun run_evolution(const Potential& V, const BoundState& s, const EvolutionSetup& setup) {
  const RadialMesh mesh = build_sinh_mesh(setup.n, setup.r_max);
  const EvolutionSystem sys(mesh, V, setup.dt);
  EvolutionRun run;
  run.E = s.E;
  run.profile = polish_semidiscrete_state(sys, farfield_extend(s, V.charge(), mesh.nodes()), s.E);
  if (setup.strang_ic) run.profile = polish_strang_state(sys, run.profile, s.E);
  run.result = evolve(sys, perturbed_ic(mesh, run.profile, setup.eps), setup.evolve);
  return run;
}

void run_parallel(std::vector<std::function<void()>> tasks, int workers) {
  workers = std::max(1, std::min<int>(workers, static_cast<int>(tasks.size())));
  if (workers == 1) {
    for (auto& t : tasks) t();
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < tasks.size(); i = next++) {
        try {
          tasks[i]();
        } catch (...) {
          std::lock_guard lock(mu);
          if (!first) first = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

CsvTable profile_table(const BoundState& s) {
  CsvTable t;
  t.schema = kProfileSchema;
  t.comments = {"branch=" + std::to_string(s.branch), "gamma=" + format_double(s.gamma),
                "E=" + format_double(s.E), "mass=" + format_double(s.mass),
                "residual=" + format_double(s.residual)};
  t.columns = {"r", "u", "v", "w", "z", "m"};
  for (std::size_t i = 0; i < s.mesh.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    t.add_row({format_double(s.mesh[i]), format_double(s.u(k)), format_double(s.v(k)), format_double(s.w(k)),
               format_double(s.z(k)), format_double(s.m(k))});
  }
  return t;
}

BoundState profile_from_table(const CsvTable& t) {
  auto meta = [&](const std::string& key) {
    for (const auto& c : t.comments)
      if (c.rfind(key + "=", 0) == 0) return std::stod(c.substr(key.size() + 1));
    throw DomainError("profile table lacks '" + key + "'");
  };
  if (t.columns != std::vector<std::string>{"r", "u", "v", "w", "z", "m"})
    throw DomainError("profile table has unexpected columns");
  const auto n = static_cast<Eigen::Index>(t.rows.size());
  std::vector<double> r(t.rows.size());
  BoundState s;
  s.u.resize(n), s.v.resize(n), s.w.resize(n), s.z.resize(n), s.m.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = t.rows[static_cast<std::size_t>(i)];
    if (row.size() != 6) throw DomainError("profile table row has the wrong width");
    r[static_cast<std::size_t>(i)] = std::stod(row[0]);
    s.u(i) = std::stod(row[1]);
    s.v(i) = std::stod(row[2]);
    s.w(i) = std::stod(row[3]);
    s.z(i) = std::stod(row[4]);
    s.m(i) = std::stod(row[5]);
  }
  s.mesh = RadialMesh(std::move(r));
  s.branch = static_cast<int>(meta("branch"));
  s.gamma = meta("gamma");
  s.E = meta("E");
  s.mass = meta("mass");
  s.residual = meta("residual");
  return s;
}

CsvTable branch_table() {
  CsvTable t;
  t.schema = kBranchSchema;
  t.columns = {"branch", "gamma", "E", "mass", "n_nodes", "residual"};
  return t;
}

void add_branch_row(CsvTable& t, const BoundState& s) {
  t.add_row({std::to_string(s.branch), format_double(s.gamma), format_double(s.E), format_double(s.mass),
             std::to_string(count_zero_crossings(s.u)), format_double(s.residual)});
}

CsvTable spectrum_table(const StabilityReport& r) {
  CsvTable t;
  t.schema = kSpectrumSchema;
  t.comments = {"E=" + format_double(r.fem.E), "branch=" + std::to_string(r.fem.branch),
                std::string("jl_form=") + (r.jl.reduced ? "reduced" : "full")};
  t.columns = {"operator", "re", "im"};
  if (r.lpm) {
    for (double x : r.lpm->minus) t.add_row({"L-", format_double(x), "0"});
    for (double x : r.lpm->plus) t.add_row({"L+", format_double(x), "0"});
  }
  for (const auto& l : r.jl.eigenvalues) t.add_row({"JL", format_double(l.real()), format_double(l.imag())});
  return t;
}

CsvTable trace_table(const EvolutionResult& r) {
  CsvTable t;
  t.schema = kTraceSchema;
  t.comments = {"max_mass_drift=" + format_double(r.trace.max_mass_drift),
                "max_energy_drift=" + format_double(r.trace.max_energy_drift),
                "max_modulus_deviation=" + format_double(r.max_modulus_deviation)};
  t.columns = {"t", "mass", "energy", "boundary_mag"};
  for (std::size_t i = 0; i < r.trace.t.size(); ++i)
    t.add_row({format_double(r.trace.t[i]), format_double(r.trace.mass[i]), format_double(r.trace.energy[i]),
               format_double(r.trace.boundary_mag[i])});
  return t;
}

CsvTable snapshot_table(const EvolutionResult& r) {
  CsvTable t;
  t.schema = kSnapshotSchema;
  t.comments = {"rows=time, columns=|phi| at the listed radii (float32)"};
  t.columns.push_back("t");
  for (double x : r.sample_radii) t.columns.push_back("r=" + format_double(x));
  for (std::size_t i = 0; i < r.snapshots.size(); ++i) {
    std::vector<std::string> row{format_double(r.snapshot_t[i])};
    for (float x : r.snapshots[i]) row.push_back(fmt::format("{:.9g}", x));
    t.add_row(std::move(row));
  }
  return t;
}

}  // namespace splab
