#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "splab/errors.hpp"
#include "splab/pipeline.hpp"

using namespace splab;

namespace {

Eigen::VectorXcd random_field(Eigen::Index n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::VectorXcd f(n);
  for (Eigen::Index i = 0; i < n; ++i) f(i) = {nd(rng), nd(rng)};
  f(n - 1) = 0.0;
  return f;
}

}  // namespace

TEST_CASE("initial condition") {
  const RadialMesh mesh = build_sinh_mesh(8000, 400.0);
  const auto n = static_cast<Eigen::Index>(mesh.size());
  Eigen::VectorXd u(n);
  for (Eigen::Index i = 0; i < n; ++i) u(i) = std::exp(-mesh[static_cast<std::size_t>(i)] / 3.0);
  u(n - 1) = 0.0;
  CHECK((perturbed_ic(mesh, u, 0.0).phi - u.cast<std::complex<double>>()).cwiseAbs().maxCoeff() == 0.0);
  const EvolutionField f = perturbed_ic(mesh, u, 1e-4);
  const Eigen::VectorXd d = (f.phi - u.cast<std::complex<double>>()).real();
  CHECK(d.maxCoeff() == doctest::Approx(1e-4).epsilon(1e-3));
  const std::vector<double> at10{10.0};
  CHECK(interpolate_linear(mesh, d, at10)(0) == doctest::Approx(1e-4).epsilon(1e-3));
  const EvolutionSystem sys(mesh, Potential::smoothed_exponential(), 0.005);
  const double m0 = sys.mass(u.cast<std::complex<double>>());
  CHECK(std::abs(sys.mass(f.phi) - m0) < 1e-2 * m0);
  CHECK_FALSE(ic_resolution_warning(mesh).has_value());
  CHECK(ic_resolution_warning(build_sinh_mesh(100, 400.0)).has_value());
}

TEST_CASE("substeps") {
  const RadialMesh mesh = build_sinh_mesh(400, 50.0);
  const EvolutionSystem free(mesh, Potential::zero(), 0.01);
  const auto n = static_cast<Eigen::Index>(mesh.size());

  Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(n);
  free.strang_step(zero);
  CHECK(zero.cwiseAbs().maxCoeff() == 0.0);

  Eigen::VectorXcd phi = random_field(n, 3);
  phi /= std::sqrt(free.mass(phi));
  Eigen::VectorXcd psi = phi;
  free.linear_step(psi);
  CHECK(free.mass(psi) == doctest::Approx(1.0).epsilon(1e-13));
  free.linear_step(psi, true);
  CHECK((psi - phi).cwiseAbs().maxCoeff() < 1e-12);

  Eigen::VectorXcd rot = phi;
  free.phase_step(rot, 0.37);
  CHECK((rot.cwiseAbs() - phi.cwiseAbs()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("stationary state keeps its modulus") {
  const Potential V = Potential::smoothed_exponential();
  const Stage stage(V, 1000, 100.0);
  const auto pairs = solve_linear_states(stage.ops, 1);
  const BoundState s = state_at_E(stage, continue_branch(stage, pairs[0]).final_state(), 1.0);
  EvolutionSetup setup;
  setup.n = 2000;
  setup.r_max = 100.0;
  setup.eps = 0.0;
  setup.evolve.t_final = 2.0;
  const EvolutionRun run = run_evolution(V, s, setup);
  CHECK(run.result.max_modulus_deviation / setup.evolve.t_final < 1e-6 * run.result.initial_peak);
  CHECK(run.result.trace.max_mass_drift < 1e-12);
  CHECK(run.result.trace.max_energy_drift < 1e-8);
  CHECK(run.result.snapshots.size() == run.result.snapshot_t.size());
  CHECK(run.result.snapshot_t.back() == doctest::Approx(2.0));

  // the semi-discrete stationary profile is close to the Strang one
  setup.strang_ic = false;
  const EvolutionRun semi = run_evolution(V, s, setup);
  CHECK((semi.profile - run.profile).cwiseAbs().maxCoeff() < 1e-4 * run.result.initial_peak);
}

TEST_CASE("blow-up is reported") {
  const RadialMesh mesh = build_sinh_mesh(200, 50.0);
  const EvolutionSystem sys(mesh, Potential::zero(), 0.01);
  EvolutionField f;
  f.phi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(mesh.size()));
  f.phi(3) = std::complex<double>(NAN, 0.0);
  EvolveOptions o;
  o.t_final = 0.05;
  CHECK_THROWS_AS(evolve(sys, f, o), BlowUpError);
}
