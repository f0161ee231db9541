#include <doctest.h>

#include <cmath>

#include "../oracles/shooting.hpp"
#include "splab/branch.hpp"
#include "splab/errors.hpp"
#include "splab/pipeline.hpp"

using namespace splab;

TEST_CASE("first-order right-hand side") {
  const Potential V = Potential::smoothed_exponential();
  const State5 d = first_order_rhs({1, 0, 0, 0, 0}, 1.0, 0.0, 0.5, V);
  CHECK(d[0] == 0.0);
  CHECK(d[1] == doctest::Approx(0.051819).epsilon(1e-5));
  CHECK(d[2] == 0.0);
  CHECK(d[3] == doctest::Approx(-1.0));
  CHECK(d[4] == doctest::Approx(1.0));
  const State5 z = first_order_rhs({0, 0, 0, 0, 0}, 2.0, 1.0, 0.5, V);
  for (double x : z) CHECK(x == 0.0);
  const State5 g0 = first_order_rhs({1, 0, 0.3, 0, 0}, 1.0, 0.0, 0.5, V);
  const State5 g1 = first_order_rhs({1, 0, 0.3, 0, 0}, 1.0, 1.0, 0.5, V);
  CHECK(g0[1] - g1[1] == doctest::Approx(0.3));
  CHECK_THROWS_AS(first_order_rhs({1, 0, 0, 0, 0}, 0.0, 0.0, 0.5, V), DomainError);
}

TEST_CASE("boundary residuals") {
  BvpParameters fe;
  fe.mode = BvpMode::FixedE;
  fe.E = 0.3;
  const Eigen::VectorXd r0 = boundary_residuals({0, 0, 0, 0, 0}, {0, 0, 0, 0, 0}, 100.0, 0.3, 1.0, fe);
  CHECK(r0.size() == 5);
  CHECK(r0.cwiseAbs().maxCoeff() == 0.0);
  BvpParameters fm;
  fm.target_mass = 1.0;
  const Eigen::VectorXd r1 = boundary_residuals({0, 0, 0, 0, 0}, {0, 0, 0, 0, 2}, 100.0, 0.3, 1.0, fm);
  CHECK(r1.size() == 6);
  CHECK(r1(3) == doctest::Approx(1.0));
  CHECK_THROWS_AS(boundary_residuals({0, 0, 0, 0, 0}, {0, 0, 0, 0, 0}, 100.0, 0.0, 1.0, fe), DomainError);
  // E = 1, Z = 1, γ m = 1: c = 1/R + 1 - 2/(2R) = 1
  CHECK(far_field_robin_coefficient(100.0, 1.0, 1.0, 1.0, 1.0) == doctest::Approx(1.0));
}

struct Fixture {
  Potential V = Potential::smoothed_exponential();
  Stage stage{V, 2000, 100.0};
  std::vector<LinearEigenpair> pairs = solve_linear_states(stage.ops, 4);
};

TEST_CASE("linear seed satisfies the fixed-mass problem at gamma = 0") {
  Fixture f;
  const BoundState seed = seed_from_linear(f.pairs[0], f.stage.ops, f.stage.mesh, f.V);
  BvpParameters p;
  p.gamma = 0.0;
  // the P1 slope at the first node limits this to the mesh error
  CHECK(f.stage.bvp.scaled_residual(seed, p) < 1e-2);
  const BoundState s = f.stage.bvp.solve(seed, p);
  CHECK(std::abs(s.E - f.pairs[0].E()) <= 1e-5 * f.pairs[0].E());
  CHECK(s.mass == doctest::Approx(1.0).epsilon(1e-12));

  // independent oracle: shooting on the continuous problem
  const oracle::Shooter shoot([&](double r) { return f.V(r); }, 100.0, 200000);
  CHECK(s.E == doctest::Approx(shoot.state(0, 1e-6, 0.6).E).epsilon(1e-8));
}

TEST_CASE("gamma continuation of the ground state") {
  Fixture f;
  const GammaPath path = continue_branch(f.stage, f.pairs[0]);
  const BoundState& s = path.final_state();
  CHECK(s.gamma == 1.0);
  CHECK(s.branch == 0);
  CHECK(count_zero_crossings(s.u) == 0);
  CHECK(s.mass == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(s.E > f.pairs[0].E());
  CHECK(path.states.size() == 21);
  for (const auto& st : path.states) CHECK(st.branch == 0);

  // doubled mesh agrees
  const Stage fine(f.V, 4000, 100.0);
  const auto fp = solve_linear_states(fine.ops, 1);
  CHECK(continue_branch(fine, fp[0]).final_state().E == doctest::Approx(s.E).epsilon(1e-6));
}

TEST_CASE("higher branches keep their crossing count") {
  Fixture f;
  const auto pairs = solve_linear_states(f.stage.ops, 5);
  const BoundState s = continue_branch(f.stage, pairs[4]).final_state();
  CHECK(s.branch == 4);
  CHECK(count_zero_crossings(s.u) == 4);
}

TEST_CASE("coupling scaling: sqrt(gamma) u_gamma solves gamma = 1 at mass gamma") {
  Fixture f;
  GammaContinuationOptions o;
  o.step = 0.05;
  const GammaPath path = continue_branch(f.stage, f.pairs[0], o);
  const BoundState* quarter = nullptr;
  for (const auto& s : path.states)
    if (std::abs(s.gamma - 0.25) < 1e-12) quarter = &s;
  REQUIRE(quarter != nullptr);

  BoundState guess = *quarter;
  guess.u *= 0.5;
  guess.v *= 0.5;
  guess.w *= 0.25;
  guess.z *= 0.25;
  guess.m *= 0.25;
  guess.mass *= 0.25;
  guess.gamma = 1.0;
  BvpParameters p;
  p.gamma = 1.0;
  p.target_mass = 0.25;
  const BoundState s = f.stage.bvp.solve(guess, p);
  CHECK(s.E == doctest::Approx(quarter->E).epsilon(1e-10));
  CHECK((s.u - 0.5 * quarter->u).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("degenerate guess fails to converge") {
  Fixture f;
  BoundState zero = seed_from_linear(f.pairs[0], f.stage.ops, f.stage.mesh, f.V);
  zero.u.setZero();
  zero.v.setZero();
  zero.w.setZero();
  zero.z.setZero();
  zero.m.setZero();
  zero.mass = 0.0;
  BvpParameters p;
  CHECK_THROWS_AS(f.stage.bvp.solve(zero, p), ConvergenceError);
}
