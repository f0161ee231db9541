#include <doctest.h>

#include <cmath>

#include "../oracles/shooting.hpp"
#include "splab/errors.hpp"
#include "splab/linear_spectrum.hpp"
#include "splab/pipeline.hpp"

using namespace splab;

TEST_CASE("linear spectrum of the smoothed potential against Numerov shooting") {
  const Potential V = Potential::smoothed_exponential();
  const AssembledOperators ops = assemble(build_sinh_mesh(4000, 100.0), V);
  CHECK(count_bound_states(ops) >= 4);
  const auto pairs = solve_linear_states(ops, 4);
  const oracle::Shooter shoot([&](double r) { return V(r); }, 100.0, 200000);
  double upper = 0.6;
  for (int j = 0; j < 4; ++j) {
    CHECK(pairs[j].nodes == j);
    CHECK(count_zero_crossings(pairs[j].vector) == j);
    const double E = shoot.state(j, 1e-6, upper).E;
    CHECK(pairs[j].E() == doctest::Approx(E).epsilon(1e-5));
    upper = E;
  }
  CHECK_NOTHROW(sturm_check(pairs));
}

TEST_CASE("hydrogen from a tabulated Coulomb potential") {
  const AssembledOperators ops = assemble(build_sinh_mesh(4000, 100.0), tabulated_coulomb(1.0, 100.0));
  const auto pairs = solve_linear_states(ops, 2);
  CHECK(std::abs(pairs[0].eigenvalue + 0.25) <= 1e-4);
  CHECK(std::abs(pairs[1].eigenvalue + 0.0625) <= 1e-4);
  CHECK(pairs[1].nodes == 1);
}

TEST_CASE("no bound states without a potential") {
  const AssembledOperators ops = assemble(build_sinh_mesh(500, 100.0), Potential::zero());
  CHECK(count_bound_states(ops) == 0);
  CHECK_THROWS_AS(solve_linear_states(ops, 1), InsufficientDomainError);
}

TEST_CASE("sturm check") {
  const AssembledOperators ops = assemble(build_sinh_mesh(1000, 100.0), Potential::smoothed_exponential());
  auto pairs = solve_linear_states(ops, 3);
  CHECK_NOTHROW(sturm_check(std::span(pairs).first(1)));
  auto dup = pairs;
  dup[1] = dup[0];
  CHECK_THROWS_AS(sturm_check(dup), SpectralStructureError);
}
