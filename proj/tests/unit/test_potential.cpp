#include <doctest.h>

#include <cmath>

#include "splab/errors.hpp"
#include "splab/potential.hpp"

using namespace splab;

TEST_CASE("smoothed potential values") {
  const Potential V = Potential::smoothed_exponential();
  CHECK(V(0.0) == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(V(1e-9) == doctest::Approx(-0.5).epsilon(1e-8));
  CHECK(V(1.0) == doctest::Approx(0.5 * std::exp(-1.0) - (1.0 - std::exp(-1.0))).epsilon(1e-14));
  CHECK(V(1.0) == doctest::Approx(-0.448181).epsilon(1e-6));
  CHECK(1e6 * V(1e6) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(V.charge() == 1.0);
}

TEST_CASE("r V' matches a centered difference") {
  const Potential V = Potential::smoothed_exponential(2.0);
  for (double r : {0.01, 0.5, 1.0, 3.0, 10.0, 40.0}) {
    const double h = 1e-5 * r;
    const double fd = r * (V(r + h) - V(r - h)) / (2 * h);
    CHECK(V.r_dV(r) == doctest::Approx(fd).epsilon(1e-7));
  }
  CHECK(V.r_dV(0.0) == 0.0);
}

TEST_CASE("potential norms") {
  const PotentialNorms n = potential_norms(Potential::smoothed_exponential());
  CHECK(n.sup_abs_V == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::isfinite(n.sup_abs_rdV));
  CHECK(n.sup_abs_rdV > 0.0);
  CHECK(n.argmax_rdV > 0.0);
  CHECK(n.argmax_rdV < 1e4);

  const PotentialNorms z = potential_norms(Potential::tabulated({0.0, 1.0, 2.0}, {0.0, 0.0, 0.0}));
  CHECK(z.sup_abs_V == 0.0);
  CHECK(z.sup_abs_rdV == 0.0);
  CHECK_THROWS_AS(potential_norms(Potential::coulomb(1.0)), DomainError);
}

TEST_CASE("tabulated potential interpolates and continues as a Coulomb tail") {
  const Potential V = Potential::tabulated({0.0, 1.0, 2.0}, {-1.0, -0.5, -0.25});
  CHECK(V(0.5) == doctest::Approx(-0.75));
  CHECK(V(4.0) == doctest::Approx(-0.125));
  CHECK(V.charge() == doctest::Approx(0.5));
  CHECK_THROWS_AS(Potential::tabulated({0.0, 0.0}, {1.0, 1.0}), DomainError);
  CHECK_THROWS_AS(Potential::tabulated({0.0}, {1.0}), DomainError);
}

TEST_CASE("hydrogen reference") {
  const HydrogenState h1 = hydrogen_reference(1, 1.0);
  CHECK(h1.E() == doctest::Approx(0.25));
  for (double r : {0.0, 1.0, 5.0}) CHECK(h1.value(r) / h1.value(0.0) == doctest::Approx(std::exp(-r / 2)));
  CHECK(hydrogen_reference(2, 1.0).E() == doctest::Approx(0.0625));
  CHECK(hydrogen_reference(1, 2.0).E() == doctest::Approx(1.0));

  // radial equation -u'' - (2/r)u' - (Z/r)u = -E u
  for (int n = 1; n <= 3; ++n) {
    const HydrogenState h = hydrogen_reference(n, 1.5);
    for (double r : {0.3, 1.7, 6.0, 15.0}) {
      const double lhs = -h.d2(r) - 2.0 / r * h.d1(r) - 1.5 / r * h.value(r);
      CHECK(lhs == doctest::Approx(-h.E() * h.value(r)).scale(std::abs(h.value(0.0))).epsilon(1e-10));
    }
  }
}
