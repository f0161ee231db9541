#include <doctest.h>

#include <cmath>
#include <vector>

#include "splab/errors.hpp"
#include "splab/fem.hpp"
#include "splab/linear_spectrum.hpp"

using namespace splab;

TEST_CASE("sinh mesh") {
  const RadialMesh m = build_sinh_mesh(4, 100.0);
  REQUIRE(m.size() == 5);
  CHECK(std::asinh(100.0) / 4 == doctest::Approx(1.3245855).epsilon(1e-7));
  CHECK(m[0] == 0.0);
  CHECK(m[1] == doctest::Approx(1.7475).epsilon(1e-4));
  CHECK(m[2] == doctest::Approx(7.0364).epsilon(1e-4));
  CHECK(m[3] == doctest::Approx(26.5826).epsilon(1e-4));
  CHECK(m[4] == 100.0);
  CHECK(build_sinh_mesh(4000, 100.0).r_max() == 100.0);
  CHECK_THROWS_AS(build_sinh_mesh(1, 100.0), ConfigError);
  CHECK_THROWS_AS(build_sinh_mesh(10, -1.0), ConfigError);
  CHECK(m.locate(0.0) == 0);
  CHECK(m.locate(8.0) == 2);
  CHECK(m.locate(1e9) == 3);
}

TEST_CASE("P1 operators integrate r^2 exactly") {
  const RadialMesh mesh = build_sinh_mesh(300, 100.0);
  const AssembledOperators ops = assemble(mesh, Potential::smoothed_exponential());
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(ops.nodes());
  CHECK(ops.M_full.quad(one) == doctest::Approx(1e6 / 3.0).epsilon(1e-13));
  CHECK((ops.K_full * one).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(ops.interior() == 300);
}

TEST_CASE("stiffness entry on a two-element uniform mesh") {
  const AssembledOperators ops = assemble(build_uniform_mesh(2, 2.0), Potential::zero());
  CHECK(ops.K_full.diag(1) == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
  CHECK(ops.V_dir().dense().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("weighted overlap") {
  const RadialMesh mesh = build_sinh_mesh(50, 20.0);
  const auto n = static_cast<Eigen::Index>(mesh.size());
  const AssembledOperators ops = assemble(mesh, Potential::zero());
  CHECK(weighted_overlap(mesh, Eigen::VectorXd::Zero(n)).dense().cwiseAbs().maxCoeff() == 0.0);
  CHECK((weighted_overlap(mesh, Eigen::VectorXd::Ones(n)).dense() - ops.M_full.dense()).cwiseAbs().maxCoeff() <
        1e-12 * ops.M_full.dense().cwiseAbs().maxCoeff());
  // hat function φ_k: row sums of U(φ_k) are ∫ φ_k² r² dr
  const Eigen::Index k = 17;
  const Eigen::VectorXd hat = Eigen::VectorXd::Unit(n, k);
  const Eigen::VectorXd rows = weighted_overlap(mesh, hat).dense().rowwise().sum();
  auto exact_piece = [](double a, double b, bool rising) {
    // ∫_a^b t² r² dr with t the linear hat coordinate, in closed form via 5-point Gauss (exact to degree 9)
    const double xs[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640};
    const double ws[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                          0.2369268850561891};
    double s = 0.0;
    for (int q = 0; q < 5; ++q) {
      const double r = 0.5 * (a + b) + 0.5 * (b - a) * xs[q];
      const double t = rising ? (r - a) / (b - a) : (b - r) / (b - a);
      s += 0.5 * (b - a) * ws[q] * t * t * r * r;
    }
    return s;
  };
  const double expect = exact_piece(mesh[k - 1], mesh[k], true) + exact_piece(mesh[k], mesh[k + 1], false);
  CHECK(rows(k) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("Robin Poisson solve") {
  const RadialMesh mesh = build_sinh_mesh(4000, 100.0);
  const AssembledOperators ops = assemble(mesh, Potential::zero());
  const auto n = static_cast<Eigen::Index>(mesh.size());
  CHECK(poisson_solve_robin(ops, Eigen::VectorXd::Zero(n)).cwiseAbs().maxCoeff() == 0.0);

  // -Δw = e^{-r}: total charge m(∞) = 2, w(r) = 2/r - e^{-r}(1 + 2/r)
  Eigen::VectorXd f(n), exact(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = mesh[static_cast<std::size_t>(i)];
    f(i) = std::exp(-r);
    exact(i) = r == 0.0 ? 1.0 : 2.0 / r - std::exp(-r) * (1.0 + 2.0 / r);
  }
  const Eigen::VectorXd w = poisson_solve_robin(ops, f);
  CHECK((w - exact).cwiseAbs().maxCoeff() < 1e-4);
  CHECK(100.0 * w(n - 1) == doctest::Approx(2.0).epsilon(1e-4));
}

TEST_CASE("far field of the Hartree potential of the ground state") {
  const RadialMesh mesh = build_sinh_mesh(2000, 100.0);
  const AssembledOperators ops = assemble(mesh, Potential::smoothed_exponential());
  const auto pairs = solve_linear_states(ops, 1);
  const Eigen::VectorXd& u = pairs[0].vector;
  CHECK(discrete_mass(ops, u) == doctest::Approx(1.0).epsilon(1e-10));
  const Eigen::VectorXd w = hartree_potential(ops, u);
  CHECK(mesh.r_max() * w(w.size() - 1) == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("energy functional") {
  const RadialMesh mesh = build_sinh_mesh(2000, 100.0);
  const AssembledOperators ops = assemble(mesh, Potential::smoothed_exponential());
  const auto n = static_cast<Eigen::Index>(mesh.size());
  CHECK(discrete_mass(ops, Eigen::VectorXd(Eigen::VectorXd::Zero(n))) == 0.0);
  CHECK(discrete_energy(ops, Eigen::VectorXd(Eigen::VectorXd::Zero(n))) == 0.0);
  const auto pairs = solve_linear_states(ops, 1);
  // the linear part is the Rayleigh quotient of the eigenvector
  CHECK(discrete_linear_energy(ops, pairs[0].vector) == doctest::Approx(pairs[0].eigenvalue).epsilon(1e-10));
  CHECK(discrete_energy(ops, pairs[0].vector) < discrete_linear_energy(ops, pairs[0].vector));
  const Eigen::VectorXcd c = pairs[0].vector.cast<std::complex<double>>() * std::polar(1.0, 0.7);
  CHECK(discrete_energy(ops, c) == doctest::Approx(discrete_energy(ops, pairs[0].vector)).epsilon(1e-13));
}

TEST_CASE("zero crossings") {
  std::vector<double> r, a, b;
  for (int i = 0; i <= 2000; ++i) r.push_back(20.0 * i / 2000.0);
  for (double x : r) a.push_back(std::exp(-x));
  for (double x : r) b.push_back((1.0 - x) * std::exp(-x));
  CHECK(count_zero_crossings(a) == 0);
  CHECK(count_zero_crossings(b) == 1);
  std::vector<double> h3;
  const HydrogenState h = hydrogen_reference(3, 1.0);
  for (int i = 0; i <= 4000; ++i) h3.push_back(h.value(80.0 * i / 4000.0));
  CHECK(count_zero_crossings(h3) == 2);
  CHECK_THROWS_AS(count_zero_crossings(std::vector<double>(5, 0.0)), DomainError);
}
