#include <doctest.h>

#include <cmath>
#include <random>

#include "splab/errors.hpp"
#include "splab/lapack.hpp"
#include "splab/pipeline.hpp"

using namespace splab;

namespace {

struct States {
  Potential V = Potential::smoothed_exponential();
  Stage stage{V, 600, 100.0};
  std::vector<LinearEigenpair> pairs = solve_linear_states(stage.ops, 4);
  std::vector<BoundState> at_one;
  States() {
    for (int j = 0; j < 4; ++j) at_one.push_back(state_at_E(stage, continue_branch(stage, pairs[j]).final_state(), 1.0));
  }
};

States& states() {
  static States s;
  return s;
}

}  // namespace

TEST_CASE("nonlocal matrix T") {
  const States& st = states();
  const auto n = st.stage.ops.nodes();
  CHECK(assemble_T(st.stage.ops, Eigen::VectorXd::Zero(n)).cwiseAbs().maxCoeff() == 0.0);

  const FemBoundState fem = polish_fem_state(st.stage.ops, st.at_one[1]);
  const Eigen::MatrixXd T = assemble_T(st.stage.ops, fem.u);
  CHECK((T - T.transpose()).norm() / T.norm() < 1e-12);

  std::mt19937 rng(7);
  std::normal_distribution<double> nd;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) x(i) = nd(rng);
  const SymTridiag U = weighted_overlap(st.stage.mesh, fem.u);
  const Eigen::VectorXd psi = st.stage.ops.K_rob_factor.solve(Eigen::VectorXd(U * x));
  const Eigen::VectorXd Tx = Eigen::VectorXd(U * psi).head(n - 1);
  CHECK((T * x.head(n - 1) - Tx).cwiseAbs().maxCoeff() < 1e-10 * Tx.cwiseAbs().maxCoeff());
}

TEST_CASE("negative counts and the bound-state kernel of L-") {
  const States& st = states();
  for (int j = 0; j < 4; ++j) {
    const FemBoundState fem = polish_fem_state(st.stage.ops, st.at_one[j]);
    const LinearizationMatrices lin = linearize(st.stage.ops, fem);
    const NegativeCounts c = negative_counts(lin);
    CHECK(c.n_minus == j);
    CHECK(c.n_plus == j + 1);
    const LpmSpectrum full = spectra_Lpm(lin);
    CHECK(full.n_minus == j);
    CHECK(full.n_plus == j + 1);
    // ‖L₋u‖_{M⁻¹} / ‖u‖_M
    const Eigen::VectorXd r = lin.L_minus * lin.u;
    const Eigen::VectorXd Minv_r = TridiagCholesky(lin.M).solve(r);
    CHECK(std::sqrt(r.dot(Minv_r) / lin.M.quad(lin.u)) < 1e-6);
  }
}

TEST_CASE("JL spectra at E = 1") {
  const States& st = states();
  for (int j = 0; j < 4; ++j) {
    const LinearizationMatrices lin = linearize(st.stage.ops, polish_fem_state(st.stage.ops, st.at_one[j]));
    const JLSpectrum full = spectrum_JL(lin);
    CHECK(full.symmetry_error < 1e-8);
    if (j == 0) {
      CHECK(full.sigma_max < 1e-6 * 2.0);
      CHECK(full.quartets.empty());
    } else {
      CHECK(full.quartets.size() >= 1);
      CHECK(full.sigma_max > unstable_threshold(1.0));
    }
    // the reduced form agrees near the origin
    const JLSpectrum red = spectrum_JL_reduced(lin);
    CHECK(red.quartets.size() == full.quartets.size());
    CHECK(std::abs(red.sigma_max - full.sigma_max) <= 1e-6 * full.sigma_max + 1e-9);
  }
}

TEST_CASE("JL of the zero state is the imaginary linear spectrum") {
  const States& st = states();
  const double E = 0.5;
  const LinearizationMatrices lin = linearize(st.stage.ops, Eigen::VectorXd::Zero(st.stage.ops.nodes()), E);
  const JLSpectrum spec = spectrum_JL(lin);
  CHECK(spec.sigma_max < 1e-8);
  const Eigen::VectorXd mu = generalized_symmetric_eigenvalues(lin.L_minus.dense(), lin.M.dense());
  // smallest |λ| is the smallest |μ| = |E - E_0|
  double min_l = INFINITY;
  for (const auto& l : spec.eigenvalues) min_l = std::min(min_l, std::abs(l.imag()));
  CHECK(min_l == doctest::Approx(mu.cwiseAbs().minCoeff()).epsilon(1e-8));
  CHECK(mu.minCoeff() == doctest::Approx(E - st.pairs[0].E()).epsilon(1e-8));
}

TEST_CASE("classification") {
  CHECK(classify(0, 1, 1, 0.0, 1.0) == Verdict::OrbitallyStable);
  CHECK(classify(1, 2, 1, 0.07, 1.0) == Verdict::LinearlyUnstable);
  CHECK(classify(1, 2, 1, 0.0, 0.1) == Verdict::Inconclusive);
  CHECK(classify(0, 1, 0, 0.0, 1.0) == Verdict::OrbitallyUnstable);
  CHECK_THROWS_AS(classify(-1, 1, 1, 0.0, 1.0), DomainError);
  CHECK(to_string(Verdict::Inconclusive) == "inconclusive");
}

TEST_CASE("unstable bound") {
  const States& st = states();
  const PotentialNorms norms = potential_norms(st.V);
  BoundState zero = st.at_one[1];
  zero.u.setZero();
  zero.v.setZero();
  CHECK(unstable_bound(zero, norms).bound == 0.0);

  const StabilityReport r = analyze_stability(st.stage, st.at_one[1], 1, {});
  CHECK(r.verdict == Verdict::LinearlyUnstable);
  CHECK(r.jl.sigma_max <= r.bound.bound);
  const StabilityReport r0 = analyze_stability(st.stage, st.at_one[0], 1, {});
  CHECK(r0.verdict == Verdict::OrbitallyStable);
}
