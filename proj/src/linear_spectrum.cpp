#include "splab/linear_spectrum.hpp"

#include <cmath>
#include <string>

#include "splab/errors.hpp"

namespace splab {

namespace {

struct Pencil {
  SymTridiag A;
  SymTridiag B;
};

Pencil linear_pencil(const AssembledOperators& ops) { return {ops.K_dir() + ops.V_dir(), ops.M_dir()}; }

double bisect_eigenvalue(const Pencil& p, int index, double lo, double hi) {
  // invariant: count_below(lo) <= index < count_below(hi)
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (count_below(p.A, p.B, mid) > index)
      hi = mid;
    else
      lo = mid;
    if (hi - lo <= 4e-16 * std::abs(hi)) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

int count_bound_states(const AssembledOperators& ops, double continuum_floor) {
  const Pencil p = linear_pencil(ops);
  return count_below(p.A, p.B, -continuum_floor);
}

std::vector<LinearEigenpair> solve_linear_states(const AssembledOperators& ops, int k, double continuum_floor) {
  if (k < 1) throw DomainError("solve_linear_states: k must be >= 1");
  const Pencil p = linear_pencil(ops);
  const int found = count_below(p.A, p.B, -continuum_floor);
  if (found < k)
    throw InsufficientDomainError("solve_linear_states: requested " + std::to_string(k) + " bound states, " +
                                      std::to_string(found) + " resolved on r_max = " +
                                      std::to_string(ops.mesh.r_max()),
                                  found);

  double lo = -1.0;
  while (count_below(p.A, p.B, lo) > 0) lo *= 2.0;

  const Eigen::Index n = p.A.size();
  std::vector<LinearEigenpair> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const double lam = bisect_eigenvalue(p, i, lo, -continuum_floor);
    const double shift = lam + 1e-12 * std::abs(lam);
    Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
    for (int it = 0; it < 4; ++it) {
      x = solve_shifted(p.A, p.B, shift, p.B * x);
      x /= std::sqrt(p.B.quad(x));
    }
    if (x(0) < 0.0) x = -x;

    LinearEigenpair pair;
    pair.eigenvalue = lam;
    pair.vector = Eigen::VectorXd::Zero(n + 1);
    pair.vector.head(n) = x;
    pair.nodes = count_zero_crossings(pair.vector);
    out.push_back(std::move(pair));
    lo = lam;
  }
  return out;
}

void sturm_check(std::span<const LinearEigenpair> pairs, double simplicity_tol) {
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    const auto& a = pairs[i - 1];
    const auto& b = pairs[i];
    const double gap = std::abs(b.eigenvalue - a.eigenvalue);
    if (gap <= simplicity_tol * std::max(std::abs(a.eigenvalue), std::abs(b.eigenvalue)))
      throw SpectralStructureError("sturm_check: eigenvalues " + std::to_string(i - 1) + " and " +
                                   std::to_string(i) + " coincide (not simple)");
    if (b.eigenvalue < a.eigenvalue)
      throw SpectralStructureError("sturm_check: pairs not ordered at index " + std::to_string(i));
    if (b.nodes < a.nodes + 1)
      throw SpectralStructureError("sturm_check: pair " + std::to_string(i) + " has " + std::to_string(b.nodes) +
                                   " nodes, expected more than " + std::to_string(a.nodes));
  }
}

}  // namespace splab
