#include "splab/fem.hpp"

#include <algorithm>
#include <cmath>

#include "splab/errors.hpp"

namespace splab {

namespace {

// Per-element quadrature loop: f(r, phi_left, phi_right, jacobian-weight).
template <typename F>
void for_each_gauss_point(const RadialMesh& mesh, std::size_t e, F&& f) {
  const double a = mesh[e];
  const double h = mesh.width(e);
  for (int q = 0; q < 3; ++q) {
    const double t = 0.5 * (Gauss3::x[q] + 1.0);
    const double r = a + t * h;
    f(r, 1.0 - t, t, 0.5 * h * Gauss3::w[q] * r * r);
  }
}

}  // namespace

AssembledOperators assemble(const RadialMesh& mesh, const Potential& V) {
  const auto N = static_cast<Eigen::Index>(mesh.elements());
  AssembledOperators ops{mesh, SymTridiag(N + 1), SymTridiag(N + 1), SymTridiag(N + 1), {}, {}, V.charge()};
  for (Eigen::Index e = 0; e < N; ++e) {
    const auto ue = static_cast<std::size_t>(e);
    const double h = mesh.width(ue);
    double k = 0.0, m00 = 0.0, m01 = 0.0, m11 = 0.0, v00 = 0.0, v01 = 0.0, v11 = 0.0;
    for_each_gauss_point(mesh, ue, [&](double r, double p0, double p1, double wq) {
      k += wq / (h * h);
      m00 += wq * p0 * p0;
      m01 += wq * p0 * p1;
      m11 += wq * p1 * p1;
      const double vr = V(r);
      v00 += wq * vr * p0 * p0;
      v01 += wq * vr * p0 * p1;
      v11 += wq * vr * p1 * p1;
    });
    ops.K_full.diag(e) += k;
    ops.K_full.diag(e + 1) += k;
    ops.K_full.off(e) -= k;
    ops.M_full.diag(e) += m00;
    ops.M_full.diag(e + 1) += m11;
    ops.M_full.off(e) += m01;
    ops.V_full.diag(e) += v00;
    ops.V_full.diag(e + 1) += v11;
    ops.V_full.off(e) += v01;
  }
  ops.K_rob = ops.K_full;
  ops.K_rob.diag(N) += mesh.r_max();
  ops.K_rob_factor = TridiagCholesky(ops.K_rob);
  return ops;
}

SymTridiag weighted_overlap(const RadialMesh& mesh, const Eigen::VectorXd& u) {
  const auto N = static_cast<Eigen::Index>(mesh.elements());
  if (u.size() != N + 1) throw DomainError("weighted_overlap: profile size does not match mesh");
  SymTridiag U(N + 1);
  for (Eigen::Index e = 0; e < N; ++e) {
    double a00 = 0.0, a01 = 0.0, a11 = 0.0;
    for_each_gauss_point(mesh, static_cast<std::size_t>(e), [&](double, double p0, double p1, double wq) {
      const double uh = u(e) * p0 + u(e + 1) * p1;
      a00 += wq * uh * p0 * p0;
      a01 += wq * uh * p0 * p1;
      a11 += wq * uh * p1 * p1;
    });
    U.diag(e) += a00;
    U.diag(e + 1) += a11;
    U.off(e) += a01;
  }
  return U;
}

Eigen::VectorXd poisson_solve_robin(const AssembledOperators& ops, const Eigen::VectorXd& source) {
  if (source.size() != ops.nodes()) throw DomainError("poisson_solve_robin: source size does not match mesh");
  return ops.K_rob_factor.solve(ops.M_full * source);
}

Eigen::VectorXd hartree_potential(const AssembledOperators& ops, const Eigen::VectorXd& u) {
  return ops.K_rob_factor.solve(weighted_overlap(ops.mesh, u) * u);
}

double discrete_mass(const AssembledOperators& ops, const Eigen::VectorXd& u) { return ops.M_full.quad(u); }

double discrete_mass(const AssembledOperators& ops, const Eigen::VectorXcd& u) {
  return u.dot(ops.M_full * u).real();
}

double discrete_linear_energy(const AssembledOperators& ops, const Eigen::VectorXd& u) {
  return ops.K_full.quad(u) + ops.V_full.quad(u);
}

double discrete_energy(const AssembledOperators& ops, const Eigen::VectorXd& u) {
  const Eigen::VectorXd s = weighted_overlap(ops.mesh, u) * u;
  return discrete_linear_energy(ops, u) - 0.5 * s.dot(ops.K_rob_factor.solve(s));
}

double discrete_energy(const AssembledOperators& ops, const Eigen::VectorXcd& u) {
  const Eigen::VectorXd re = u.real(), im = u.imag();
  const Eigen::VectorXd s = weighted_overlap(ops.mesh, re) * re + weighted_overlap(ops.mesh, im) * im;
  const double lin = (u.dot(ops.K_full * u) + u.dot(ops.V_full * u)).real();
  return lin - 0.5 * s.dot(ops.K_rob_factor.solve(s));
}

int count_zero_crossings(std::span<const double> u, double rel_floor) {
  double peak = 0.0;
  for (double x : u) peak = std::max(peak, std::abs(x));
  if (!(peak > 0.0)) throw DomainError("count_zero_crossings: profile is identically zero");
  const double floor = rel_floor * peak;
  int crossings = 0;
  int last_sign = 0;
  for (double x : u) {
    if (std::abs(x) <= floor) continue;
    const int s = x > 0.0 ? 1 : -1;
    if (last_sign != 0 && s != last_sign) ++crossings;
    last_sign = s;
  }
  return crossings;
}

int count_zero_crossings(const Eigen::VectorXd& u, double rel_floor) {
  return count_zero_crossings(std::span<const double>(u.data(), static_cast<std::size_t>(u.size())), rel_floor);
}

Eigen::VectorXd interpolate_linear(const RadialMesh& mesh, const Eigen::VectorXd& f,
                                   std::span<const double> radii) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(radii.size()));
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double r = std::clamp(radii[k], 0.0, mesh.r_max());
    const std::size_t e = mesh.locate(r);
    const double t = (r - mesh[e]) / mesh.width(e);
    out(static_cast<Eigen::Index>(k)) =
        (1.0 - t) * f(static_cast<Eigen::Index>(e)) + t * f(static_cast<Eigen::Index>(e + 1));
  }
  return out;
}

Eigen::VectorXd interpolate_hermite(const RadialMesh& mesh, const Eigen::VectorXd& f,
                                    const Eigen::VectorXd& df, std::span<const double> radii) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(radii.size()));
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double r = std::clamp(radii[k], 0.0, mesh.r_max());
    const std::size_t e = mesh.locate(r);
    const auto i = static_cast<Eigen::Index>(e);
    const double h = mesh.width(e);
    const double t = (r - mesh[e]) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    out(static_cast<Eigen::Index>(k)) = h00 * f(i) + h10 * h * df(i) + h01 * f(i + 1) + h11 * h * df(i + 1);
  }
  return out;
}

Eigen::VectorXd cumulative_weighted_integral(const RadialMesh& mesh, const Eigen::VectorXd& f) {
  const auto N = static_cast<Eigen::Index>(mesh.elements());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(N + 1);
  for (Eigen::Index e = 0; e < N; ++e) {
    double acc = 0.0;
    for_each_gauss_point(mesh, static_cast<std::size_t>(e), [&](double, double p0, double p1, double wq) {
      acc += wq * (f(e) * p0 + f(e + 1) * p1);
    });
    out(e + 1) = out(e) + acc;
  }
  return out;
}

}  // namespace splab
