#include "splab/bvp.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "splab/errors.hpp"

namespace splab {

namespace {

using Mat5 = Eigen::Matrix<double, 5, 5>;
using Vec5 = Eigen::Matrix<double, 5, 1>;

enum : int { U = 0, Vd = 1, W = 2, Z = 3, Mm = 4 };

// f, ∂f/∂y and ∂f/∂E at radius r (r == 0 uses the regular-origin limit).
void rhs(double r, double Vr, const Vec5& y, double gamma, double E, Vec5& f, Mat5* J, Vec5* fE) {
  const double a = Vr + E - gamma * y(W);
  if (r == 0.0) {
    f << y(Vd), a * y(U) / 3.0, y(Z), -y(U) * y(U) / 3.0, 0.0;
    if (J) {
      J->setZero();
      (*J)(U, Vd) = 1.0;
      (*J)(Vd, U) = a / 3.0;
      (*J)(Vd, W) = -gamma * y(U) / 3.0;
      (*J)(W, Z) = 1.0;
      (*J)(Z, U) = -2.0 * y(U) / 3.0;
    }
    if (fE) *fE << 0.0, y(U) / 3.0, 0.0, 0.0, 0.0;
    return;
  }
  const double r2 = r * r;
  f << y(Vd), -2.0 / r * y(Vd) + a * y(U), y(Z), -2.0 / r * y(Z) - y(U) * y(U), y(U) * y(U) * r2;
  if (J) {
    J->setZero();
    (*J)(U, Vd) = 1.0;
    (*J)(Vd, U) = a;
    (*J)(Vd, Vd) = -2.0 / r;
    (*J)(Vd, W) = -gamma * y(U);
    (*J)(W, Z) = 1.0;
    (*J)(Z, U) = -2.0 * y(U);
    (*J)(Z, Z) = -2.0 / r;
    (*J)(Mm, U) = 2.0 * y(U) * r2;
  }
  if (fE) *fE << 0.0, y(U), 0.0, 0.0, 0.0;
}

Eigen::VectorXd pack(const BoundState& s) {
  const Eigen::Index n = s.u.size();
  Eigen::VectorXd x(5 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(5 * i + U) = s.u(i);
    x(5 * i + Vd) = s.v(i);
    x(5 * i + W) = s.w(i);
    x(5 * i + Z) = s.z(i);
    x(5 * i + Mm) = s.m(i);
  }
  return x;
}

void unpack(const Eigen::VectorXd& x, BoundState& s) {
  const Eigen::Index n = x.size() / 5;
  s.u.resize(n);
  s.v.resize(n);
  s.w.resize(n);
  s.z.resize(n);
  s.m.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    s.u(i) = x(5 * i + U);
    s.v(i) = x(5 * i + Vd);
    s.w(i) = x(5 * i + W);
    s.z(i) = x(5 * i + Z);
    s.m(i) = x(5 * i + Mm);
  }
}

Eigen::Array<double, 5, 1> component_scale(const Eigen::VectorXd& x) {
  Eigen::Array<double, 5, 1> s = Eigen::Array<double, 5, 1>::Zero();
  const Eigen::Index n = x.size() / 5;
  for (Eigen::Index i = 0; i < n; ++i)
    for (int c = 0; c < 5; ++c) s(c) = std::max(s(c), std::abs(x(5 * i + c)));
  for (int c = 0; c < 5; ++c)
    if (!(s(c) > 1e-300)) s(c) = 1.0;
  return s;
}

// derivative of the quadratic through three nodes, evaluated at the middle one
double central_slope(double rm, double r0, double rp, double fm, double f0, double fp) {
  const double hm = r0 - rm, hp = rp - r0;
  return (hm * hm * fp - hp * hp * fm + (hp * hp - hm * hm) * f0) / (hm * hp * (hm + hp));
}

}  // namespace

struct CollocationBvp::Workspace {
  std::vector<Eigen::Triplet<double>> triplets;
};

State5 first_order_rhs(const State5& y, double r, double gamma, double E, const Potential& V) {
  if (!(r > 0.0)) throw DomainError("first_order_rhs: r must be > 0 (use the regular origin form at r = 0)");
  Vec5 yy;
  for (int c = 0; c < 5; ++c) yy(c) = y[static_cast<std::size_t>(c)];
  Vec5 f;
  rhs(r, V(r), yy, gamma, E, f, nullptr, nullptr);
  State5 out;
  for (int c = 0; c < 5; ++c) out[static_cast<std::size_t>(c)] = f(c);
  return out;
}

double far_field_robin_coefficient(double R, double E, double Z, double gamma, double m_R) {
  const double k = std::sqrt(E);
  return 1.0 / R + k - (Z + gamma * m_R) / (2.0 * R * k);
}

Eigen::VectorXd boundary_residuals(const State5& y0, const State5& yN, double r_max, double E, double Z,
                                   const BvpParameters& params) {
  if (!(E > 0.0)) throw DomainError("boundary_residuals: E must be > 0");
  const bool fixed_mass = params.mode == BvpMode::FixedMass;
  Eigen::VectorXd b(fixed_mass ? 6 : 5);
  int k = 0;
  b(k++) = y0[Vd];
  b(k++) = y0[Z];
  b(k++) = y0[Mm];
  if (fixed_mass) b(k++) = yN[Mm] - params.target_mass;
  b(k++) = yN[Z] + yN[W] / r_max;
  b(k++) = yN[Vd] + far_field_robin_coefficient(r_max, E, Z, params.gamma, yN[Mm]) * yN[U];
  return b;
}

CollocationBvp::CollocationBvp(RadialMesh mesh, Potential V) : mesh_(std::move(mesh)), V_(std::move(V)) {
  const std::size_t n = mesh_.size();
  V_nodes_.resize(static_cast<Eigen::Index>(n));
  V_mid_.resize(static_cast<Eigen::Index>(n - 1));
  for (std::size_t i = 0; i < n; ++i) V_nodes_(static_cast<Eigen::Index>(i)) = V_(mesh_[i]);
  for (std::size_t i = 0; i + 1 < n; ++i)
    V_mid_(static_cast<Eigen::Index>(i)) = V_(0.5 * (mesh_[i] + mesh_[i + 1]));
}

Eigen::VectorXd CollocationBvp::residual_vector(const Eigen::VectorXd& x, double E, const BvpParameters& params,
                                                const Eigen::Array<double, 5, 1>& scale, Workspace* ws) const {
  const bool fixed_mass = params.mode == BvpMode::FixedMass;
  const Eigen::Index nn = static_cast<Eigen::Index>(mesh_.size());
  const Eigen::Index N = nn - 1;
  const Eigen::Index eidx = 5 * nn;  // column of E in FixedMass mode
  const Eigen::Index rows = 3 + 5 * N + (fixed_mass ? 3 : 2);
  const double gamma = params.gamma;
  const double R = mesh_.r_max();
  const double Zc = V_.charge();

  Eigen::VectorXd res(rows);
  if (ws) {
    ws->triplets.clear();
    ws->triplets.reserve(static_cast<std::size_t>(60 * N + 32));
  }
  auto put = [&](Eigen::Index r, Eigen::Index c, double v) {
    if (ws) ws->triplets.emplace_back(static_cast<int>(r), static_cast<int>(c), v);
  };

  // left boundary rows
  res(0) = x(Vd) / scale(Vd);
  res(1) = x(Z) / scale(Z);
  res(2) = x(Mm) / scale(Mm);
  put(0, Vd, 1.0 / scale(Vd));
  put(1, Z, 1.0 / scale(Z));
  put(2, Mm, 1.0 / scale(Mm));

  Vec5 yi = x.segment<5>(0);
  Vec5 fi, fEi;
  Mat5 Ji;
  rhs(mesh_[0], V_nodes_(0), yi, gamma, E, fi, &Ji, &fEi);
  const Mat5 I = Mat5::Identity();
  for (Eigen::Index i = 0; i < N; ++i) {
    const double h = mesh_.width(static_cast<std::size_t>(i));
    const double rm = 0.5 * (mesh_[static_cast<std::size_t>(i)] + mesh_[static_cast<std::size_t>(i) + 1]);
    const Vec5 yj = x.segment<5>(5 * (i + 1));
    Vec5 fj, fEj, fm, fEm;
    Mat5 Jj, Jm;
    rhs(mesh_[static_cast<std::size_t>(i) + 1], V_nodes_(i + 1), yj, gamma, E, fj, &Jj, &fEj);
    const Vec5 ym = 0.5 * (yi + yj) + h / 8.0 * (fi - fj);
    rhs(rm, V_mid_(i), ym, gamma, E, fm, &Jm, &fEm);
    const Vec5 r = yj - yi - h / 6.0 * (fi + 4.0 * fm + fj);
    const Eigen::Index row0 = 3 + 5 * i;
    for (int c = 0; c < 5; ++c) res(row0 + c) = r(c) / scale(c);

    if (ws) {
      const Mat5 Di = -I - h / 6.0 * (Ji + 4.0 * Jm * (0.5 * I + h / 8.0 * Ji));
      const Mat5 Dj = I - h / 6.0 * (Jj + 4.0 * Jm * (0.5 * I - h / 8.0 * Jj));
      for (int a = 0; a < 5; ++a) {
        for (int b = 0; b < 5; ++b) {
          if (Di(a, b) != 0.0) put(row0 + a, 5 * i + b, Di(a, b) / scale(a));
          if (Dj(a, b) != 0.0) put(row0 + a, 5 * (i + 1) + b, Dj(a, b) / scale(a));
        }
      }
      if (fixed_mass) {
        const Vec5 dE = -h / 6.0 * (fEi + 4.0 * (fEm + Jm * (h / 8.0 * (fEi - fEj))) + fEj);
        for (int a = 0; a < 5; ++a)
          if (dE(a) != 0.0) put(row0 + a, eidx, dE(a) / scale(a));
      }
    }
    yi = yj;
    fi = fj;
    fEi = fEj;
    Ji = Jj;
  }

  // right boundary rows
  Eigen::Index row = 3 + 5 * N;
  const Eigen::Index cN = 5 * N;
  const double uN = x(cN + U), vN = x(cN + Vd), wN = x(cN + W), zN = x(cN + Z), mN = x(cN + Mm);
  if (fixed_mass) {
    res(row) = (mN - params.target_mass) / scale(Mm);
    put(row, cN + Mm, 1.0 / scale(Mm));
    ++row;
  }
  res(row) = (zN + wN / R) / scale(Z);
  put(row, cN + Z, 1.0 / scale(Z));
  put(row, cN + W, 1.0 / (R * scale(Z)));
  ++row;

  const double k = std::sqrt(E);
  const double c = far_field_robin_coefficient(R, E, Zc, gamma, mN);
  res(row) = (vN + c * uN) / scale(Vd);
  put(row, cN + Vd, 1.0 / scale(Vd));
  put(row, cN + U, c / scale(Vd));
  put(row, cN + Mm, -gamma / (2.0 * R * k) * uN / scale(Vd));
  if (fixed_mass) {
    // dc/dE = 1/(2k) + (Z + γm)/(4 R k³)
    const double dc = 0.5 / k + (Zc + gamma * mN) / (4.0 * R * k * k * k);
    put(row, eidx, dc * uN / scale(Vd));
  }
  return res;
}

double CollocationBvp::scaled_residual(const BoundState& state, const BvpParameters& params) const {
  if (state.u.size() != static_cast<Eigen::Index>(mesh_.size()))
    throw DomainError("scaled_residual: state does not live on this mesh");
  const Eigen::VectorXd x = pack(state);
  return residual_vector(x, state.E, params, component_scale(x), nullptr).lpNorm<Eigen::Infinity>();
}

BoundState CollocationBvp::solve(const BoundState& guess, const BvpParameters& params,
                                 const BvpOptions& opts) const {
  const Eigen::Index nn = static_cast<Eigen::Index>(mesh_.size());
  if (guess.u.size() != nn || guess.v.size() != nn || guess.w.size() != nn || guess.z.size() != nn ||
      guess.m.size() != nn)
    throw DomainError("CollocationBvp::solve: guess does not live on this mesh");
  const bool fixed_mass = params.mode == BvpMode::FixedMass;
  double E = fixed_mass ? guess.E : params.E;
  if (!(E > 0.0)) throw DomainError("CollocationBvp::solve: E must be > 0");

  Eigen::VectorXd x = pack(guess);
  const Eigen::Array<double, 5, 1> scale = component_scale(x);
  const Eigen::Index n_unknowns = 5 * nn + (fixed_mass ? 1 : 0);

  Workspace ws;
  Eigen::SparseMatrix<double> J(n_unknowns, n_unknowns);
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;

  Eigen::VectorXd res = residual_vector(x, E, params, scale, &ws);
  double norm_inf = res.lpNorm<Eigen::Infinity>();
  for (int it = 0;; ++it) {
    if (!std::isfinite(norm_inf)) throw ConvergenceError("collocation Newton produced a non-finite residual", norm_inf);
    if (norm_inf < opts.tolerance) break;
    if (it >= opts.max_iterations)
      throw ConvergenceError("collocation Newton did not converge in " + std::to_string(opts.max_iterations) +
                                 " iterations (gamma = " + std::to_string(params.gamma) + ")",
                             norm_inf);

    J.setFromTriplets(ws.triplets.begin(), ws.triplets.end());
    lu.compute(J);
    if (lu.info() != Eigen::Success)
      throw SingularJacobianError("collocation Jacobian is singular: " + lu.lastErrorMessage(), norm_inf);
    const Eigen::VectorXd step = lu.solve(-res);
    if (!step.allFinite()) throw SingularJacobianError("collocation Newton step is not finite", norm_inf);

    const double norm2 = res.norm();
    double lambda = 1.0;
    bool accepted = false;
    while (lambda >= opts.min_damping) {
      Eigen::VectorXd x_try = x + lambda * step.head(5 * nn);
      const double E_try = fixed_mass ? E + lambda * step(5 * nn) : E;
      if (E_try > 0.0) {
        Eigen::VectorXd res_try = residual_vector(x_try, E_try, params, scale, &ws);
        const double n2 = res_try.norm();
        if (std::isfinite(n2) && (n2 <= (1.0 - 1e-4 * lambda) * norm2 ||
                                  res_try.lpNorm<Eigen::Infinity>() < opts.tolerance)) {
          x = std::move(x_try);
          E = E_try;
          res = std::move(res_try);
          norm_inf = res.lpNorm<Eigen::Infinity>();
          accepted = true;
          break;
        }
      }
      lambda *= 0.5;
    }
    if (!accepted)
      throw ConvergenceError("collocation Newton line search failed (gamma = " + std::to_string(params.gamma) + ")",
                             norm_inf);
  }

  BoundState out;
  out.mesh = mesh_;
  unpack(x, out);
  out.E = E;
  out.gamma = params.gamma;
  out.mass = out.m(nn - 1);
  out.branch = count_zero_crossings(out.u);
  out.residual = norm_inf;
  return out;
}

BoundState seed_from_linear(const LinearEigenpair& pair, const AssembledOperators& pair_ops, const RadialMesh& mesh,
                            const Potential& V) {
  const Eigen::Index nn = static_cast<Eigen::Index>(mesh.size());
  Eigen::VectorXd u;
  const auto src = pair_ops.mesh.nodes();
  const auto dst = mesh.nodes();
  if (src.size() == dst.size() && std::equal(src.begin(), src.end(), dst.begin()))
    u = pair.vector;
  else
    u = interpolate_linear(pair_ops.mesh, pair.vector, dst);
  if (u(0) < 0.0) u = -u;

  BoundState s{mesh, u, Eigen::VectorXd::Zero(nn), Eigen::VectorXd::Zero(nn), Eigen::VectorXd::Zero(nn),
               Eigen::VectorXd::Zero(nn)};
  for (Eigen::Index i = 1; i + 1 < nn; ++i) {
    const auto k = static_cast<std::size_t>(i);
    s.v(i) = central_slope(mesh[k - 1], mesh[k], mesh[k + 1], u(i - 1), u(i), u(i + 1));
  }
  {  // one-sided quadratic at r_max
    const auto k = static_cast<std::size_t>(nn - 1);
    const double r0 = mesh[k], r1 = mesh[k - 1], r2 = mesh[k - 2];
    const double h1 = r0 - r1, h2 = r0 - r2;
    s.v(nn - 1) = ((h2 * h2 - h1 * h1) * u(nn - 1) - h2 * h2 * u(nn - 2) + h1 * h1 * u(nn - 3)) / (h1 * h2 * (h2 - h1));
  }

  const Eigen::VectorXd u2 = u.array().square().matrix();
  s.m = cumulative_weighted_integral(mesh, u2);
  const AssembledOperators ops = assemble(mesh, V);
  s.w = poisson_solve_robin(ops, u2);
  for (Eigen::Index i = 1; i < nn; ++i) {
    const double r = mesh[static_cast<std::size_t>(i)];
    s.z(i) = -s.m(i) / (r * r);
  }
  s.E = pair.E();
  s.gamma = 0.0;
  s.mass = s.m(nn - 1);
  s.branch = count_zero_crossings(u);
  return s;
}

}  // namespace splab
