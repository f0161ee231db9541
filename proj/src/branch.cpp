#include "splab/branch.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "splab/errors.hpp"

namespace splab {

namespace {

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// Gauss-point reconstruction of (u, u', w) with weights r² dr.
struct QuadraturePoints {
  std::vector<double> r, wt, u, v, w;
};

QuadraturePoints reconstruct(const BoundState& s, const Potential& V) {
  const RadialMesh& mesh = s.mesh;
  const Eigen::Index nn = static_cast<Eigen::Index>(mesh.size());
  // v' from the ODE, for the Hermite reconstruction of v
  Eigen::VectorXd dv(nn);
  for (Eigen::Index i = 0; i < nn; ++i) {
    const double r = mesh[static_cast<std::size_t>(i)];
    const double a = V(r) + s.E - s.gamma * s.w(i);
    dv(i) = r == 0.0 ? a * s.u(i) / 3.0 : -2.0 / r * s.v(i) + a * s.u(i);
  }
  QuadraturePoints q;
  const std::size_t ne = mesh.elements();
  q.r.reserve(3 * ne);
  for (std::size_t e = 0; e < ne; ++e) {
    const double a = mesh[e], h = mesh.width(e);
    for (int g = 0; g < 3; ++g) {
      const double t = 0.5 * (Gauss3::x[g] + 1.0);
      const double r = a + t * h;
      const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
      const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
      const auto i = static_cast<Eigen::Index>(e);
      auto herm = [&](const Eigen::VectorXd& f, const Eigen::VectorXd& df) {
        return h00 * f(i) + h10 * h * df(i) + h01 * f(i + 1) + h11 * h * df(i + 1);
      };
      q.r.push_back(r);
      q.wt.push_back(0.5 * h * Gauss3::w[g] * r * r);
      q.u.push_back(herm(s.u, s.v));
      q.v.push_back(herm(s.v, dv));
      q.w.push_back(herm(s.w, s.z));
    }
  }
  return q;
}

BoundState solve_fixed_E(const CollocationBvp& bvp, const BoundState& guess, double E, const BvpOptions& opts) {
  BvpParameters p;
  p.mode = BvpMode::FixedE;
  p.gamma = guess.gamma;
  p.E = E;
  return bvp.solve(guess, p, opts);
}

double tail_ratio(const BoundState& s) {
  const double peak = s.u.cwiseAbs().maxCoeff();
  return peak > 0.0 ? std::abs(s.u(s.u.size() - 1)) / peak : INFINITY;
}

}  // namespace

GammaPath gamma_continuation(const CollocationBvp& bvp, const BoundState& seed, const GammaContinuationOptions& opts) {
  if (!(opts.step > 0.0 && opts.step <= 0.2)) throw ConfigError("gamma step must lie in (0, 0.2]");
  if (!(opts.min_step > 0.0 && opts.min_step <= opts.step)) throw ConfigError("minimum gamma step must lie in (0, step]");

  BvpParameters p;
  p.mode = BvpMode::FixedMass;
  p.target_mass = opts.target_mass;
  p.gamma = 0.0;

  GammaPath path;
  path.states.push_back(bvp.solve(seed, p, opts.bvp));
  const int nodes = path.states.back().branch;
  if (nodes != seed.branch)
    throw BranchIntegrityError("zero-crossing count changed from " + std::to_string(seed.branch) + " to " +
                               std::to_string(nodes) + " at gamma = 0");

  double gamma = 0.0;
  double step = opts.step;
  while (gamma < 1.0) {
    double next = gamma + step;
    if (next > 1.0 - 1e-12) next = 1.0;
    p.gamma = next;
    try {
      BoundState s = bvp.solve(path.states.back(), p, opts.bvp);
      if (s.branch != nodes)
        throw BranchIntegrityError("zero-crossing count changed from " + std::to_string(nodes) + " to " +
                                   std::to_string(s.branch) + " at gamma = " + fmt_double(next));
      path.states.push_back(std::move(s));
      gamma = next;
      step = opts.step;
    } catch (const ConvergenceError& e) {
      if (step * 0.5 < opts.min_step - 1e-15)
        throw ConvergenceError(std::string(e.what()) + " [gamma continuation failed at gamma = " + fmt_double(next) +
                                   "]",
                               e.last_residual());
      step *= 0.5;
    }
  }
  return path;
}

std::vector<double> geometric_grid(double from, double to, int per_decade) {
  if (!(from > 0.0 && to > 0.0) || per_decade < 1) throw DomainError("geometric_grid: endpoints must be > 0");
  std::vector<double> out;
  const double decades = std::log10(to / from);
  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(decades) * per_decade - 1e-9)));
  for (int k = 1; k <= steps; ++k) out.push_back(k == steps ? to : from * std::pow(10.0, decades * k / steps));
  return out;
}

BranchCurve sweep_E(const CollocationBvp& bvp, const BoundState& start, const std::vector<double>& E_values,
                    const SweepOptions& opts) {
  BranchCurve curve;
  curve.branch = start.branch;
  curve.provenance = "gamma-continuation endpoint at E = " + fmt_double(start.E) + ", fixed-E sweep";
  curve.samples.push_back({start.E, start.mass, start});

  BoundState current = start;
  for (double E : E_values) {
    if (E == current.E) continue;
    // attempt E directly, otherwise approach it through geometric midpoints
    std::vector<double> targets{E};
    int halvings = 0;
    std::string failure;
    while (!targets.empty()) {
      const double target = targets.back();
      try {
        BoundState s = solve_fixed_E(bvp, current, target, opts.bvp);
        if (s.branch != curve.branch) {
          failure = "zero-crossing count changed to " + std::to_string(s.branch) + " at E = " + fmt_double(target);
          break;
        }
        if (s.mass < opts.collapse_mass) {
          failure = "mass collapsed at E = " + fmt_double(target);
          break;
        }
        // the domain requirement only tightens as E decreases toward the linear eigenvalue
        if (target < current.E && tail_ratio(s) > opts.tail_ratio) {
          failure = "profile not decayed at r_max (|u(r_max)|/max|u| = " + fmt_double(tail_ratio(s)) +
                    ") at E = " + fmt_double(target) + "; domain too small";
          break;
        }
        targets.pop_back();
        current = std::move(s);
        if (targets.empty()) curve.samples.push_back({current.E, current.mass, current});
      } catch (const ConvergenceError& e) {
        if (++halvings > opts.max_halvings) {
          failure = "no convergence at E = " + fmt_double(target) + ": " + e.what();
          break;
        }
        targets.push_back(std::sqrt(current.E * target));
      }
    }
    if (!failure.empty()) {
      curve.stop_reason = failure;
      break;
    }
  }
  std::sort(curve.samples.begin(), curve.samples.end(),
            [](const BranchSample& a, const BranchSample& b) { return a.E < b.E; });
  return curve;
}

BranchCurve trace_branch(const CollocationBvp& bvp, const BoundState& start, double E_linear, double E_high,
                         int per_decade, double min_gap, const SweepOptions& opts) {
  if (!(start.E > E_linear)) throw DomainError("trace_branch: start E must exceed the linear eigenvalue");
  std::vector<double> down;
  const double gap0 = start.E - E_linear;
  const double gap1 = min_gap * E_linear;
  if (gap1 < gap0)
    for (double g : geometric_grid(gap0, gap1, per_decade)) down.push_back(E_linear + g);
  BranchCurve lower = sweep_E(bvp, start, down, opts);
  BranchCurve upper;
  if (E_high > start.E) upper = sweep_E(bvp, start, geometric_grid(start.E, E_high, per_decade), opts);
  else upper.samples.push_back({start.E, start.mass, start});

  BranchCurve out;
  out.branch = start.branch;
  out.provenance = "gamma-continuation endpoint at E = " + fmt_double(start.E) + ", fixed-E sweeps down to E = " +
                   fmt_double(E_linear + gap1) + " and up to E = " + fmt_double(E_high);
  out.samples = std::move(lower.samples);
  out.samples.pop_back();  // the start state, present in both halves
  for (auto& s : upper.samples) out.samples.push_back(std::move(s));
  if (!lower.stop_reason.empty()) out.stop_reason = "lower sweep: " + lower.stop_reason;
  if (!upper.stop_reason.empty())
    out.stop_reason += (out.stop_reason.empty() ? "" : "; ") + std::string("upper sweep: ") + upper.stop_reason;
  return out;
}

double scalar_energy(const BoundState& s, const Potential& V) {
  const QuadraturePoints q = reconstruct(s, V);
  double H = 0.0;
  for (std::size_t k = 0; k < q.r.size(); ++k) {
    const double u2 = q.u[k] * q.u[k];
    H += q.wt[k] * (q.v[k] * q.v[k] + V(q.r[k]) * u2 - 0.5 * s.gamma * q.w[k] * u2);
  }
  return H + s.E * s.mass;
}

int d_second_sign(const std::vector<double>& masses) {
  for (std::size_t i = 1; i < masses.size(); ++i)
    if (!(masses[i] > masses[i - 1])) return 0;
  return 1;
}

SlopeReport d_second_sign(const BranchCurve& curve, const Potential& V) {
  if (curve.samples.size() < 3) throw DomainError("d_second_sign: at least 3 samples required");
  SlopeReport rep;
  std::vector<double> masses, d;
  for (const auto& smp : curve.samples) {
    masses.push_back(smp.mass);
    d.push_back(scalar_energy(smp.state, V));
  }
  rep.p = d_second_sign(masses);
  bool any_up = false, any_down = false;
  for (std::size_t i = 1; i < masses.size(); ++i) (masses[i] > masses[i - 1] ? any_up : any_down) = true;
  rep.mixed = any_up && any_down;
  for (std::size_t i = 1; i < masses.size(); ++i) {
    const auto& a = curve.samples[i - 1];
    const auto& b = curve.samples[i];
    SlopeRow row;
    row.E_mid = 0.5 * (a.E + b.E);
    row.dd_dE = (d[i] - d[i - 1]) / (b.E - a.E);
    row.mass_mid = 0.5 * (a.mass + b.mass);
    row.rel_error = std::abs(row.dd_dE - row.mass_mid) / std::abs(row.mass_mid);
    rep.max_rel_error = std::max(rep.max_rel_error, row.rel_error);
    rep.table.push_back(row);
  }
  return rep;
}

Eigen::VectorXd rescale_profile(const BoundState& s, const std::vector<double>& y) {
  const double k = std::sqrt(s.E);
  std::vector<double> r(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) r[i] = y[i] / k;
  return interpolate_hermite(s.mesh, s.u, s.v, r) / s.E;
}

Eigen::VectorXd unrescale_profile(const Eigen::VectorXd& u_tilde, const std::vector<double>& y, double E,
                                  const std::vector<double>& r) {
  if (u_tilde.size() != static_cast<Eigen::Index>(y.size()) || r.size() != y.size())
    throw DomainError("unrescale_profile: grids must match");
  const double k = std::sqrt(E);
  Eigen::VectorXd u(static_cast<Eigen::Index>(r.size()));
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (std::abs(k * r[i] - y[i]) > 1e-12 * std::max(1.0, y[i]))
      throw DomainError("unrescale_profile: r must equal y/sqrt(E)");
    u(static_cast<Eigen::Index>(i)) = E * u_tilde(static_cast<Eigen::Index>(i));
  }
  return u;
}

RescaleReport rescale_check(const CollocationBvp& bvp, const BranchCurve& curve, int cauchy_pairs, double y_max,
                            int y_points) {
  if (curve.samples.size() < 3) throw DomainError("rescale_check: at least 3 samples required");
  const double E_top = curve.samples.back().E;
  const double E_bot = curve.samples.front().E;
  if (E_top < 10.0 * E_bot * (1.0 - 1e-12)) throw DomainError("rescale_check: branch spans less than one decade in E");

  RescaleReport rep;
  rep.E_hi = E_top;
  rep.E_lo = E_top / 10.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (const auto& smp : curve.samples) {
    if (smp.E < rep.E_lo * (1.0 - 1e-12)) continue;
    const double x = std::log(smp.E), yv = std::log(smp.mass);
    sx += x;
    sy += yv;
    sxx += x * x;
    sxy += x * yv;
    ++cnt;
  }
  if (cnt < 2) throw DomainError("rescale_check: fewer than two samples in the top decade");
  rep.slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);

  rep.y.resize(static_cast<std::size_t>(y_points));
  for (int i = 0; i < y_points; ++i) rep.y[static_cast<std::size_t>(i)] = y_max * i / (y_points - 1);

  // states at E_top/2^k, k = cauchy_pairs .. 0, warm-started upward
  std::vector<BoundState> states;
  double E = E_top / std::pow(2.0, cauchy_pairs);
  const auto nearest = std::min_element(curve.samples.begin(), curve.samples.end(), [&](const auto& a, const auto& b) {
    return std::abs(std::log(a.E / E)) < std::abs(std::log(b.E / E));
  });
  BoundState guess = nearest->state;
  for (int k = cauchy_pairs; k >= 0; --k) {
    E = E_top / std::pow(2.0, k);
    BvpParameters p;
    p.mode = BvpMode::FixedE;
    p.gamma = guess.gamma;
    p.E = E;
    guess = bvp.solve(guess, p);
    states.push_back(guess);
  }
  for (std::size_t k = 0; k + 1 < states.size(); ++k) {
    const Eigen::VectorXd a = rescale_profile(states[k], rep.y);
    const Eigen::VectorXd b = rescale_profile(states[k + 1], rep.y);
    rep.cauchy_E.push_back(states[k].E);
    rep.cauchy_diff.push_back((a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff());
  }
  rep.cauchy_decreasing = true;
  for (std::size_t k = 1; k < rep.cauchy_diff.size(); ++k)
    if (!(rep.cauchy_diff[k] < rep.cauchy_diff[k - 1])) rep.cauchy_decreasing = false;
  return rep;
}

double farfield_exponent(const BoundState& s, double Z) {
  if (!(s.E > 0.0)) throw DomainError("farfield_exponent: E must be > 0");
  return -1.0 + (Z + s.gamma * s.mass) / (2.0 * std::sqrt(s.E));
}

Eigen::VectorXd farfield_extend(const BoundState& s, double Z, std::span<const double> radii) {
  const double R = s.mesh.r_max();
  const double uR = s.u(s.u.size() - 1);
  if (!(uR != 0.0) || !std::isfinite(uR)) throw DomainError("farfield_extend: u(r_max) vanishes; cannot match");
  const double k = std::sqrt(s.E);
  const double alpha = farfield_exponent(s, Z);
  std::vector<double> inner;
  for (double r : radii) inner.push_back(std::min(r, R));
  Eigen::VectorXd out = interpolate_hermite(s.mesh, s.u, s.v, inner);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double r = radii[i];
    if (r > R) out(static_cast<Eigen::Index>(i)) = uR * std::exp(-k * (r - R)) * std::pow(r / R, alpha);
    else if (r == R) out(static_cast<Eigen::Index>(i)) = uR;
  }
  return out;
}

PohozaevResult pohozaev(const BoundState& s, const Potential& V) {
  const QuadraturePoints q = reconstruct(s, V);
  PohozaevResult res;
  for (std::size_t k = 0; k < q.r.size(); ++k) {
    const double u2 = q.u[k] * q.u[k];
    res.kinetic += q.wt[k] * q.v[k] * q.v[k];
    res.mass += q.wt[k] * u2;
    res.potential += q.wt[k] * V(q.r[k]) * u2;
    res.moment += q.wt[k] * V.r_dV(q.r[k]) * u2;
  }
  res.predicted = (s.E * res.mass + res.potential + 2.0 * res.moment) / 3.0;
  res.residual = std::abs(res.kinetic - res.predicted) / res.kinetic;
  const double alt = (s.E * res.mass - res.potential + 2.0 * res.moment) / 3.0;
  res.residual_alt_sign = std::abs(res.kinetic - alt) / res.kinetic;
  return res;
}

}  // namespace splab
