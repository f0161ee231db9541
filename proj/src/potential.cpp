#include "splab/potential.hpp"

#include <algorithm>
#include <cmath>

#include "splab/errors.hpp"

namespace splab {

namespace {

constexpr double kSeriesCutoff = 1e-6;

double laguerre(int k, int alpha, double x) {
  if (k < 0) return 0.0;
  return std::assoc_laguerre(static_cast<unsigned>(k), static_cast<unsigned>(alpha), x);
}

}  // namespace

double smoothed_coulomb_V(double r) {
  if (!(r >= 0.0)) throw DomainError("smoothed_coulomb_V: negative radius");
  if (r < kSeriesCutoff) return -0.5 + r * r / 12.0;
  // -expm1(-r) = 1 - e^{-r} without cancellation
  return 0.5 * std::exp(-r) + std::expm1(-r) / r;
}

double smoothed_coulomb_rdV(double r) {
  if (!(r >= 0.0)) throw DomainError("smoothed_coulomb_rdV: negative radius");
  if (r < kSeriesCutoff) return r * r / 6.0;
  const double e = std::exp(-r);
  // V' = -½e^{-r} + (1 - e^{-r})/r² - e^{-r}/r
  return -0.5 * r * e - std::expm1(-r) / r - e;
}

Potential Potential::smoothed_exponential(double Z) {
  if (!(Z > 0.0)) throw DomainError("smoothed_exponential: Z must be positive");
  return Potential(Kind::SmoothedExponential, Z);
}

Potential Potential::coulomb(double Z, double r_reg) {
  if (!(Z > 0.0) || !(r_reg > 0.0)) throw DomainError("coulomb: Z and r_reg must be positive");
  Potential p(Kind::Coulomb, Z);
  p.r_reg_ = r_reg;
  return p;
}

Potential Potential::tabulated(std::vector<double> radii, std::vector<double> values) {
  if (radii.size() != values.size() || radii.size() < 2)
    throw DomainError("tabulated potential: need >= 2 (r, V) pairs of equal length");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1])) throw DomainError("tabulated potential: radii must increase");
  if (radii.front() < 0.0) throw DomainError("tabulated potential: negative radius");
  const double Z = -values.back() * radii.back();
  Potential p(Kind::Tabulated, Z);
  p.radii_ = std::move(radii);
  p.values_ = std::move(values);
  return p;
}

Potential Potential::zero() { return tabulated({0.0, 1.0}, {0.0, 0.0}); }

double Potential::operator()(double r) const {
  if (!(r >= 0.0)) throw DomainError("potential evaluated at negative radius");
  switch (kind_) {
    case Kind::SmoothedExponential:
      return Z_ * smoothed_coulomb_V(r);
    case Kind::Coulomb:
      return -Z_ / std::max(r, r_reg_);
    case Kind::Tabulated: {
      if (r <= radii_.front()) return values_.front();
      if (r >= radii_.back()) return values_.back() * radii_.back() / r;
      const auto it = std::upper_bound(radii_.begin(), radii_.end(), r);
      const std::size_t i = static_cast<std::size_t>(it - radii_.begin()) - 1;
      const double t = (r - radii_[i]) / (radii_[i + 1] - radii_[i]);
      return (1.0 - t) * values_[i] + t * values_[i + 1];
    }
  }
  return 0.0;
}

double Potential::r_dV(double r) const {
  if (!(r >= 0.0)) throw DomainError("potential evaluated at negative radius");
  switch (kind_) {
    case Kind::SmoothedExponential:
      return Z_ * smoothed_coulomb_rdV(r);
    case Kind::Coulomb:
      return r > r_reg_ ? Z_ / r : 0.0;
    case Kind::Tabulated: {
      if (r <= radii_.front()) return 0.0;
      if (r >= radii_.back()) return -values_.back() * radii_.back() / r;
      const auto it = std::upper_bound(radii_.begin(), radii_.end(), r);
      const std::size_t i = static_cast<std::size_t>(it - radii_.begin()) - 1;
      return r * (values_[i + 1] - values_[i]) / (radii_[i + 1] - radii_[i]);
    }
  }
  return 0.0;
}

PotentialNorms potential_norms(const Potential& V) {
  if (V.kind() == Potential::Kind::Coulomb)
    throw DomainError("potential_norms: point-charge potential is unbounded at the origin");

  constexpr int kSamples = 100000;
  const double lo = std::log(1e-6);
  const double hi = std::log(1e4);
  PotentialNorms out;
  out.sup_abs_V = std::abs(V(0.0));
  for (int i = 0; i < kSamples; ++i) {
    const double r = std::exp(lo + (hi - lo) * i / (kSamples - 1));
    const double v = V(r);
    const double rdv = V.r_dV(r);
    if (!std::isfinite(v) || !std::isfinite(rdv))
      throw DomainError("potential_norms: non-finite sample");
    out.sup_abs_V = std::max(out.sup_abs_V, std::abs(v));
    if (std::abs(rdv) > out.sup_abs_rdV) {
      out.sup_abs_rdV = std::abs(rdv);
      out.argmax_rdV = r;
    }
  }
  // Tabulated kinks are where |r·V'| jumps; the grid may straddle them.
  if (V.kind() == Potential::Kind::Tabulated) {
    const auto& rr = V.table_radii();
    for (std::size_t i = 0; i + 1 < rr.size(); ++i) {
      const double mid = 0.5 * (rr[i] + rr[i + 1]);
      for (double r : {rr[i + 1] * (1.0 - 1e-12), mid}) {
        const double rdv = std::abs(V.r_dV(r));
        if (rdv > out.sup_abs_rdV) {
          out.sup_abs_rdV = rdv;
          out.argmax_rdV = r;
        }
      }
    }
  }
  // Limits r → ∞: V → 0 and r·V' → 0 for every Coulomb-like kind, so the
  // sampled suprema already dominate.
  return out;
}

HydrogenState::HydrogenState(int n, double Z) : n_(n), Z_(Z) {
  if (n < 1) throw DomainError("hydrogen_reference: n must be >= 1");
  if (!(Z > 0.0)) throw DomainError("hydrogen_reference: Z must be positive");
  E_ = Z * Z / (4.0 * n * n);
}

double HydrogenState::value(double r) const {
  const double a = Z_ / (2.0 * n_);
  return std::exp(-a * r) * laguerre(n_ - 1, 1, Z_ * r / n_);
}

double HydrogenState::d1(double r) const {
  const double a = Z_ / (2.0 * n_);
  const double c = Z_ / n_;
  const double x = c * r;
  return std::exp(-a * r) * (-a * laguerre(n_ - 1, 1, x) - c * laguerre(n_ - 2, 2, x));
}

double HydrogenState::d2(double r) const {
  const double a = Z_ / (2.0 * n_);
  const double c = Z_ / n_;
  const double x = c * r;
  return std::exp(-a * r) * (a * a * laguerre(n_ - 1, 1, x) + 2.0 * a * c * laguerre(n_ - 2, 2, x) +
                             c * c * laguerre(n_ - 3, 3, x));
}

HydrogenState hydrogen_reference(int n, double Z) { return HydrogenState(n, Z); }

}  // namespace splab
