#pragma once

#include <vector>

namespace splab {

/// Smooth Coulomb-like external potential solving  ΔV = ½e^{-r}:
///   V(r) = ½e^{-r} - (1 - e^{-r})/r,   V(0) = -½,   r·V(r) → -1.
double smoothed_coulomb_V(double r);

/// r·V'(r) for the smoothed potential.
double smoothed_coulomb_rdV(double r);

/// Radial external potential. Value type; evaluation is pure.
class Potential {
 public:
  enum class Kind { SmoothedExponential, Coulomb, Tabulated };

  /// Z·(½e^{-r} - (1 - e^{-r})/r); the density ρ = (Z/2)e^{-r} has L¹ mass Z (in units of 4π).
  static Potential smoothed_exponential(double Z = 1.0);

  /// Point charge -Z/r, regularized as -Z/max(r, r_reg). Oracle use only.
  static Potential coulomb(double Z, double r_reg = 1e-12);

  /// Piecewise-linear table. Below the first radius the first value is held,
  /// beyond the last radius the tail continues as V_last·r_last/r.
  static Potential tabulated(std::vector<double> radii, std::vector<double> values);

  static Potential zero();

  Kind kind() const noexcept { return kind_; }
  /// Far-field charge: r·V(r) → -Z.
  double charge() const noexcept { return Z_; }

  double operator()(double r) const;
  /// r·V'(r).
  double r_dV(double r) const;

  const std::vector<double>& table_radii() const noexcept { return radii_; }
  const std::vector<double>& table_values() const noexcept { return values_; }

 private:
  Potential(Kind k, double Z) : kind_(k), Z_(Z) {}

  Kind kind_;
  double Z_;
  double r_reg_ = 0.0;
  std::vector<double> radii_;
  std::vector<double> values_;
};

struct PotentialNorms {
  double sup_abs_V = 0.0;
  double sup_abs_rdV = 0.0;
  double argmax_rdV = 0.0;
};

/// Suprema of |V| and |r·V'| over a log grid of 10⁵ points on [1e-6, 1e4]
/// together with the r = 0 value and the r → ∞ limits.
PotentialNorms potential_norms(const Potential& V);

/// Exact radial eigenpair of  -Δ - Z/r  with the convention used throughout:
/// eigenvalue -E_n, E_n = Z²/(4n²), profile e^{-Zr/(2n)} L¹_{n-1}(Zr/n).
class HydrogenState {
 public:
  HydrogenState(int n, double Z);

  int n() const noexcept { return n_; }
  double Z() const noexcept { return Z_; }
  double E() const noexcept { return E_; }

  double value(double r) const;
  double d1(double r) const;
  double d2(double r) const;

 private:
  int n_;
  double Z_;
  double E_;
};

HydrogenState hydrogen_reference(int n, double Z);

}  // namespace splab
