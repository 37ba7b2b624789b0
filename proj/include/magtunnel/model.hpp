#pragma once

// Model core: a unit-mass particle (hbar = m = 1) in the rotationally
// symmetric inverted double well U(r) = omega^2 r^2 / 2 - alpha r^4 with a
// transverse magnetic field of cyclotron frequency omega_c.

#include <cmath>
#include <string>

#include "magtunnel/errors.hpp"

namespace magtunnel {

/// How omega_c enters the effective frequency Omega.
///  Euclidean: after continuation omega_c -> i omega_c, Omega^2 = omega^2 - omega_c^2/4.
///  Physical:  real cyclotron frequency, Omega^2 = omega^2 + omega_c^2/4.
enum class Continuation { Euclidean, Physical };

inline const char* to_string(Continuation mode) {
  return mode == Continuation::Euclidean ? "euclidean" : "physical";
}

struct ModelParams {
  double omega = 1.0;    // well frequency at the bottom
  double omega_c = 0.0;  // cyclotron frequency
  double alpha = 0.01;   // quartic coefficient
  Continuation mode = Continuation::Physical;

  /// Throws DomainError unless omega > 0, alpha > 0, omega_c >= 0 (all finite)
  /// and, in Euclidean mode, omega_c < 2 omega.
  void validate() const {
    if (!std::isfinite(omega) || omega <= 0.0) throw DomainError("omega must be a positive finite number");
    if (!std::isfinite(alpha) || alpha <= 0.0) throw DomainError("alpha must be a positive finite number");
    if (!std::isfinite(omega_c) || omega_c < 0.0)
      throw DomainError("omega_c must be a non-negative finite number");
    if (mode == Continuation::Euclidean && omega_c >= 2.0 * omega)
      throw DomainError("Euclidean continuation requires omega_c < 2 omega (otherwise Omega^2 <= 0)");
  }
};

/// Omega under the parameter set's continuation convention.
inline double derived_frequency(const ModelParams& p) {
  p.validate();
  const double shift = 0.25 * p.omega_c * p.omega_c;
  const double omega2 = p.omega * p.omega;
  return std::sqrt(p.mode == Continuation::Euclidean ? omega2 - shift : omega2 + shift);
}

/// U(r) = omega^2 r^2 / 2 - alpha r^4 (bare frequency, no field term).
inline double potential(const ModelParams& p, double r) {
  p.validate();
  if (!(r >= 0.0)) throw DomainError("radius must be non-negative");
  const double r2 = r * r;
  return 0.5 * p.omega * p.omega * r2 - p.alpha * r2 * r2;
}

/// Height of the barrier of (Omega^2/2) r^2 - alpha r^4.
inline double barrier_height(double Omega, double alpha) {
  const double o2 = Omega * Omega;
  return o2 * o2 / (16.0 * alpha);
}

/// Position of the barrier top of (Omega^2/2) r^2 - alpha r^4.
inline double barrier_radius(double Omega, double alpha) { return Omega / (2.0 * std::sqrt(alpha)); }

struct BouncePoint {
  double tau = 0.0;
  double x = 0.0;
  double y = 0.0;
  double r = 0.0;
};

/// Radial bounce profile r(tau) = Omega / (sqrt(2 alpha) cosh(Omega tau)).
inline double bounce_radius(double Omega, double alpha, double tau) {
  return Omega / (std::sqrt(2.0 * alpha) * std::cosh(Omega * tau));
}

/// Euclidean bounce centred at tau = 0 with initial angle phi0.  The
/// trajectory spirals with angular velocity -omega_c / 2.
inline BouncePoint bounce(const ModelParams& p, double phi0, double tau) {
  if (p.mode != Continuation::Euclidean)
    throw DomainError("the bounce is the Euclidean saddle point; use Continuation::Euclidean");
  const double Omega = derived_frequency(p);
  const double r = bounce_radius(Omega, p.alpha, tau);
  const double angle = -0.5 * p.omega_c * tau + phi0;
  return {tau, r * std::cos(angle), r * std::sin(angle), r};
}

/// S_cl = Omega^3 / (3 alpha).  Every bounce (any centre, any phi0) has this action.
inline double classical_action(const ModelParams& p) {
  const double Omega = derived_frequency(p);
  return Omega * Omega * Omega / (3.0 * p.alpha);
}

inline Validity assess_validity(double Omega, double alpha) {
  Validity v;
  v.semiclassical = Omega * Omega * Omega / (3.0 * alpha) > 1.0;
  v.ground_below_barrier = barrier_height(Omega, alpha) > Omega;
  return v;
}

/// Gamma = 12 Omega s e^{-s} for a dimensionless action s.  With s = Omega^3/(3 alpha)
/// this is the same number as (4 Omega^4 / alpha) e^{-s}; the action form is the one
/// that survives restoring hbar and the particle mass.
inline double rate_from_action(double Omega, double action) {
  return 12.0 * Omega * action * std::exp(-action);
}

struct ClosedFormRate {
  double Omega = 0.0;
  double action = 0.0;
  double gamma = 0.0;
  Validity validity;
};

/// Gamma = (4 Omega^4 / alpha) e^{-S_cl}.  Leaving the semiclassical regime is
/// flagged in `validity`, never thrown.
inline ClosedFormRate decay_rate_closed_form(const ModelParams& p) {
  ClosedFormRate out;
  out.Omega = derived_frequency(p);
  const double o2 = out.Omega * out.Omega;
  out.action = o2 * out.Omega / (3.0 * p.alpha);
  out.gamma = 4.0 * o2 * o2 / p.alpha * std::exp(-out.action);
  out.validity = assess_validity(out.Omega, p.alpha);
  return out;
}

}  // namespace magtunnel
