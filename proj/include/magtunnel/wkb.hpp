#pragma once

// Radial WKB for the l = 0 channel: after removing the angular motion the
// particle sees U_eff(r) = (Omega^2/2) r^2 - alpha r^4.  The decay rate is the
// outgoing current of the under-barrier wave function normalized to the
// ground state of the well.

#include <cmath>
#include <numbers>
#include <string>
#include <variant>

#include "magtunnel/errors.hpp"
#include "magtunnel/model.hpp"
#include "magtunnel/numerics/quadrature.hpp"

namespace magtunnel {

inline double effective_potential(const ModelParams& p, double r) {
  if (!(r >= 0.0)) throw DomainError("radius must be non-negative");
  const double Omega = derived_frequency(p);
  const double r2 = r * r;
  return 0.5 * Omega * Omega * r2 - p.alpha * r2 * r2;
}

struct TurningPoints {
  double r1 = 0.0;
  double r2 = 0.0;
};

/// Roots of U_eff(r) = E in u = r^2:  u = [Omega^2 -+ sqrt(Omega^4 - 16 alpha E)] / (4 alpha).
inline TurningPoints turning_points(const ModelParams& p, double E) {
  const double Omega = derived_frequency(p);
  if (!(E >= 0.0) || !std::isfinite(E)) throw DomainError("energy must be finite and non-negative");
  const double top = barrier_height(Omega, p.alpha);
  if (E >= top) {
    throw RegimeError("energy " + std::to_string(E) + " is not below the barrier top " + std::to_string(top));
  }
  const double o2 = Omega * Omega;
  const double disc = std::sqrt(o2 * o2 - 16.0 * p.alpha * E);
  const double u2 = (o2 + disc) / (4.0 * p.alpha);
  const double u1 = (E / p.alpha) / u2;  // product of roots; avoids cancellation at small E
  return {std::sqrt(u1), std::sqrt(u2)};
}

/// Under-barrier momentum p(r) = sqrt(2 (U_eff(r) - E)); zero outside (r1, r2).
inline double barrier_momentum(const ModelParams& p, double E, double r) {
  const auto tp = turning_points(p, E);
  if (r <= tp.r1 || r >= tp.r2) return 0.0;
  const double u = r * r;
  return std::sqrt(2.0 * p.alpha * (u - tp.r1 * tp.r1) * (tp.r2 * tp.r2 - u));
}

enum class BarrierMethod { Direct, ThreeRegion };

inline const char* to_string(BarrierMethod m) { return m == BarrierMethod::Direct ? "direct" : "three-region"; }

/// W(E) = 2 * int_{r1}^{r2} p dr.
///  Direct: quadrature after r = r1 + (r2 - r1) sin^2(theta), which makes the
///   integrand smooth at both turning points.
///  ThreeRegion: small-E expansion W(0) - E/Omega - (E/Omega) ln(4 Omega^4 / (alpha E)).
inline double barrier_integral(const ModelParams& p, double E, BarrierMethod method) {
  const double Omega = derived_frequency(p);
  const auto tp = turning_points(p, E);
  const double W0 = Omega * Omega * Omega / (3.0 * p.alpha);
  if (method == BarrierMethod::ThreeRegion) {
    if (E == 0.0) return W0;
    const double ratio = E / Omega;
    return W0 - ratio - ratio * std::log(4.0 * std::pow(Omega, 4) / (p.alpha * E));
  }
  const double delta = tp.r2 - tp.r1;
  const double pref = 2.0 * std::sqrt(2.0 * p.alpha) * delta * delta;
  auto integrand = [&](double theta) {
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    const double r = tp.r1 + delta * s * s;
    return pref * s * s * c * c * std::sqrt((r + tp.r1) * (r + tp.r2));
  };
  return 2.0 * numerics::integrate(integrand, 0.0, 0.5 * std::numbers::pi, 1e-14).value;
}

/// C = sqrt(Omega / (2 pi e)).
inline double normalization_constant(const ModelParams& p) {
  return std::sqrt(derived_frequency(p) / (2.0 * std::numbers::pi * std::numbers::e));
}

/// Marker: evaluate at the lowest level E = Omega.
struct GroundState {};

using WkbEnergy = std::variant<double, GroundState>;

struct WkbProfile {
  double E = 0.0;
  double Omega = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  double W = 0.0;               // direct quadrature
  double W_three_region = 0.0;  // small-E expansion
  double W0 = 0.0;              // direct quadrature at E = 0
  double C = 0.0;
  double D = 0.0;               // (Omega / e) e^{-W}
  double D_three_region = 0.0;  // (Omega / e) e^{-W_three_region}
  double D_assembled = 0.0;     // (4 Omega^4 / alpha) e^{-W(0)} with W(0) = Omega^3 / (3 alpha)
  double D_assembled_quadrature = 0.0;  // same with the quadrature W0
};

/// Decay rate of the l = 0 state at energy E (or the ground state E = Omega).
inline WkbProfile wkb_decay_rate(const ModelParams& p, WkbEnergy energy = GroundState{}, int angular_momentum = 0) {
  if (angular_momentum != 0) throw RegimeError("only the l = 0 channel is supported");
  WkbProfile out;
  out.Omega = derived_frequency(p);
  out.E = std::holds_alternative<GroundState>(energy) ? out.Omega : std::get<double>(energy);
  const auto tp = turning_points(p, out.E);
  out.r1 = tp.r1;
  out.r2 = tp.r2;
  out.W = barrier_integral(p, out.E, BarrierMethod::Direct);
  out.W_three_region = out.E > 0.0 ? barrier_integral(p, out.E, BarrierMethod::ThreeRegion) : out.W;
  out.W0 = barrier_integral(p, 0.0, BarrierMethod::Direct);
  out.C = normalization_constant(p);
  const double attempt = out.Omega / std::numbers::e;
  out.D = attempt * std::exp(-out.W);
  out.D_three_region = attempt * std::exp(-out.W_three_region);
  // Same expression as the closed-form instanton rate, evaluated the same way.
  out.D_assembled = decay_rate_closed_form(p).gamma;
  const double o2 = out.Omega * out.Omega;
  out.D_assembled_quadrature = 4.0 * o2 * o2 / p.alpha * std::exp(-out.W0);
  return out;
}

}  // namespace magtunnel
