#pragma once

// Thin layer over Boost.Math's adaptive Gauss-Kronrod rule: a result type that
// carries the error estimate and a failure mode that throws instead of
// silently returning a poor value.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <sstream>
#include <utility>

#include "magtunnel/errors.hpp"

namespace magtunnel::numerics {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

/// Adaptive 61-point Gauss-Kronrod on [a, b].  Throws QuadratureError when the
/// estimated error exceeds `rel_tol * max(|value|, abs_floor)`.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, double rel_tol = 1e-13, double abs_floor = 0.0,
                           unsigned max_depth = 20) {
  using Rule = boost::math::quadrature::gauss_kronrod<double, 61>;
  QuadratureResult out;
  if (abs_floor > 0.0) {
    // Boost refines relative to the L1 norm; an integrand that is negligible
    // against the floor would otherwise be refined down to rounding noise.
    double l1 = 0.0;
    out.value = Rule::integrate(f, a, b, 3, rel_tol, &out.error, &l1);
    if (l1 + out.error <= rel_tol * abs_floor) return out;
  }
  out.value = Rule::integrate(std::forward<F>(f), a, b, max_depth, rel_tol, &out.error);
  const double allowed = rel_tol * std::max(std::abs(out.value), abs_floor);
  // Gauss-Kronrod error estimates are pessimistic; allow a modest margin.
  if (!(out.error <= 10.0 * allowed) || !std::isfinite(out.value)) {
    std::ostringstream msg;
    msg << "adaptive quadrature on [" << a << ", " << b << "] did not converge (estimate " << out.error << ")";
    throw QuadratureError(msg.str(), out.error);
  }
  return out;
}

/// Integral over the real line of an integrand that decays like
/// `tail_amplitude * exp(-tail_rate |x|)`: quadrature on [-cutoff, cutoff]
/// plus the two exponential tails added in closed form.
template <class F>
QuadratureResult integrate_real_line(F&& f, double cutoff, double tail_amplitude, double tail_rate,
                                     double rel_tol = 1e-13, double abs_floor = 0.0) {
  QuadratureResult left = integrate(f, -cutoff, 0.0, rel_tol, abs_floor);
  QuadratureResult right = integrate(f, 0.0, cutoff, rel_tol, abs_floor);
  const double tail = 2.0 * tail_amplitude * std::exp(-tail_rate * cutoff) / tail_rate;
  return {left.value + right.value + tail, left.error + right.error};
}

}  // namespace magtunnel::numerics
