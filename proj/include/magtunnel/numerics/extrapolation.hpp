#pragma once

// Gragg-Bulirsch-Stoer integration of y' = f(t, y) on fixed-size states.
//
// The scalar type is a template parameter so that the same code runs in
// double and in float128; the Jacobi-field determinants need the latter.
// Steps are clipped so the trajectory lands exactly on requested stop times,
// where an observer is invoked.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>

#include "magtunnel/errors.hpp"

namespace magtunnel::numerics {

struct ExtrapolationOptions {
  double rel_tol = 1e-12;           // per-step error relative to the largest state component
  double initial_step = 0.0;        // 0 picks (t1 - t0) / 64
  std::size_t max_steps = 2000000;
  double renormalize_above = 0.0;   // > 0 enables rescaling (linear homogeneous systems only)
};

template <class Real, std::size_t N>
struct FlowResult {
  std::array<Real, N> state{};
  Real log_scale = 0;  // true state = state * exp(log_scale)
  std::size_t steps = 0;
  std::size_t rejected = 0;
};

struct NoObserver {
  template <class... Args>
  void operator()(Args&&...) const noexcept {}
};

namespace detail {

inline constexpr int kMaxColumns = 10;

template <class Real, std::size_t N>
Real max_abs(const std::array<Real, N>& y) {
  using std::abs;
  Real m = 0;
  for (const auto& v : y) m = std::max<Real>(m, abs(v));
  return m;
}

// Modified midpoint rule with n substeps over [t, t + H].
template <class Real, std::size_t N, class Rhs>
std::array<Real, N> modified_midpoint(Rhs& rhs, const std::array<Real, N>& y, const std::array<Real, N>& dy0,
                                      Real t, Real H, int n) {
  const Real h = H / n;
  std::array<Real, N> z0 = y;
  std::array<Real, N> z1;
  std::array<Real, N> dz;
  for (std::size_t i = 0; i < N; ++i) z1[i] = z0[i] + h * dy0[i];
  for (int m = 1; m < n; ++m) {
    rhs(z1, dz, t + h * m);
    for (std::size_t i = 0; i < N; ++i) {
      const Real next = z0[i] + 2 * h * dz[i];
      z0[i] = z1[i];
      z1[i] = next;
    }
  }
  rhs(z1, dz, t + H);
  std::array<Real, N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = (z0[i] + z1[i] + h * dz[i]) / 2;
  return out;
}

}  // namespace detail

/// Integrates from t0 to t1 (t1 > t0).  `stops` must be ascending and inside
/// [t0, t1]; `observer(t, state, log_scale)` fires at each of them.
template <class Real, std::size_t N, class Rhs, class Observer = NoObserver>
FlowResult<Real, N> integrate_extrapolated(Rhs&& rhs, std::array<Real, N> y, Real t0, Real t1,
                                           const ExtrapolationOptions& opts, std::span<const Real> stops = {},
                                           Observer&& observer = {}) {
  using std::abs, std::pow;
  FlowResult<Real, N> res;
  const Real tol = opts.rel_tol;
  const Real span = t1 - t0;
  Real H = opts.initial_step > 0 ? Real(opts.initial_step) : span / 64;
  Real t = t0;
  std::size_t next_stop = 0;
  while (next_stop < stops.size() && stops[next_stop] <= t0) {
    observer(stops[next_stop], y, res.log_scale);
    ++next_stop;
  }
  const Real min_step = span * Real(64) * std::numeric_limits<Real>::epsilon();

  std::array<std::array<Real, N>, detail::kMaxColumns> table;
  std::array<Real, N> dy0;
  while (t < t1) {
    if (res.steps >= opts.max_steps) {
      std::ostringstream msg;
      msg << "step budget exhausted at tau = " << static_cast<double>(t);
      throw IntegrationError(msg.str(), static_cast<double>(t));
    }
    Real target = t1;
    if (next_stop < stops.size()) target = std::min<Real>(target, stops[next_stop]);
    bool clipped = false;
    Real step = H;
    if (t + step >= target) {
      step = target - t;
      clipped = true;
    }
    if (step < min_step && !clipped) {
      std::ostringstream msg;
      msg << "step size underflow at tau = " << static_cast<double>(t);
      throw IntegrationError(msg.str(), static_cast<double>(t));
    }

    rhs(y, dy0, t);
    const Real scale = std::max<Real>(detail::max_abs(y), std::numeric_limits<Real>::min());
    int converged_at = -1;
    Real err = 0;
    for (int k = 0; k < detail::kMaxColumns; ++k) {
      table[k] = detail::modified_midpoint(rhs, y, dy0, t, step, 2 * (k + 1));
      // Aitken-Neville extrapolation in h^2; table[0] ends up most extrapolated.
      for (int j = k - 1; j >= 0; --j) {
        const Real ratio = Real(k + 1) / Real(j + 1);
        const Real denom = ratio * ratio - 1;
        for (std::size_t i = 0; i < N; ++i) table[j][i] = table[j + 1][i] + (table[j + 1][i] - table[j][i]) / denom;
      }
      if (k >= 2) {
        err = 0;
        for (std::size_t i = 0; i < N; ++i) err = std::max<Real>(err, abs(table[0][i] - table[1][i]));
        if (err <= tol * scale) {
          converged_at = k;
          break;
        }
      }
    }

    if (converged_at < 0) {
      ++res.rejected;
      H = step / 2;
      if (H < min_step) {
        std::ostringstream msg;
        msg << "step size underflow at tau = " << static_cast<double>(t);
        throw IntegrationError(msg.str(), static_cast<double>(t));
      }
      continue;
    }

    y = table[0];
    t = clipped ? target : t + step;
    ++res.steps;

    if (opts.renormalize_above > 0) {
      const Real m = detail::max_abs(y);
      if (m > Real(opts.renormalize_above)) {
        using std::log;
        for (auto& v : y) v /= m;
        res.log_scale += log(m);
      }
    }
    while (next_stop < stops.size() && stops[next_stop] <= t) {
      observer(stops[next_stop], y, res.log_scale);
      ++next_stop;
    }

    // Grow or shrink the nominal step depending on how many columns were needed.
    const Real ratio = err > 0 ? err / (tol * scale) : Real(1e-3);
    Real factor = Real(0.94) * pow(Real(0.65) / ratio, Real(1) / Real(2 * converged_at + 1));
    factor = std::clamp<Real>(factor, Real(0.2), Real(4));
    if (converged_at >= detail::kMaxColumns - 2) factor = std::min<Real>(factor, Real(0.7));
    if (!clipped || step >= H) H = step * factor;
  }
  res.state = y;
  return res;
}

}  // namespace magtunnel::numerics
