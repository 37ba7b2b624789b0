#pragma once

// Jacobi fields of the Euclidean bounce: the four closed-form fundamental
// solutions of the fluctuation system, an independent numerical integration
// of the same system, and the endpoint determinants J (bounce) and J0
// (trivial trajectory).

#include <Eigen/Dense>
#include <boost/multiprecision/float128.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "magtunnel/errors.hpp"
#include "magtunnel/model.hpp"
#include "magtunnel/numerics/extrapolation.hpp"
#include "magtunnel/numerics/jet.hpp"

namespace magtunnel {

using quad = boost::multiprecision::float128;

/// Fluctuation vector (xi, eta) = (delta x, delta y).
template <class S>
struct Fluct {
  S xi{};
  S eta{};
};

using Vec2 = Fluct<double>;

/// The bounce data the fluctuation operator depends on: Omega and omega_c in
/// Euclidean convention.
struct FluctuationProblem {
  double Omega = 1.0;
  double omega_c = 0.0;

  static FluctuationProblem from(const ModelParams& p) {
    if (p.mode != Continuation::Euclidean)
      throw DomainError("fluctuation analysis runs in the Euclidean continuation");
    return {derived_frequency(p), p.omega_c};
  }
};

/// Snap a requested horizon to T' = 4 pi k / omega_c (nearest k >= 1) so that
/// sin(omega_c T / 2) = 0 and cos(omega_c T / 2) = 1.  Without field T is kept.
inline double snap_horizon(const ModelParams& p, double T) {
  p.validate();
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("horizon T must be positive and finite");
  if (p.omega_c == 0.0) return T;
  const double period = 4.0 * std::numbers::pi / p.omega_c;
  const double k = std::max(1.0, std::round(T / period));
  return k * period;
}

/// Radial profiles f1..f4 of the fundamental solutions (field independent).
template <class S>
std::array<S, 4> basis_profiles(double Omega, S tau) {
  using std::cosh, std::sinh;
  using numerics::cosh, numerics::sinh;
  const double W = Omega;
  const S x = tau * W;
  const S ch = cosh(x);
  const S sh = sinh(x);
  return {S(1.0) / ch, sh / (ch * ch), sh / (2.0 * W) + tau / (ch * 2.0),
          sh * sh / (ch * (2.0 * W)) + tau * sh * 1.5 / (ch * ch) - S(1.0) / (ch * W)};
}

/// phi1, phi3 point along u = (s, c); phi2, phi4 along v = (-c, s); u . v = 0.
inline constexpr std::array<int, 4> kBasisDirection{0, 1, 0, 1};

/// The four fundamental solutions at `tau`:
///   phi1 = sech(W t) (s, c)                                  (rotation zero mode)
///   phi2 = sinh(W t)/cosh^2(W t) (-c, s)                     (translation zero mode)
///   phi3 = [sinh(W t)/(2W) + t/(2 cosh W t)] (s, c)
///   phi4 = [sinh^2/(2W cosh) + 3 t sinh/(2 cosh^2) - 1/(W cosh)] (-c, s)
/// with s = sin(omega_c t / 2), c = cos(omega_c t / 2).  S may be a jet type.
template <class S>
std::array<Fluct<S>, 4> basis_at(const FluctuationProblem& fp, S tau) {
  using std::cos, std::sin;
  using numerics::cos, numerics::sin;
  const auto f = basis_profiles<S>(fp.Omega, tau);
  const S half_angle = tau * (0.5 * fp.omega_c);
  const S s = sin(half_angle);
  const S c = cos(half_angle);
  return {{{f[0] * s, f[0] * c}, {-(f[1] * c), f[1] * s}, {f[2] * s, f[2] * c}, {-(f[3] * c), f[3] * s}}};
}

/// Second derivatives of U along the bounce (phi0 = 0), expressed through
/// Omega and omega_c.
template <class Real>
struct Hessian {
  Real xx, yy, xy;
};

template <class Real>
Hessian<Real> hessian_along_bounce(Real Omega, Real omega_c, Real tau) {
  using std::cos, std::cosh, std::sin;
  const Real ch = cosh(Omega * tau);
  const Real sech2 = 1 / (ch * ch);
  const Real c = cos(omega_c * tau / 2);
  const Real s = sin(omega_c * tau / 2);
  const Real W2 = Omega * Omega;
  const Real base = W2 + omega_c * omega_c / 4;
  return {-(2 * W2 + 4 * W2 * c * c) * sech2 + base, -(2 * W2 + 4 * W2 * s * s) * sech2 + base,
          4 * W2 * s * c * sech2};
}

/// (A phi)(tau) for the fluctuation operator
///   A = [[-d^2 + U_xx, omega_c d + U_xy], [-omega_c d + U_xy, -d^2 + U_yy]]
/// given phi with its first and second derivatives.
inline Vec2 apply_fluctuation_operator(const FluctuationProblem& fp, double tau,
                                       const Fluct<numerics::Jet<double>>& phi) {
  const auto h = hessian_along_bounce<double>(fp.Omega, fp.omega_c, tau);
  return {-phi.xi.d2 + fp.omega_c * phi.eta.d1 + h.xx * phi.xi.v + h.xy * phi.eta.v,
          -phi.eta.d2 - fp.omega_c * phi.xi.d1 + h.yy * phi.eta.v + h.xy * phi.xi.v};
}

struct BasisSolutions {
  double T = 0.0;            // horizon actually used (snapped)
  double T_requested = 0.0;
  std::vector<double> grid;  // uniform on [-T, T]
  std::array<std::vector<Vec2>, 4> phi;
};

inline constexpr int kDefaultGrid = 4001;

/// Samples the four closed-form solutions on a uniform symmetric grid.
inline BasisSolutions analytic_basis(const ModelParams& p, double T, int n_grid = kDefaultGrid) {
  const auto fp = FluctuationProblem::from(p);
  if (n_grid < 2001) throw DomainError("analytic_basis needs n_grid >= 2001");
  BasisSolutions out;
  out.T_requested = T;
  out.T = snap_horizon(p, T);
  out.grid.resize(static_cast<std::size_t>(n_grid));
  for (auto& v : out.phi) v.resize(out.grid.size());
  const double step = 2.0 * out.T / (n_grid - 1);
  const int mid = (n_grid - 1) / 2;
  for (int i = 0; i < n_grid; ++i) {
    // Index from the centre so that the grid is exactly symmetric.
    const double tau = (n_grid % 2 == 1) ? (i - mid) * step : -out.T + i * step;
    out.grid[static_cast<std::size_t>(i)] = tau;
    const auto b = basis_at<double>(fp, tau);
    for (int k = 0; k < 4; ++k) out.phi[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(k)];
  }
  return out;
}

/// Coefficients of the solution with data xi = eta = 0 and unit derivative in
/// component `col` (0 -> xi, 1 -> eta) at tau0, in the basis phi1..phi4:
///   col 0:  (-xi3, -xi4, xi1, xi2)(tau0)
///   col 1:  (-eta3, -eta4, eta1, eta2)(tau0)
inline std::array<double, 4> unit_kick_coefficients(const FluctuationProblem& fp, double tau0, int col) {
  const auto b = basis_at<double>(fp, tau0);
  if (col == 0) return {-b[2].xi, -b[3].xi, b[0].xi, b[1].xi};
  return {-b[2].eta, -b[3].eta, b[0].eta, b[1].eta};
}

/// Jacobi matrix from the closed-form basis: columns are the solutions started
/// at tau0 with unit derivative, evaluated at tau.
inline Eigen::Matrix2d analytic_jacobi_matrix(const FluctuationProblem& fp, double tau0, double tau) {
  const auto b = basis_at<double>(fp, tau);
  Eigen::Matrix2d m;
  for (int col = 0; col < 2; ++col) {
    const auto c = unit_kick_coefficients(fp, tau0, col);
    double xi = 0.0, eta = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      xi += c[i] * b[i].xi;
      eta += c[i] * b[i].eta;
    }
    m(0, col) = xi;
    m(1, col) = eta;
  }
  return m;
}

struct JacobiOptions {
  double tolerance = 1e-10;  // target relative accuracy of the endpoint determinant
  int n_grid = kDefaultGrid; // 0 disables sampling
  double renormalize_above = 1e120;
};

/// J(tau) = scaled * exp(log_scale); columns (J_xx, J_yx) and (J_xy, J_yy).
struct JacobiSample {
  double tau = 0.0;
  Eigen::Matrix2d scaled = Eigen::Matrix2d::Zero();
  double log_scale = 0.0;

  Eigen::Matrix2d value() const { return scaled * std::exp(log_scale); }
};

struct JacobiMatrix {
  double T = 0.0;
  double T_requested = 0.0;
  std::vector<JacobiSample> samples;
  JacobiSample at_horizon;
  double log_abs_det = 0.0;  // log |det J(T)|, accumulated in float128
  quad log_abs_det_wide = 0;  // the same before rounding to double
  int det_sign = 0;
  std::size_t steps = 0;

  double determinant() const { return det_sign * std::exp(log_abs_det); }
};

namespace detail {

// Local step tolerance: the determinant is O(1) while the fields pass through
// O(e^{Omega T}), so step errors are amplified by e^{2 Omega T}.
inline double local_tolerance(double target, double Omega, double T) {
  const double scaled = target * std::exp(-2.0 * Omega * T);
  return std::clamp(scaled, 1e-32, target);
}

template <class Rhs>
JacobiMatrix integrate_unit_kicks(Rhs&& rhs, double T_used, double T_requested, double local_tol,
                                  const JacobiOptions& opts) {
  std::array<quad, 8> y{0, 0, 1, 0, 0, 0, 0, 1};  // (xi, eta, xi', eta') per column
  numerics::ExtrapolationOptions eo;
  eo.rel_tol = local_tol;
  eo.renormalize_above = opts.renormalize_above;

  JacobiMatrix out;
  out.T = T_used;
  out.T_requested = T_requested;

  std::vector<quad> stops;
  if (opts.n_grid > 0) {
    if (opts.n_grid < 2) throw DomainError("n_grid must be 0 or at least 2");
    stops.reserve(static_cast<std::size_t>(opts.n_grid));
    const int mid = (opts.n_grid - 1) / 2;
    const quad step = quad(2 * T_used) / (opts.n_grid - 1);
    for (int i = 0; i < opts.n_grid; ++i)
      stops.push_back(opts.n_grid % 2 == 1 ? quad(i - mid) * step : quad(-T_used) + step * i);
    stops.front() = -T_used;
    stops.back() = T_used;
    out.samples.reserve(stops.size());
  }
  auto observer = [&out](const quad& t, const std::array<quad, 8>& s, const quad& log_scale) {
    JacobiSample smp;
    smp.tau = static_cast<double>(t);
    smp.scaled << static_cast<double>(s[0]), static_cast<double>(s[4]), static_cast<double>(s[1]),
        static_cast<double>(s[5]);
    smp.log_scale = static_cast<double>(log_scale);
    out.samples.push_back(smp);
  };
  const auto flow = numerics::integrate_extrapolated<quad, 8>(rhs, y, quad(-T_used), quad(T_used), eo,
                                                            std::span<const quad>(stops), observer);
  const auto& s = flow.state;
  out.steps = flow.steps;
  out.at_horizon.tau = T_used;
  out.at_horizon.scaled << static_cast<double>(s[0]), static_cast<double>(s[4]), static_cast<double>(s[1]),
      static_cast<double>(s[5]);
  out.at_horizon.log_scale = static_cast<double>(flow.log_scale);
  const quad det = s[0] * s[5] - s[4] * s[1];
  using boost::multiprecision::abs, boost::multiprecision::log;
  if (det == 0) throw IntegrationError("Jacobi determinant vanished to working precision", T_used);
  out.det_sign = det < 0 ? -1 : 1;
  out.log_abs_det_wide = log(abs(det)) + 2 * flow.log_scale;
  out.log_abs_det = static_cast<double>(out.log_abs_det_wide);
  return out;
}

}  // namespace detail

/// Integrates the Jacobi-field system around the bounce from tau = -T with
/// J(-T) = 0, J'(-T) = I.  Runs in float128 with Bulirsch-Stoer extrapolation.
inline JacobiMatrix integrate_jacobi(const ModelParams& p, double T, const JacobiOptions& opts = {}) {
  const auto fp = FluctuationProblem::from(p);
  const double T_used = snap_horizon(p, T);
  const quad W = fp.Omega;
  const quad wc = fp.omega_c;
  auto rhs = [W, wc](const std::array<quad, 8>& s, std::array<quad, 8>& d, const quad& t) {
    const auto h = hessian_along_bounce<quad>(W, wc, t);
    for (int k = 0; k < 2; ++k) {
      const quad& xi = s[4 * k];
      const quad& eta = s[4 * k + 1];
      const quad& dxi = s[4 * k + 2];
      const quad& deta = s[4 * k + 3];
      d[4 * k] = dxi;
      d[4 * k + 1] = deta;
      d[4 * k + 2] = wc * deta + h.xx * xi + h.xy * eta;
      d[4 * k + 3] = -wc * dxi + h.yy * eta + h.xy * xi;
    }
  };
  return detail::integrate_unit_kicks(rhs, T_used, T, detail::local_tolerance(opts.tolerance, fp.Omega, T_used),
                                      opts);
}

/// Same boundary data for the trivial trajectory r = 0 (constant coefficients).
inline JacobiMatrix integrate_trivial_jacobi(const ModelParams& p, double T, const JacobiOptions& opts = {}) {
  const auto fp = FluctuationProblem::from(p);
  const double T_used = snap_horizon(p, T);
  const quad wc = fp.omega_c;
  const quad k2 = quad(fp.Omega) * quad(fp.Omega) + wc * wc / 4;
  auto rhs = [wc, k2](const std::array<quad, 8>& s, std::array<quad, 8>& d, const quad&) {
    for (int k = 0; k < 2; ++k) {
      d[4 * k] = s[4 * k + 2];
      d[4 * k + 1] = s[4 * k + 3];
      d[4 * k + 2] = wc * s[4 * k + 3] + k2 * s[4 * k];
      d[4 * k + 3] = -wc * s[4 * k + 2] + k2 * s[4 * k + 1];
    }
  };
  return detail::integrate_unit_kicks(rhs, T_used, T, detail::local_tolerance(opts.tolerance, fp.Omega, T_used),
                                      opts);
}

struct DeterminantResult {
  double T = 0.0;
  double T_requested = 0.0;
  double value = 0.0;           // may be +inf for J0 at very long horizons; use log_abs
  double log_abs = 0.0;
  int sign = 0;
  double asymptotic = 0.0;      // large-T closed form
  double asymptotic_log = 0.0;  // log |asymptotic|
  // Deviation from the asymptote evaluated in float128, so that it stays
  // meaningful below double resolution: log |value| - log |asymptotic| and
  // value / asymptotic - 1.
  double log_deviation = 0.0;
  double relative_deviation = 0.0;
  std::size_t steps = 0;
};

namespace detail {

inline void set_deviation(DeterminantResult& r, const quad& log_dev) {
  using boost::multiprecision::expm1;
  r.log_deviation = static_cast<double>(log_dev);
  r.relative_deviation = static_cast<double>(expm1(log_dev));
}

}  // namespace detail

inline void require_long_horizon(double Omega, double T, double min_omega_t, const char* what) {
  if (Omega * T < min_omega_t) {
    throw RegimeError(std::string(what) + " needs Omega*T >= " + std::to_string(min_omega_t) +
                      " after snapping (got " + std::to_string(Omega * T) + "); request a longer horizon");
  }
}

/// det J(T) for the bounce; large-T limit -1/Omega^2.
inline DeterminantResult determinant_J(const ModelParams& p, double T, JacobiOptions opts = {}) {
  const auto fp = FluctuationProblem::from(p);
  require_long_horizon(fp.Omega, snap_horizon(p, T), 6.0, "determinant_J");
  opts.n_grid = 0;
  const auto jm = integrate_jacobi(p, T, opts);
  DeterminantResult r;
  r.T = jm.T;
  r.T_requested = T;
  r.sign = jm.det_sign;
  r.log_abs = jm.log_abs_det;
  r.value = jm.determinant();
  r.asymptotic = -1.0 / (fp.Omega * fp.Omega);
  r.asymptotic_log = std::log(std::abs(r.asymptotic));
  const quad W = fp.Omega;
  detail::set_deviation(r, jm.log_abs_det_wide - log(1 / (W * W)));
  r.steps = jm.steps;
  return r;
}

/// det J0(T) for the trivial trajectory; large-T limit e^{4 Omega T} / (4 Omega^2).
/// The value overflows double for Omega T >~ 177; log_abs stays exact.
inline DeterminantResult determinant_J0(const ModelParams& p, double T, JacobiOptions opts = {}) {
  const auto fp = FluctuationProblem::from(p);
  opts.n_grid = 0;
  const auto jm = integrate_trivial_jacobi(p, T, opts);
  DeterminantResult r;
  r.T = jm.T;
  r.T_requested = T;
  r.sign = jm.det_sign;
  r.log_abs = jm.log_abs_det;
  r.value = jm.determinant();
  r.asymptotic_log = 4.0 * fp.Omega * jm.T - std::log(4.0 * fp.Omega * fp.Omega);
  r.asymptotic = std::exp(r.asymptotic_log);
  const quad W = fp.Omega;
  detail::set_deviation(r, jm.log_abs_det_wide - (4 * W * quad(jm.T) - log(4 * W * W)));
  r.steps = jm.steps;
  return r;
}

}  // namespace magtunnel
