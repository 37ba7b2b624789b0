#pragma once

// Spectral side of the instanton calculation: Green function of the
// fluctuation operator, the two quasi-zero eigenvalues at finite horizon,
// zero-mode norms and Jacobians, and assembly of the decay rate.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "magtunnel/errors.hpp"
#include "magtunnel/jacobi.hpp"
#include "magtunnel/model.hpp"
#include "magtunnel/numerics/jet.hpp"
#include "magtunnel/numerics/quadrature.hpp"

namespace magtunnel {

/// G(tau, tau') with A G = -I delta(tau - tau') and G = 0 for tau < tau'.
/// Rows are field components (xi, eta), columns the source component.
struct GreenFunctionTable {
  FluctuationProblem problem;
  double T = 0.0;

  template <class S>
  std::array<std::array<S, 2>, 2> evaluate(S tau, double tau_prime) const {
    std::array<std::array<S, 2>, 2> g{};
    const double t = value_of(tau);
    if (t < tau_prime) return g;
    const auto b = basis_at<S>(problem, tau);
    for (int col = 0; col < 2; ++col) {
      const auto c = unit_kick_coefficients(problem, tau_prime, col);
      for (std::size_t i = 0; i < 4; ++i) {
        g[0][col] += b[i].xi * c[i];
        g[1][col] += b[i].eta * c[i];
      }
    }
    return g;
  }

  Eigen::Matrix2d operator()(double tau, double tau_prime) const {
    const auto g = evaluate<double>(tau, tau_prime);
    Eigen::Matrix2d m;
    m << g[0][0], g[0][1], g[1][0], g[1][1];
    return m;
  }

 private:
  static double value_of(double x) { return x; }
  static double value_of(const numerics::Jet<double>& x) { return x.v; }
};

inline GreenFunctionTable make_green_function(const ModelParams& p, double T) {
  GreenFunctionTable g;
  g.problem = FluctuationProblem::from(p);
  g.T = snap_horizon(p, T);
  return g;
}

inline Eigen::Matrix2d green_function(const ModelParams& p, double T, double tau, double tau_prime) {
  const auto g = make_green_function(p, T);
  const double slack = 1e-12 * g.T;
  if (std::abs(tau) > g.T + slack || std::abs(tau_prime) > g.T + slack)
    throw DomainError("green_function arguments must lie in [-T, T] for the snapped horizon");
  return g(tau, tau_prime);
}

/// Which quasi-zero mode: the rotation mode phi1 or the translation mode phi2.
enum class ZeroMode { Rotation = 0, Translation = 1 };

struct ZeroEigenvalue {
  double lambda = 0.0;
  double condition = 0.0;  // of the equilibrated boundary system
  Eigen::Vector4d coefficients = Eigen::Vector4d::Zero();  // other-basis weights, then lambda
};

struct ZeroEigenvalues {
  double T = 0.0;
  double T_requested = 0.0;
  double lambda_phi = 0.0;
  double lambda_tau = 0.0;
  double asymptotic_phi = 0.0;  // 8 Omega^2 e^{-2 Omega T}
  double asymptotic_tau = 0.0;  // 24 Omega^2 e^{-2 Omega T}
  double condition = 0.0;       // worse of the two solves
};

inline constexpr double kMaxCondition = 1e12;

/// Lowest eigenvalue continuing the zero mode `which` at finite horizon.
/// psi = phi_mode + sum_k x_k phi_k - lambda * int G(., t') phi_mode(t') dt'
/// must vanish at both ends; the four conditions fix the three weights and lambda.
inline ZeroEigenvalue extract_zero_eigenvalue(const FluctuationProblem& fp, double T, ZeroMode which) {
  const std::size_t mode = static_cast<std::size_t>(which);
  std::array<std::size_t, 3> others{};
  for (std::size_t i = 0, k = 0; i < 4; ++i)
    if (i != mode) others[k++] = i;

  // int G(T, t') phi_mode(t') dt' = sum_i phi_i(T) * overlap_i with
  // overlap = int (-phi3, -phi4, phi1, phi2) . phi_mode.  Only solutions sharing
  // the direction of phi_mode contribute, through their radial profiles.
  const std::array<std::size_t, 4> partner{2, 3, 0, 1};
  const std::array<double, 4> sign{-1.0, -1.0, 1.0, 1.0};
  std::array<double, 4> overlap{};
  for (std::size_t i = 0; i < 4; ++i) {
    if (kBasisDirection[partner[i]] != kBasisDirection[mode]) continue;
    auto integrand = [&](double t) {
      const auto f = basis_profiles<double>(fp.Omega, t);
      return sign[i] * f[partner[i]] * f[mode];
    };
    overlap[i] = numerics::integrate(integrand, -T, 0.0, 1e-13, T / fp.Omega).value +
                 numerics::integrate(integrand, 0.0, T, 1e-13, T / fp.Omega).value;
  }
  const auto at_end = basis_at<double>(fp, T);
  const auto at_start = basis_at<double>(fp, -T);
  double born_xi = 0.0, born_eta = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    born_xi += at_end[i].xi * overlap[i];
    born_eta += at_end[i].eta * overlap[i];
  }

  Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
  Eigen::Vector4d rhs;
  for (int k = 0; k < 3; ++k) {
    const auto o = others[static_cast<std::size_t>(k)];
    A(0, k) = at_start[o].xi;
    A(1, k) = at_start[o].eta;
    A(2, k) = at_end[o].xi;
    A(3, k) = at_end[o].eta;
  }
  A(2, 3) = -born_xi;
  A(3, 3) = -born_eta;
  rhs << -at_start[mode].xi, -at_start[mode].eta, -at_end[mode].xi, -at_end[mode].eta;

  // Entries range over e^{+-Omega T}; equilibrate before judging conditioning.
  Eigen::Vector4d col_scale, row_scale;
  for (int j = 0; j < 4; ++j) {
    const double m = A.col(j).cwiseAbs().maxCoeff();
    col_scale(j) = m > 0.0 ? 1.0 / m : 1.0;
  }
  Eigen::Matrix4d B = A * col_scale.asDiagonal();
  for (int i = 0; i < 4; ++i) {
    const double m = B.row(i).cwiseAbs().maxCoeff();
    row_scale(i) = m > 0.0 ? 1.0 / m : 1.0;
  }
  B = row_scale.asDiagonal() * B;
  Eigen::JacobiSVD<Eigen::Matrix4d> svd(B);
  const auto sv = svd.singularValues();
  const double cond = sv(3) > 0.0 ? sv(0) / sv(3) : std::numeric_limits<double>::infinity();
  if (!(cond <= kMaxCondition)) {
    throw IllConditionedError("zero-eigenvalue boundary system is ill-conditioned (condition " +
                                  std::to_string(cond) + "); try a larger snapped horizon",
                              cond);
  }
  const Eigen::Vector4d y = B.fullPivLu().solve(row_scale.asDiagonal() * rhs);
  ZeroEigenvalue out;
  out.coefficients = col_scale.asDiagonal() * y;
  out.lambda = out.coefficients(3);
  out.condition = cond;
  return out;
}

inline ZeroEigenvalues extract_zero_eigenvalues(const ModelParams& p, double T) {
  const auto fp = FluctuationProblem::from(p);
  ZeroEigenvalues out;
  out.T_requested = T;
  out.T = snap_horizon(p, T);
  require_long_horizon(fp.Omega, out.T, 6.0, "extract_zero_eigenvalues");
  const auto phi = extract_zero_eigenvalue(fp, out.T, ZeroMode::Rotation);
  const auto tau = extract_zero_eigenvalue(fp, out.T, ZeroMode::Translation);
  out.lambda_phi = phi.lambda;
  out.lambda_tau = tau.lambda;
  out.condition = std::max(phi.condition, tau.condition);
  const double decay = fp.Omega * fp.Omega * std::exp(-2.0 * fp.Omega * out.T);
  out.asymptotic_phi = 8.0 * decay;
  out.asymptotic_tau = 24.0 * decay;
  return out;
}

namespace detail {

inline constexpr double kCutoff = 40.0;  // truncation |tau| < kCutoff / Omega

// Integrand decays like 4 e^{-2 Omega |tau|}.
template <class F>
double real_line_integral(F&& f, double Omega, double tail_amplitude) {
  return numerics::integrate_real_line(std::forward<F>(f), kCutoff / Omega, tail_amplitude, 2.0 * Omega, 1e-14)
      .value;
}

}  // namespace detail

struct ModeNorms {
  double norm_phi1 = 0.0;
  double norm_phi2 = 0.0;
  double closed_phi1 = 0.0;  // sqrt(2 / Omega)
  double closed_phi2 = 0.0;  // sqrt(2 / (3 Omega))
};

inline ModeNorms mode_norms(const ModelParams& p) {
  const auto fp = FluctuationProblem::from(p);
  auto sq = [&](std::size_t i) {
    return [&fp, i](double t) {
      const auto b = basis_at<double>(fp, t);
      return b[i].xi * b[i].xi + b[i].eta * b[i].eta;
    };
  };
  ModeNorms n;
  n.norm_phi1 = std::sqrt(detail::real_line_integral(sq(0), fp.Omega, 4.0));
  n.norm_phi2 = std::sqrt(detail::real_line_integral(sq(1), fp.Omega, 4.0));
  n.closed_phi1 = std::sqrt(2.0 / fp.Omega);
  n.closed_phi2 = std::sqrt(2.0 / (3.0 * fp.Omega));
  return n;
}

/// Jacobian of (c_phi, c_tau) -> (phi0, tau0): the change of variables
///   dr/dphi0 = Omega / sqrt(2 alpha) phi1,
///   dr/dtau0 = omega_c/2 * Omega / sqrt(2 alpha) phi1 + Omega^2 / sqrt(2 alpha) phi2
/// is triangular in the normalized modes, so the determinant is the product of
/// the diagonal entries.
inline double zero_mode_jacobian(const ModelParams& p) {
  const auto fp = FluctuationProblem::from(p);
  const auto n = mode_norms(p);
  const double amp = fp.Omega / std::sqrt(2.0 * p.alpha);
  return (amp * n.norm_phi1) * (fp.Omega * amp * n.norm_phi2);
}

inline double zero_mode_jacobian_closed_form(const ModelParams& p) {
  const double Omega = derived_frequency(p);
  return Omega * Omega / (std::sqrt(3.0) * p.alpha);
}

/// Matrix of inner products <d r_cl / d phi0, chi_i> and <d r_cl / d tau, chi_i>
/// with chi_i = phi_i / |phi_i|; rows i = 1, 2.
inline Eigen::Matrix2d faddeev_popov_matrix(const ModelParams& p) {
  const auto fp = FluctuationProblem::from(p);
  const auto norms = mode_norms(p);
  const double amp = fp.Omega / std::sqrt(2.0 * p.alpha);
  const double k = 0.5 * fp.omega_c;
  // Bounce with phi0 = 0: (r cos(k t), -r sin(k t)).
  auto tangents = [&](double t) {
    using J = numerics::Jet<double>;
    const J tau = J::variable(t);
    const J r = J(amp) / numerics::cosh(tau * fp.Omega);
    const J angle = tau * (-k);
    const J x = r * numerics::cos(angle);
    const J y = r * numerics::sin(angle);
    // d/dphi0 rotates the point by 90 degrees.
    return std::array<Vec2, 2>{Vec2{-y.v, x.v}, Vec2{x.d1, y.d1}};
  };
  Eigen::Matrix2d m;
  const std::array<double, 2> norm{norms.norm_phi1, norms.norm_phi2};
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      auto f = [&, i, j](double t) {
        const auto b = basis_at<double>(fp, t);
        const auto d = tangents(t)[j];
        return (d.xi * b[i].xi + d.eta * b[i].eta) / norm[i];
      };
      // Tails are below 1e-30 of the integral at the cutoff.
      m(static_cast<int>(i), static_cast<int>(j)) =
          numerics::integrate_real_line(f, detail::kCutoff / fp.Omega, 0.0, 1.0, 1e-14, amp).value;
    }
  }
  return m;
}

inline double faddeev_popov_determinant(const ModelParams& p) {
  return std::abs(faddeev_popov_matrix(p).determinant());
}

struct AppendixIntegrals {
  double sech2 = 0.0;        // 2
  double sinh2_sech4 = 0.0;  // 2/3
  double sech4 = 0.0;        // 4/3
};

inline AppendixIntegrals appendix_integrals() {
  AppendixIntegrals a;
  a.sech2 = detail::real_line_integral([](double x) { return 1.0 / std::pow(std::cosh(x), 2); }, 1.0, 4.0);
  a.sinh2_sech4 = detail::real_line_integral(
      [](double x) { return std::pow(std::sinh(x), 2) / std::pow(std::cosh(x), 4); }, 1.0, 4.0);
  a.sech4 = numerics::integrate_real_line([](double x) { return 1.0 / std::pow(std::cosh(x), 4); },
                                          detail::kCutoff, 16.0, 4.0, 1e-14)
                .value;
  return a;
}

struct RateBreakdown {
  ModelParams params;
  ModelParams pipeline;      // Euclidean parameters the determinants were evaluated at
  double T = 0.0;            // snapped horizon
  double T_requested = 0.0;
  double Omega = 0.0;
  double S_cl = 0.0;
  double J = 0.0;
  double log_J0 = 0.0;
  double lambda_phi = 0.0;
  double lambda_tau = 0.0;
  double norm_phi1 = 0.0;
  double norm_phi2 = 0.0;
  double jacobian_phi_tau = 0.0;
  double K_magnitude = 0.0;
  double Gamma = 0.0;
  double Gamma_closed_form = 0.0;

  double relative_deviation() const { return std::abs(Gamma - Gamma_closed_form) / Gamma_closed_form; }
};

/// Euclidean parameters at which the determinant pipeline runs.  Physical mode
/// is the continued point: frequency Omega_phys with no residual field term.
inline ModelParams pipeline_params(const ModelParams& p) {
  p.validate();
  if (p.mode == Continuation::Euclidean) return p;
  return ModelParams{derived_frequency(p), 0.0, p.alpha, Continuation::Euclidean};
}

/// Instanton-gas rate from the determinant pipeline:
///   K = 1/2 * sqrt(J0 lambda_phi lambda_tau / |J|) * J_phitau / (2 pi),
///   Gamma = 4 pi |K| e^{-S_cl}.
/// The negative eigenvalue cancels between det' and the removed modes and is
/// never computed; the 1/2 is the half Gaussian over the unstable direction.
inline RateBreakdown assemble_rate(const ModelParams& p, double T, const JacobiOptions& opts = {}) {
  RateBreakdown out;
  out.params = p;
  out.pipeline = pipeline_params(p);
  const auto fp = FluctuationProblem::from(out.pipeline);
  out.Omega = fp.Omega;
  out.T_requested = T;
  out.T = snap_horizon(out.pipeline, T);
  require_long_horizon(fp.Omega, out.T, 8.0, "assemble_rate");

  const auto closed = decay_rate_closed_form(p);
  out.S_cl = closed.action;
  out.Gamma_closed_form = closed.gamma;

  const auto J = determinant_J(out.pipeline, out.T, opts);
  const auto J0 = determinant_J0(out.pipeline, out.T, opts);
  const auto zero = extract_zero_eigenvalues(out.pipeline, out.T);
  const auto norms = mode_norms(out.pipeline);
  if (J.sign >= 0) throw RegimeError("bounce determinant J came out non-negative; expected one negative mode");
  if (!(zero.lambda_phi > 0.0 && zero.lambda_tau > 0.0))
    throw RegimeError("quasi-zero eigenvalues must be positive; increase the horizon");

  out.J = J.value;
  out.log_J0 = J0.log_abs;
  out.lambda_phi = zero.lambda_phi;
  out.lambda_tau = zero.lambda_tau;
  out.norm_phi1 = norms.norm_phi1;
  out.norm_phi2 = norms.norm_phi2;
  out.jacobian_phi_tau = zero_mode_jacobian(out.pipeline);

  const double log_ratio = J0.log_abs + std::log(zero.lambda_phi) + std::log(zero.lambda_tau) - J.log_abs;
  const double log_K = std::log(0.5) + 0.5 * log_ratio + std::log(out.jacobian_phi_tau) -
                       std::log(2.0 * std::numbers::pi);
  out.K_magnitude = std::exp(log_K);
  out.Gamma = 4.0 * std::numbers::pi * std::exp(log_K - out.S_cl);
  return out;
}

}  // namespace magtunnel
