#pragma once

// A single vortex in a thin superconducting disk of radius R in a
// perpendicular field.  With r measured in units of R and reduced field
// h = H pi R^2 / Phi0 the London and image-vortex terms combine into
//   V(r) = V0 [h^2/4 + ln(R/xi) - h (1 - r^2) + ln(1 - r^2)],
//   V0 = d Phi0^2 / (16 pi^2 lambda^2).
// For h > 1 the centre is a metastable well; its small-r expansion is the
// inverted double well of model.hpp, which gives the quantum escape rate.

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "magtunnel/errors.hpp"
#include "magtunnel/model.hpp"

namespace magtunnel {

struct VortexDot {
  double R = 50.0;          // disk radius
  double xi = 1.0;          // coherence length
  double lambda_L = 100.0;  // penetration depth
  double d = 1.0;           // thickness
  double Phi0 = 400.0;      // flux quantum
  double M = 1.0;           // vortex mass
  double magnus = 0.0;      // effective cyclotron frequency of the vortex
  double hbar = 1.0;
  double k_B = 1.0;

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!std::isfinite(v) || v <= 0.0) throw DomainError(std::string(name) + " must be positive and finite");
    };
    positive(R, "R");
    positive(xi, "xi");
    positive(lambda_L, "lambda_L");
    positive(d, "d");
    positive(Phi0, "Phi0");
    positive(M, "M");
    positive(hbar, "hbar");
    positive(k_B, "k_B");
    if (!(R > xi)) throw DomainError("disk radius R must exceed the coherence length xi");
    if (!std::isfinite(magnus) || magnus < 0.0) throw DomainError("magnus must be non-negative and finite");
  }

  /// d Phi0^2 / (16 pi^2 lambda^2).
  double energy_scale() const {
    const double pi2 = std::numbers::pi * std::numbers::pi;
    return d * Phi0 * Phi0 / (16.0 * pi2 * lambda_L * lambda_L);
  }

  /// H = h Phi0 / (pi R^2).
  double field_from_reduced(double h) const { return h * Phi0 / (std::numbers::pi * R * R); }

  /// Largest h whose barrier top sqrt(1 - 1/h) stays a core size away from the edge.
  double max_reduced_field() const {
    const double edge = 1.0 - xi / R;
    return 1.0 / (1.0 - edge * edge);
  }
};

/// V(r) with r in units of R, 0 <= r < 1.
inline double london_potential(const VortexDot& dot, double h, double r) {
  dot.validate();
  if (!(r >= 0.0)) throw DomainError("radius must be non-negative");
  if (r >= 1.0) throw DomainError("the potential diverges at the disk edge (r >= 1)");
  const double u = 1.0 - r * r;
  return dot.energy_scale() * (0.25 * h * h + std::log(dot.R / dot.xi) - h * u + std::log(u));
}

struct BarrierGeometry {
  double h = 0.0;
  double r_barrier = 0.0;  // units of R; 0 when there is no well
  double deltaV = 0.0;     // V(r_barrier) - V(0)
  bool well_exists = false;
};

/// Barrier top at 1 - r^2 = 1/h with height V0 (h - 1 - ln h), present for h > 1.
inline BarrierGeometry barrier_geometry(const VortexDot& dot, double h) {
  dot.validate();
  if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("reduced field h must be positive");
  BarrierGeometry g;
  g.h = h;
  if (h <= 1.0) return g;
  g.well_exists = true;
  g.r_barrier = std::sqrt(1.0 - 1.0 / h);
  g.deltaV = dot.energy_scale() * (h - 1.0 - std::log(h));
  return g;
}

/// Coefficients of V(rho) = c0 + c2 rho^2 + c4 rho^4 + O(rho^6), rho = r R.
struct LondonSeries {
  double c0 = 0.0;
  double c2 = 0.0;
  double c4 = 0.0;
};

inline LondonSeries london_series(const VortexDot& dot, double h) {
  dot.validate();
  const double V0 = dot.energy_scale();
  const double R2 = dot.R * dot.R;
  return {V0 * (0.25 * h * h + std::log(dot.R / dot.xi) - h), V0 * (h - 1.0) / R2, -0.5 * V0 / (R2 * R2)};
}

/// Unit-mass quartic model of the well: U = V / M with
///   omega^2 = 2 V0 (h - 1) / (M R^2),  alpha = V0 / (2 M R^4),  omega_c = magnus.
inline ModelParams quartic_fit(const VortexDot& dot, double h) {
  dot.validate();
  if (!(h > 1.0)) throw RegimeError("no metastable well for h <= 1");
  const auto s = london_series(dot, h);
  ModelParams p;
  p.omega = std::sqrt(2.0 * s.c2 / dot.M);
  p.alpha = -s.c4 / dot.M;
  p.omega_c = dot.magnus;
  p.mode = Continuation::Physical;
  return p;
}

struct VortexRate {
  double h = 0.0;
  double Omega = 0.0;
  double action = 0.0;    // M Omega^3 / (3 alpha hbar)
  double log_rate = 0.0;  // log Gamma; Gamma itself underflows deep in the well
  double rate = 0.0;
  Validity validity;
};

/// Quantum escape rate Gamma = 12 Omega s e^{-s} of the quartic model, s = M Omega^3 / (3 alpha hbar).
inline VortexRate tunneling_rate(const VortexDot& dot, double h) {
  const auto p = quartic_fit(dot, h);
  VortexRate out;
  out.h = h;
  out.Omega = derived_frequency(p);
  out.action = dot.M * std::pow(out.Omega, 3) / (3.0 * p.alpha * dot.hbar);
  out.log_rate = std::log(12.0 * out.Omega * out.action) - out.action;
  out.rate = rate_from_action(out.Omega, out.action);
  out.validity.semiclassical = out.action > 1.0;
  out.validity.ground_below_barrier =
      dot.M * barrier_height(out.Omega, p.alpha) > dot.hbar * out.Omega;
  return out;
}

/// Arrhenius rate nu exp(-deltaV / (k_B T)) over the exact London barrier.
inline double thermal_rate(const VortexDot& dot, double h, double temperature, double attempt_frequency) {
  if (!(temperature > 0.0)) throw DomainError("temperature must be positive");
  if (!(attempt_frequency > 0.0)) throw DomainError("attempt frequency must be positive");
  const auto g = barrier_geometry(dot, h);
  if (!g.well_exists) throw RegimeError("no metastable well for h <= 1");
  return attempt_frequency * std::exp(-g.deltaV / (dot.k_B * temperature));
}

struct QuantumChannel {};

struct ThermalChannel {
  double temperature = 1.0;
  double attempt_frequency = 1.0;
};

using Channel = std::variant<QuantumChannel, ThermalChannel>;

inline std::string channel_name(const Channel& c) {
  return std::holds_alternative<QuantumChannel>(c) ? "quantum" : "thermal";
}

/// log Gamma_channel(h).
inline double channel_log_rate(const VortexDot& dot, double h, const Channel& c) {
  if (const auto* th = std::get_if<ThermalChannel>(&c)) {
    if (!(th->temperature > 0.0)) throw DomainError("temperature must be positive");
    if (!(th->attempt_frequency > 0.0)) throw DomainError("attempt frequency must be positive");
    const auto g = barrier_geometry(dot, h);
    if (!g.well_exists) throw RegimeError("no metastable well for h <= 1");
    return std::log(th->attempt_frequency) - g.deltaV / (dot.k_B * th->temperature);
  }
  return tunneling_rate(dot, h).log_rate;
}

struct FieldWindow {
  double h_lo = 1.0;
  double h_hi = 1.0;
};

/// Range of h over which the channel's rate is defined and monotone.  The
/// quantum rate 12 Omega s e^{-s} only falls with s once s > 4/3, so the window
/// starts there; the thermal window starts at the threshold h = 1.
inline FieldWindow channel_window(const VortexDot& dot, const Channel& c) {
  dot.validate();
  FieldWindow w;
  w.h_hi = dot.max_reduced_field();
  if (std::holds_alternative<ThermalChannel>(c)) {
    w.h_lo = 1.0;
    return w;
  }
  constexpr double kMinAction = 4.0 / 3.0;
  auto excess = [&](double h) { return tunneling_rate(dot, h).action - kMinAction; };
  const double h_floor = 1.0 + 1e-12;
  if (excess(h_floor) >= 0.0) {
    w.h_lo = h_floor;
    return w;
  }
  if (excess(w.h_hi) <= 0.0) throw RegimeError("quartic model never reaches the semiclassical regime for this dot");
  std::uintmax_t iters = 200;
  const auto root = boost::math::tools::toms748_solve(excess, h_floor, w.h_hi,
                                                      boost::math::tools::eps_tolerance<double>(52), iters);
  w.h_lo = root.second;
  return w;
}

struct ExpulsionField {
  double h_star = 0.0;
  double H_star = 0.0;
  double rate = 0.0;
  double relative_residual = 0.0;
  FieldWindow window;
};

/// Solve Gamma_channel(h*) = rate_threshold on the monotone window.  The rate
/// falls as h grows (the barrier deepens), so h* is the field below which the
/// vortex escapes faster than the threshold.
inline ExpulsionField expulsion_field(const VortexDot& dot, double rate_threshold, const Channel& channel) {
  if (!(rate_threshold > 0.0) || !std::isfinite(rate_threshold))
    throw DomainError("rate threshold must be positive and finite");
  const auto w = channel_window(dot, channel);
  const bool thermal = std::holds_alternative<ThermalChannel>(channel);
  // The thermal rate is singular-free at h = 1 (deltaV = 0), but barrier_geometry needs h > 1.
  const double lo = thermal ? std::nextafter(1.0, 2.0) : w.h_lo;
  auto log_rate = [&](double h) { return channel_log_rate(dot, h, channel); };

  constexpr int kProbe = 257;
  double prev = log_rate(lo);
  const double log_max = prev;
  for (int i = 1; i < kProbe; ++i) {
    const double h = lo + (w.h_hi - lo) * i / (kProbe - 1);
    const double cur = log_rate(h);
    if (!(cur < prev)) throw RegimeError(channel_name(channel) + " rate is not monotone in h on the search window");
    prev = cur;
  }
  const double log_min = prev;
  const double target = std::log(rate_threshold);
  if (target > log_max || target < log_min)
    throw NoCrossingError("rate threshold outside the achievable range", std::exp(log_min), std::exp(log_max));

  auto f = [&](double h) { return log_rate(h) - target; };
  std::uintmax_t iters = 300;
  const auto root =
      boost::math::tools::toms748_solve(f, lo, w.h_hi, boost::math::tools::eps_tolerance<double>(50), iters);
  const double a = root.first, b = root.second;
  const double h = std::abs(f(a)) < std::abs(f(b)) ? a : b;

  ExpulsionField out;
  out.window = {lo, w.h_hi};
  out.h_star = h;
  out.H_star = dot.field_from_reduced(h);
  out.rate = std::exp(log_rate(h));
  out.relative_residual = std::abs(std::expm1(f(h)));
  return out;
}

struct SweepRow {
  double R = 0.0;
  std::string channel;
  bool ok = false;
  std::string status;          // ok, no_crossing, domain_error, regime_error, numerical_error
  double h_star = 0.0;
  double H_star = 0.0;
  double rate = 0.0;
  std::string error;           // set when !ok
  double rate_min = 0.0;       // achievable range, for no-crossing rows
  double rate_max = 0.0;
};

/// One row per radius per channel, radius-major, in input order.  Points are
/// independent and evaluated on up to `jobs` threads.
inline std::vector<SweepRow> radius_sweep(const VortexDot& tmpl, const std::vector<double>& radii,
                                          double rate_threshold, const std::vector<Channel>& channels,
                                          unsigned jobs = 1) {
  if (!std::is_sorted(radii.begin(), radii.end())) throw DomainError("radii must be sorted ascending");
  const std::size_t n = radii.size() * channels.size();
  std::vector<SweepRow> rows(n);
  auto work = [&](std::size_t k) {
    VortexDot dot = tmpl;
    dot.R = radii[k / channels.size()];
    const Channel& ch = channels[k % channels.size()];
    SweepRow& row = rows[k];
    row.R = dot.R;
    row.channel = channel_name(ch);
    try {
      const auto e = expulsion_field(dot, rate_threshold, ch);
      row.ok = true;
      row.status = "ok";
      row.h_star = e.h_star;
      row.H_star = e.H_star;
      row.rate = e.rate;
    } catch (const NoCrossingError& ex) {
      row.status = "no_crossing";
      row.error = ex.what();
      row.rate_min = ex.rate_min();
      row.rate_max = ex.rate_max();
    } catch (const DomainError& ex) {
      row.status = "domain_error";
      row.error = ex.what();
    } catch (const RegimeError& ex) {
      row.status = "regime_error";
      row.error = ex.what();
    } catch (const Error& ex) {
      row.status = "numerical_error";
      row.error = ex.what();
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (jobs == 1) {
    for (std::size_t k = 0; k < n; ++k) work(k);
    return rows;
  }
  std::vector<std::future<void>> pool;
  for (unsigned t = 0; t < jobs; ++t) {
    pool.push_back(std::async(std::launch::async, [&, t] {
      for (std::size_t k = t; k < n; k += jobs) work(k);
    }));
  }
  for (auto& f : pool) f.get();
  return rows;
}

}  // namespace magtunnel
