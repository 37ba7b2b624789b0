// Acceptance checks: one PASS/FAIL line per criterion.
//
//   magtunnel_acceptance               run all criteria
//   magtunnel_acceptance --criterion N run one
//
// Exit status is non-zero when any selected criterion fails.

#include <boost/math/tools/minima.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "magtunnel/magtunnel.hpp"

using namespace magtunnel;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[fail] " << what << "; ";
    }
  }
};

struct Criterion {
  int id;
  const char* title;
  double time_limit;  // seconds
  std::function<void(Outcome&)> check;
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

ModelParams euclidean(double omega_c, double alpha = 0.01, double omega = 1.0) {
  return ModelParams{omega, omega_c, alpha, Continuation::Euclidean};
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

void instanton_wkb_identity(Outcome& o) {
  std::mt19937 rng(20240601);
  std::uniform_real_distribution<double> w(0.5, 2.0), wc(0.0, 1.5), action(5.0, 50.0);
  double worst = 0.0, worst_quad = 0.0;
  for (int i = 0; i < 20; ++i) {
    ModelParams p{w(rng), wc(rng), 1.0, Continuation::Physical};
    const double Omega = derived_frequency(p);
    p.alpha = std::pow(Omega, 3) / (3.0 * action(rng));
    const auto d = wkb_decay_rate(p);
    const double closed = decay_rate_closed_form(p).gamma;
    worst = std::max(worst, rel(d.D_assembled, closed));
    worst_quad = std::max(worst_quad, rel(d.D_assembled_quadrature, closed));
  }
  o.detail << "max rel dev " << fmt("%.2e", worst) << ", with quadrature W(0) " << fmt("%.2e", worst_quad);
  o.require(worst <= 1e-12, "assembled WKB rate vs closed form above 1e-12");
  o.require(worst_quad <= 1e-12, "quadrature W(0) rate vs closed form above 1e-12");
}

void determinant_asymptotics(Outcome& o) {
  for (double wc : {0.0, 0.5, 1.0}) {
    const auto p = euclidean(wc);
    const double W = derived_frequency(p);
    std::set<double> horizons;
    for (double target : {8.0, 12.0}) horizons.insert(snap_horizon(p, target / W));
    for (double T : horizons) {
      const double WT = W * T;
      const double tol = 10.0 * std::exp(-2.0 * WT);
      const auto J = determinant_J(p, T);
      const auto J0 = determinant_J0(p, T);
      const double dJ = std::abs(J.relative_deviation);
      const double dJ0 = std::abs(J0.log_deviation);
      o.detail << "wc=" << wc << " WT=" << fmt("%.2f", WT) << ": |J/Jasym-1|=" << fmt("%.2e", dJ)
               << " |logJ0-asym|=" << fmt("%.2e", dJ0) << " tol=" << fmt("%.2e", tol) << "; ";
      std::ostringstream tag;
      tag << "wc=" << wc << " WT=" << fmt("%.2f", WT);
      o.require(dJ <= tol, "J vs -1/Omega^2 at " + tag.str());
      o.require(dJ0 <= tol, "log J0 vs 4 Omega T - log 4 Omega^2 at " + tag.str());
    }
  }
}

void zero_eigenvalue_laws(Outcome& o) {
  struct Case {
    double wc, target;
  };
  for (const Case c : {Case{0.0, 8.0}, Case{0.0, 12.0}, Case{0.5, 8.0}, Case{1.0, 8.0}}) {
    const auto p = euclidean(c.wc);
    const double W = derived_frequency(p);
    const auto z = extract_zero_eigenvalues(p, c.target / W);
    const double dphi = rel(z.lambda_phi, z.asymptotic_phi);
    const double dtau = rel(z.lambda_tau, z.asymptotic_tau);
    const double dratio = rel(z.lambda_tau / z.lambda_phi, 3.0);
    o.detail << "wc=" << c.wc << " WT=" << fmt("%.2f", W * z.T) << ": " << fmt("%.1e", dphi) << "/"
             << fmt("%.1e", dtau) << "/" << fmt("%.1e", dratio) << "; ";
    o.require(W * z.T >= 8.0, "horizon below Omega T = 8");
    o.require(dphi <= 0.01 && dtau <= 0.01 && dratio <= 0.01, "eigenvalue law off by more than 1%");
  }
}

void full_assembly(Outcome& o) {
  for (const auto& p : {euclidean(0.0), ModelParams{1.0, 1.0, 0.01, Continuation::Physical}}) {
    const double W = derived_frequency(p);
    const auto a = assemble_rate(p, 8.0 / W);
    const auto b = assemble_rate(p, 12.0 / W);
    const double drift = rel(a.Gamma, b.Gamma);
    o.detail << to_string(p.mode) << " wc=" << p.omega_c << ": dev " << fmt("%.2e", a.relative_deviation()) << "/"
             << fmt("%.2e", b.relative_deviation()) << " drift " << fmt("%.2e", drift) << "; ";
    o.require(a.relative_deviation() <= 0.01 && b.relative_deviation() <= 0.01, "assembled vs closed form above 1%");
    o.require(drift <= 0.02, "T drift above 2%");
  }
}

void appendix(Outcome& o) {
  const auto a = appendix_integrals();
  const double e1 = std::abs(a.sech2 - 2.0), e2 = std::abs(a.sinh2_sech4 - 2.0 / 3.0),
               e3 = std::abs(a.sech4 - 4.0 / 3.0);
  o.detail << "abs errors " << fmt("%.1e", e1) << " " << fmt("%.1e", e2) << " " << fmt("%.1e", e3);
  o.require(std::max({e1, e2, e3}) <= 1e-10, "appendix integral off by more than 1e-10");
}

void norms_and_jacobians(Outcome& o) {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> w(0.3, 3.0), frac(0.0, 0.95), a(0.001, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double omega = w(rng);
    const auto p = euclidean(2.0 * omega * frac(rng), a(rng), omega);
    const double W = derived_frequency(p);
    const auto n = mode_norms(p);
    const double closed = W * W / (std::sqrt(3.0) * p.alpha);
    worst = std::max({worst, rel(n.norm_phi1, std::sqrt(2.0 / W)), rel(n.norm_phi2, std::sqrt(2.0 / (3.0 * W))),
                      rel(zero_mode_jacobian(p), closed), rel(faddeev_popov_determinant(p), closed)});
  }
  o.detail << "max rel dev " << fmt("%.2e", worst);
  o.require(worst <= 1e-8, "norm or Jacobian off by more than 1e-8");
}

void barrier_expansion(Outcome& o) {
  const ModelParams p{1.0, 0.0, 0.01, Continuation::Physical};
  double prev = INFINITY;
  bool monotone = true;
  double first = 0.0;
  for (double E : {0.01, 0.003, 0.001}) {
    const double gap =
        std::abs(barrier_integral(p, E, BarrierMethod::Direct) - barrier_integral(p, E, BarrierMethod::ThreeRegion));
    if (E == 0.01) first = gap;
    o.detail << "E=" << E << ": " << fmt("%.2e", gap) << "; ";
    monotone = monotone && gap < prev;
    prev = gap;
  }
  o.require(first < 1e-3, "gap at E = 0.01 not below 1e-3");
  o.require(monotone, "gap not decreasing");
}

void parity_and_residuals(Outcome& o) {
  double parity = 0.0, residual = 0.0;
  for (double wc : {0.0, 0.5, 1.0, 1.5}) {
    const auto p = euclidean(wc);
    const auto fp = FluctuationProblem::from(p);
    const auto basis = analytic_basis(p, 10.0 / fp.Omega);
    const std::size_t n = basis.grid.size();
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = n - 1 - i;
      for (std::size_t k = 0; k < 4; ++k) {
        const auto& a = basis.phi[k][i];
        const auto& m = basis.phi[k][j];
        const double scale = 1.0 + std::abs(a.xi) + std::abs(a.eta);
        // eta1, eta2, xi3, xi4 even; xi1, xi2, eta3, eta4 odd.
        const double dx = k >= 2 ? a.xi - m.xi : a.xi + m.xi;
        const double de = k <= 1 ? a.eta - m.eta : a.eta + m.eta;
        parity = std::max(parity, (std::abs(dx) + std::abs(de)) / scale);
      }
    }
    using J = numerics::Jet<double>;
    for (std::size_t i = 0; i < n; i += 4) {
      const double t = basis.grid[i];
      const auto b = basis_at<J>(fp, J::variable(t));
      for (std::size_t k = 0; k < 4; ++k) {
        const auto r = apply_fluctuation_operator(fp, t, b[k]);
        const double mag = std::abs(b[k].xi.v) + std::abs(b[k].eta.v) + std::abs(b[k].xi.d2) + std::abs(b[k].eta.d2);
        if (mag > 0) residual = std::max(residual, (std::abs(r.xi) + std::abs(r.eta)) / mag);
      }
    }
  }
  o.detail << "parity " << fmt("%.1e", parity) << ", residual " << fmt("%.1e", residual);
  o.require(parity <= 1e-10, "parity violated beyond 1e-10");
  o.require(residual < 1e-6, "kernel residual not below 1e-6");
}

void vortex(Outcome& o) {
  VortexDot dot;
  const double V0 = dot.energy_scale();

  auto maxima = [&](double h) {
    int count = 0;
    const int n = 4000;
    double a = london_potential(dot, h, 0.0), b = london_potential(dot, h, 1.0 / n);
    for (int i = 2; i < n; ++i) {
      const double c = london_potential(dot, h, double(i) / n);
      if (b > a && b > c) ++count;
      a = b;
      b = c;
    }
    return count;
  };
  bool threshold_ok = true;
  for (double h : {0.25, 0.5, 0.9, 1.0, 1.1, 1.5, 3.0, 10.0}) {
    const bool expect = h > 1.0;
    threshold_ok = threshold_ok && (maxima(h) == (expect ? 1 : 0)) && barrier_geometry(dot, h).well_exists == expect;
  }
  o.require(threshold_ok, "barrier present for h <= 1 or missing for h > 1");

  double dv_err = 0.0;
  for (double h : {1.1, 1.5, 2.0, 4.0, 10.0}) {
    auto neg = [&](double r) { return -london_potential(dot, h, r); };
    const auto best = boost::math::tools::brent_find_minima(neg, 0.0, 0.999, 52);
    const double numeric = -best.second - london_potential(dot, h, 0.0);
    dv_err = std::max(dv_err, rel(V0 * (h - 1.0 - std::log(h)), numeric));
  }
  o.require(dv_err <= 1e-8, "deltaV vs numerical maximization above 1e-8");

  bool series_ok = true;
  for (double h : {1.2, 2.0, 5.0}) {
    const auto s = london_series(dot, h);
    const auto q = quartic_fit(dot, h);
    const double R2 = dot.R * dot.R;
    series_ok = series_ok && rel(s.c2, V0 * (h - 1.0) / R2) <= 1e-15 && rel(s.c4, -0.5 * V0 / (R2 * R2)) <= 1e-15 &&
                rel(0.5 * dot.M * q.omega * q.omega, s.c2) <= 1e-15 && rel(dot.M * q.alpha, -s.c4) <= 1e-15;
  }
  o.require(series_ok, "quartic coefficients differ from the London expansion");

  double residual = 0.0;
  bool above_one = true;
  const std::vector<Channel> channels{QuantumChannel{}, ThermalChannel{0.05, 1.0}};
  for (const auto& ch : channels) {
    const auto e = expulsion_field(dot, 1e-6, ch);
    residual = std::max(residual, e.relative_residual);
    above_one = above_one && e.h_star > 1.0;
  }
  std::vector<double> radii;
  for (int i = 0; i <= 16; ++i) radii.push_back(20.0 + 5.0 * i);
  const auto rows = radius_sweep(dot, radii, 1e-6, channels, 4);
  std::set<std::pair<double, std::string>> seen;
  bool single_valued = rows.size() == radii.size() * channels.size();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    above_one = above_one && r.ok && r.h_star > 1.0;
    single_valued = single_valued && seen.insert({r.R, r.channel}).second;
    if (!r.ok) continue;
    VortexDot at = dot;
    at.R = r.R;
    const double rate = std::exp(channel_log_rate(at, r.h_star, channels[k % channels.size()]));
    residual = std::max(residual, rel(rate, 1e-6));
  }
  o.require(residual < 1e-6, "expulsion forward residual not below 1e-6");
  o.require(above_one, "some expulsion field not above h = 1");
  o.require(single_valued, "sweep is not one row per radius and channel");
  o.detail << "deltaV " << fmt("%.1e", dv_err) << ", residual " << fmt("%.1e", residual) << ", rows " << rows.size();
}

void regime_monotonicity(Outcome& o) {
  int checked = 0;
  bool ok = true;
  for (double alpha : {0.01, 0.05, 0.2}) {
    double prev = INFINITY;
    for (int i = 0; i < 10; ++i) {
      const ModelParams p{1.0, 2.0 * i / 9.0, alpha, Continuation::Physical};
      const auto r = decay_rate_closed_form(p);
      if (r.action <= 4.0 / 3.0) continue;
      ok = ok && r.gamma < prev;
      prev = r.gamma;
      ++checked;
    }
  }
  o.detail << checked << " grid points";
  o.require(ok, "Gamma not strictly decreasing in omega_c");
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {1, "instanton-WKB identity", 1.0, instanton_wkb_identity},
      {2, "determinant asymptotics", 10.0, determinant_asymptotics},
      {3, "zero-eigenvalue laws", 10.0, zero_eigenvalue_laws},
      {4, "full assembly", 30.0, full_assembly},
      {5, "appendix integrals", 0.1, appendix},
      {6, "norms, Jacobian, Faddeev-Popov", 1.0, norms_and_jacobians},
      {7, "W(E) expansion", 1.0, barrier_expansion},
      {8, "parity and kernel residuals", 5.0, parity_and_residuals},
      {9, "vortex module", 5.0, vortex},
      {10, "regime monotonicity", 0.1, regime_monotonicity},
  };
  return all;
}

bool run_one(const Criterion& c) {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  try {
    c.check(o);
  } catch (const std::exception& e) {
    o.require(false, std::string("exception: ") + e.what());
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.require(elapsed < c.time_limit, "runtime over limit");
  std::printf("criterion %2d %s  %-32s %7.3f s (limit %g s)  %s\n", c.id, o.pass ? "PASS" : "FAIL", c.title, elapsed,
              c.time_limit, o.detail.str().c_str());
  std::fflush(stdout);
  return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 2;
    }
  }
  bool all_pass = true;
  bool found = false;
  for (const auto& c : criteria()) {
    if (only != 0 && c.id != only) continue;
    found = true;
    all_pass = run_one(c) && all_pass;
  }
  if (!found) {
    std::fprintf(stderr, "no criterion %d\n", only);
    return 2;
  }
  return all_pass ? 0 : 1;
}
