#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "magtunnel/model.hpp"
#include "magtunnel/numerics/jet.hpp"
#include "magtunnel/numerics/quadrature.hpp"

using namespace magtunnel;

namespace {

ModelParams params(double omega, double omega_c, double alpha, Continuation mode) {
  return ModelParams{omega, omega_c, alpha, mode};
}

// Euclidean action of the radial bounce, int (r'^2/2 + U_eff(r)) dtau, by quadrature.
double action_integral(double Omega, double alpha) {
  auto lagrangian = [&](double t) {
    using J = numerics::Jet<double>;
    const J r = J(Omega / std::sqrt(2.0 * alpha)) / numerics::cosh(J::variable(t) * Omega);
    const double u = 0.5 * Omega * Omega * r.v * r.v - alpha * std::pow(r.v, 4);
    return 0.5 * r.d1 * r.d1 + u;
  };
  const double cut = 40.0 / Omega;
  return numerics::integrate(lagrangian, -cut, cut, 1e-12).value;
}

}  // namespace

TEST(DerivedFrequency, BothConventions) {
  EXPECT_DOUBLE_EQ(derived_frequency(params(1, 0, 0.01, Continuation::Euclidean)), 1.0);
  EXPECT_DOUBLE_EQ(derived_frequency(params(1, 0, 0.01, Continuation::Physical)), 1.0);
  EXPECT_NEAR(derived_frequency(params(1, 1, 0.01, Continuation::Euclidean)), 0.8660254037844386, 1e-15);
  EXPECT_NEAR(derived_frequency(params(1, 1, 0.01, Continuation::Physical)), 1.118033988749895, 1e-15);
}

TEST(DerivedFrequency, EuclideanNeedsWeakField) {
  EXPECT_THROW(derived_frequency(params(1, 2, 0.01, Continuation::Euclidean)), DomainError);
  EXPECT_NO_THROW(derived_frequency(params(1, 2, 0.01, Continuation::Physical)));
}

TEST(ModelParams, RejectsInvalidInputs) {
  EXPECT_THROW(params(0, 0, 0.01, Continuation::Physical).validate(), DomainError);
  EXPECT_THROW(params(1, -1, 0.01, Continuation::Physical).validate(), DomainError);
  EXPECT_THROW(params(1, 0, 0, Continuation::Physical).validate(), DomainError);
  EXPECT_THROW(params(1, 0, NAN, Continuation::Physical).validate(), DomainError);
}

TEST(Potential, Examples) {
  const auto p = params(1, 0, 0.01, Continuation::Physical);
  EXPECT_EQ(potential(p, 0.0), 0.0);
  EXPECT_NEAR(potential(p, 1.0), 0.49, 1e-15);
  // Barrier top by grid search.
  double best_r = 0, best_u = -1;
  for (int i = 0; i <= 100000; ++i) {
    const double r = 10.0 * i / 100000;
    if (potential(p, r) > best_u) best_u = potential(p, r), best_r = r;
  }
  EXPECT_NEAR(best_r, 5.0, 1e-4);
  EXPECT_NEAR(best_u, 6.25, 1e-8);
  EXPECT_NEAR(barrier_height(1.0, 0.01), 6.25, 1e-14);
  EXPECT_NEAR(barrier_radius(1.0, 0.01), 5.0, 1e-14);
  EXPECT_THROW(potential(p, -1.0), DomainError);
}

TEST(Bounce, ExamplesAndSymmetry) {
  const auto p = params(1, 0, 0.01, Continuation::Euclidean);
  const auto b0 = bounce(p, 0.0, 0.0);
  EXPECT_NEAR(b0.r, 7.0710678118654755, 1e-13);
  EXPECT_NEAR(b0.x, b0.r, 1e-15);
  EXPECT_EQ(b0.y, 0.0);
  EXPECT_LT(bounce(p, 0.0, 30.0).r, 1e-12 * b0.r);
  EXPECT_LT(bounce(p, 0.0, -30.0).r, 1e-12 * b0.r);

  const auto q = params(1, 1, 0.01, Continuation::Euclidean);
  const double tau = 2.0 * std::numbers::pi;
  const auto half_turn = bounce(q, 0.0, tau);
  EXPECT_NEAR(half_turn.x, -half_turn.r, 1e-15);
  EXPECT_NEAR(half_turn.y, 0.0, 1e-15 * half_turn.r + 1e-300);

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> t(-20.0, 20.0), ang(-3.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    const double tt = t(rng), phi = ang(rng);
    const auto a = bounce(q, phi, tt);
    EXPECT_NEAR(a.r * a.r, a.x * a.x + a.y * a.y, 1e-12 * a.r * a.r);
    EXPECT_DOUBLE_EQ(a.r, bounce(q, phi, -tt).r);
  }
  EXPECT_THROW(bounce(params(1, 0, 0.01, Continuation::Physical), 0.0, 0.0), DomainError);
}

TEST(Bounce, MatchesShootingFromTheTurningPoint) {
  // r'' = Omega^2 r - 4 alpha r^3 from r(0) = r_max, r'(0) = 0, by RK4.
  const double Omega = 1.0, alpha = 0.01;
  double r = Omega / std::sqrt(2.0 * alpha), v = 0.0, t = 0.0;
  const double h = 1e-3;
  auto acc = [&](double x) { return Omega * Omega * x - 4.0 * alpha * x * x * x; };
  for (int i = 0; i < 5000; ++i) {
    const double k1r = v, k1v = acc(r);
    const double k2r = v + 0.5 * h * k1v, k2v = acc(r + 0.5 * h * k1r);
    const double k3r = v + 0.5 * h * k2v, k3v = acc(r + 0.5 * h * k2r);
    const double k4r = v + h * k3v, k4v = acc(r + h * k3r);
    r += h / 6 * (k1r + 2 * k2r + 2 * k3r + k4r);
    v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
    t += h;
  }
  EXPECT_NEAR(r, bounce_radius(Omega, alpha, t), 1e-9);
}

TEST(Bounce, OdeResidualAndZeroEnergy) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> w(0.5, 2.0), a(0.001, 0.1);
  for (int k = 0; k < 5; ++k) {
    const double Omega = w(rng), alpha = a(rng);
    const double r0 = bounce_radius(Omega, alpha, 0.0);
    for (int i = 0; i <= 2000; ++i) {
      using J = numerics::Jet<double>;
      const double t = -20.0 / Omega + 40.0 / Omega * i / 2000;
      const J r = J(Omega / std::sqrt(2.0 * alpha)) / numerics::cosh(J::variable(t) * Omega);
      const double residual = r.d2 - Omega * Omega * r.v + 4.0 * alpha * std::pow(r.v, 3);
      EXPECT_LT(std::abs(residual), 1e-8 * Omega * Omega * r0);
      const double energy = 0.5 * r.d1 * r.d1 - (0.5 * Omega * Omega * r.v * r.v - alpha * std::pow(r.v, 4));
      EXPECT_LT(std::abs(energy), 1e-8);
    }
  }
}

TEST(ClassicalAction, MatchesActionIntegral) {
  EXPECT_NEAR(classical_action(params(1, 0, 1.0 / 3.0, Continuation::Euclidean)), 1.0, 1e-15);
  EXPECT_NEAR(action_integral(1.0, 1.0 / 3.0), 1.0, 1e-8);
  EXPECT_NEAR(classical_action(params(1, 0, 0.01, Continuation::Euclidean)), 100.0 / 3.0, 1e-13);
  EXPECT_NEAR(action_integral(1.0, 0.01) / (100.0 / 3.0), 1.0, 1e-6);
  const auto phys = params(1, 1, 0.01, Continuation::Physical);
  EXPECT_NEAR(classical_action(phys), std::pow(1.25, 1.5) / 0.03, 1e-12);
  EXPECT_NEAR(action_integral(derived_frequency(phys), 0.01) / classical_action(phys), 1.0, 1e-6);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> w(0.5, 2.0), a(0.005, 0.2);
  for (int k = 0; k < 10; ++k) {
    const double Omega = w(rng), alpha = a(rng);
    EXPECT_NEAR(action_integral(Omega, alpha) / (std::pow(Omega, 3) / (3 * alpha)), 1.0, 1e-6);
  }
}

TEST(ClosedFormRate, Examples) {
  const auto r = decay_rate_closed_form(params(1, 0, 0.01, Continuation::Physical));
  EXPECT_NEAR(r.gamma / (400.0 * std::exp(-100.0 / 3.0)), 1.0, 1e-14);
  EXPECT_NEAR(r.gamma, 1.3353e-12, 0.0001e-12);
  EXPECT_TRUE(r.validity.ok());

  const auto strong = decay_rate_closed_form(params(1, 2, 0.01, Continuation::Physical));
  EXPECT_NEAR(strong.Omega, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(strong.action, 94.28090415820634, 1e-11);
  EXPECT_NEAR(strong.gamma / (1600.0 * std::exp(-strong.action)), 1.0, 1e-14);
  EXPECT_LT(strong.gamma, r.gamma);
}

TEST(ClosedFormRate, AlgebraicIdentities) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> w(0.5, 1.5), wc(0.0, 1.0), a(0.01, 0.5);
  for (int k = 0; k < 100; ++k) {
    const auto p = params(w(rng), wc(rng), a(rng), Continuation::Physical);
    const auto r = decay_rate_closed_form(p);
    EXPECT_NEAR(r.gamma * std::exp(r.action) * p.alpha / (4.0 * std::pow(r.Omega, 4)), 1.0, 1e-13);
    EXPECT_NEAR(rate_from_action(r.Omega, r.action) / r.gamma, 1.0, 1e-13);
  }
}

TEST(ClosedFormRate, ValidityFlagsAreWarnings) {
  const auto r = decay_rate_closed_form(params(1, 0, 1.0, Continuation::Physical));
  EXPECT_FALSE(r.validity.semiclassical);
  EXPECT_FALSE(r.validity.ground_below_barrier);
  EXPECT_FALSE(r.validity.ok());
  EXPECT_EQ(r.validity.messages().size(), 2u);
  EXPECT_GT(r.gamma, 0.0);
}

TEST(ClosedFormRate, Monotonicity) {
  // Increasing in alpha at fixed Omega once S_cl > 1.
  double prev = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double alpha = 0.005 + 0.3 * i / 19.0;  // S_cl from 66.7 down to 1.1
    const double g = decay_rate_closed_form(params(1, 0, alpha, Continuation::Physical)).gamma;
    EXPECT_GT(g, prev);
    prev = g;
  }
  // Decreasing in omega_c (Physical) when S_cl > 4/3.
  prev = INFINITY;
  for (int i = 0; i < 20; ++i) {
    const double g = decay_rate_closed_form(params(1, 3.0 * i / 19.0, 0.2, Continuation::Physical)).gamma;
    EXPECT_LT(g, prev);
    prev = g;
  }
}

TEST(ClosedFormRate, ConventionsAgreeWithoutField) {
  const auto e = decay_rate_closed_form(params(1.3, 0, 0.02, Continuation::Euclidean));
  const auto p = decay_rate_closed_form(params(1.3, 0, 0.02, Continuation::Physical));
  EXPECT_EQ(e.gamma, p.gamma);
  EXPECT_EQ(e.action, p.action);
}
