#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace magtunnel {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameters outside the mathematical domain of an operation
/// (non-positive frequencies, Ω undefined, radius outside the disk, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Inputs are valid but the computation is outside the regime where it
/// applies (energy above the barrier, horizon too short, no barrier).
class RegimeError : public Error {
 public:
  using Error::Error;
};

/// Adaptive ODE integration failed; `tau` is where the step size underflowed.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double tau) : Error(what), tau_(tau) {}
  double tau() const noexcept { return tau_; }

 private:
  double tau_;
};

class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double error_estimate)
      : Error(what), error_estimate_(error_estimate) {}
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double error_estimate_;
};

class IllConditionedError : public Error {
 public:
  IllConditionedError(const std::string& what, double condition)
      : Error(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

/// A root-finding target lies outside the range the rate channel can reach.
class NoCrossingError : public Error {
 public:
  NoCrossingError(const std::string& what, double rate_min, double rate_max)
      : Error(what), rate_min_(rate_min), rate_max_(rate_max) {}
  double rate_min() const noexcept { return rate_min_; }
  double rate_max() const noexcept { return rate_max_; }

 private:
  double rate_min_;
  double rate_max_;
};

/// Soft validity flags.  Regime boundaries are reported, not thrown, so that
/// parameter sweeps can cross them and mark the affected points.
struct Validity {
  bool semiclassical = true;         // S_cl > 1
  bool ground_below_barrier = true;  // Ω < Ω⁴/(16α)

  bool ok() const noexcept { return semiclassical && ground_below_barrier; }

  std::vector<std::string> messages() const {
    std::vector<std::string> out;
    if (!semiclassical) out.emplace_back("classical action S_cl <= 1: not in the semiclassical regime");
    if (!ground_below_barrier) out.emplace_back("ground level Omega lies above the barrier top");
    return out;
  }
};

}  // namespace magtunnel
