#pragma once

// Ergodic sum-rate of the legitimate users under a given jamming allocation:
// a Monte Carlo estimate of the achievable rate with Gaussian signalling and
// the two closed-form Jensen bounds built on the objective rho.

#include <cstdint>
#include <numbers>

#include "jamopt/model.hpp"

namespace jamopt {

/// Euler-Mascheroni constant; E[ln X] = ln(mean) - kEulerGamma for exponential X.
inline constexpr double kEulerGamma = std::numbers::egamma_v<double>;
static_assert(kEulerGamma == 0.57721566490153286);

struct MonteCarloSettings {
  std::uint64_t samples = 200'000;
  std::uint64_t seed = 1;
  double confidence_z = 1.96;
  /// Worker threads; 0 picks std::thread::hardware_concurrency(). The
  /// estimate does not depend on this value.
  unsigned workers = 0;
};

struct McEstimate {
  double mean = 0.0;
  double halfwidth = 0.0;
};

/// All rates in bits per channel use.
struct RateReport {
  double r_lb = 0.0;
  double r_mc = 0.0;
  double r_mc_halfwidth = 0.0;
  double r_ub = 0.0;
};

/// Fraction of the block carrying data, (T - T_t) / T.
double data_fraction(const SystemConfig& cfg);

/// Monte Carlo estimate of the achievable ergodic sum-rate. Sample i is a
/// pure function of (seed, i), so the estimate is bit-identical for any
/// worker count. Throws std::invalid_argument when samples == 0.
McEstimate sum_rate_mc(const JammerAllocation& alloc, const SystemConfig& cfg,
                       JammerBudget budget, const MonteCarloSettings& mc);

/// Jensen upper bound: data_fraction * log2(1 + rho).
double sum_rate_ub(const JammerAllocation& alloc, const SystemConfig& cfg, JammerBudget budget);

/// Lower bound: data_fraction * log2(1 + rho * exp(-kEulerGamma)).
double sum_rate_lb(const JammerAllocation& alloc, const SystemConfig& cfg, JammerBudget budget);

RateReport rate_report(const JammerAllocation& alloc, const SystemConfig& cfg,
                       JammerBudget budget, const MonteCarloSettings& mc);

}  // namespace jamopt
