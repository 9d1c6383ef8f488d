#pragma once

// Domain types and closed-form building blocks for a K-user training-based
// multiple access channel attacked by an energy-constrained jammer.
//
// All powers are linear and normalized to unit noise variance. Channel and
// noise variances are normalized to one as well, so a user's LMMSE estimate
// quality depends only on its effective training SNR.

#include <cstddef>
#include <span>
#include <vector>

namespace jamopt {

/// Per-user transmit parameters: pilot power, data power and pilot length.
class UserParams {
 public:
  /// Throws std::invalid_argument unless train_power > 0, data_power >= 0
  /// and train_len >= 1.
  UserParams(double train_power, double data_power, int train_len);

  double train_power() const noexcept { return train_power_; }
  double data_power() const noexcept { return data_power_; }
  int train_len() const noexcept { return train_len_; }

  /// Pilot energy P_t * T_t.
  double train_energy() const noexcept { return train_power_ * train_len_; }

  friend bool operator==(const UserParams&, const UserParams&) = default;

 private:
  double train_power_;
  double data_power_;
  int train_len_;
};

/// Block structure shared by all users: T = sum_k T_t_k + T_d.
class SystemConfig {
 public:
  /// Throws std::invalid_argument if users is empty or the pilots leave no
  /// room for data (T_d < 1).
  SystemConfig(int block_len, std::vector<UserParams> users);

  int block_len() const noexcept { return block_len_; }
  std::span<const UserParams> users() const noexcept { return users_; }
  const UserParams& user(std::size_t k) const { return users_.at(k); }
  std::size_t num_users() const noexcept { return users_.size(); }
  int total_train_len() const noexcept { return total_train_len_; }
  int data_len() const noexcept { return block_len_ - total_train_len_; }
  double total_data_power() const noexcept;

  friend bool operator==(const SystemConfig&, const SystemConfig&) = default;

 private:
  int block_len_;
  std::vector<UserParams> users_;
  int total_train_len_;
};

/// Average jamming power P_w per symbol over the block.
class JammerBudget {
 public:
  explicit JammerBudget(double avg_power);
  double avg_power() const noexcept { return avg_power_; }
  /// Total block energy P_w * T.
  double block_energy(const SystemConfig& cfg) const noexcept {
    return avg_power_ * cfg.block_len();
  }

 private:
  double avg_power_;
};

/// A point on the allocation simplex: fraction of the block energy spent on
/// each user's pilots plus the fraction spent on the shared data phase.
class JammerAllocation {
 public:
  static constexpr double kSumTolerance = 1e-6;

  /// Validates non-negativity and |sum - 1| <= kSumTolerance, then
  /// renormalizes so the coordinates sum to one.
  JammerAllocation(std::vector<double> zeta_t, double zeta_d);

  /// Coordinates laid out as (zeta_t_1, ..., zeta_t_K, zeta_d).
  static JammerAllocation from_coordinates(std::span<const double> coords);

  std::span<const double> zeta_t() const noexcept { return zeta_t_; }
  double zeta_t(std::size_t k) const { return zeta_t_.at(k); }
  double zeta_d() const noexcept { return zeta_d_; }
  std::size_t num_users() const noexcept { return zeta_t_.size(); }
  std::vector<double> coordinates() const;

 private:
  std::vector<double> zeta_t_;
  double zeta_d_;
};

struct PhasePowers {
  std::vector<double> train;  ///< P_wt_k, jamming power over user k's pilots
  double data = 0.0;          ///< P_wd, jamming power over the data phase
};

struct EstimationQuality {
  double est_var;  ///< variance of the channel estimate
  double err_var;  ///< variance of the estimation error
};

/// The constituents of the objective: rho = g * sum(alpha) / (1 + g * sum(beta)).
struct RhoTerms {
  std::vector<double> alpha;
  std::vector<double> beta;
  double gamma = 1.0;

  double alpha_sum() const noexcept;
  double beta_sum() const noexcept;
};

/// Converts energy fractions to per-phase jamming powers. Throws
/// std::invalid_argument on a dimension mismatch.
PhasePowers phase_jam_powers(const JammerAllocation& alloc, const SystemConfig& cfg,
                             JammerBudget budget);

/// LMMSE estimate/error variances for a unit-variance Rayleigh channel
/// observed through T_t pilots at power P_t under jamming power P_wt.
EstimationQuality lmmse_quality(const UserParams& user, double train_jam_power);

/// alpha_k, beta_k and gamma. The span overload accepts points off the
/// simplex, which the monotonicity probes rely on.
RhoTerms alpha_beta_gamma(std::span<const double> zeta_t, double zeta_d,
                          const SystemConfig& cfg, JammerBudget budget);
RhoTerms alpha_beta_gamma(const JammerAllocation& alloc, const SystemConfig& cfg,
                          JammerBudget budget);

/// The jammer's objective rho, evaluated from alpha, beta and gamma.
double objective_rho(std::span<const double> zeta_t, double zeta_d, const SystemConfig& cfg,
                     JammerBudget budget);
double objective_rho(const JammerAllocation& alloc, const SystemConfig& cfg,
                     JammerBudget budget);

/// rho evaluated the long way: phase powers -> LMMSE variances -> the
/// effective SINR of the estimated channels treating estimation error as
/// noise. Must agree with objective_rho.
double objective_rho_from_estimates(const JammerAllocation& alloc, const SystemConfig& cfg,
                                    JammerBudget budget);

double db_to_linear(double db);
double linear_to_db(double linear);

}  // namespace jamopt
