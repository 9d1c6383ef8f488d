#include "jamopt/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace jamopt {

UserParams::UserParams(double train_power, double data_power, int train_len)
    : train_power_(train_power), data_power_(data_power), train_len_(train_len) {
  if (!(train_power > 0.0) || !std::isfinite(train_power)) {
    throw std::invalid_argument("user train_power must be positive and finite");
  }
  if (!(data_power >= 0.0) || !std::isfinite(data_power)) {
    throw std::invalid_argument("user data_power must be non-negative and finite");
  }
  if (train_len < 1) {
    throw std::invalid_argument("user train_len must be at least 1");
  }
}

SystemConfig::SystemConfig(int block_len, std::vector<UserParams> users)
    : block_len_(block_len), users_(std::move(users)), total_train_len_(0) {
  if (users_.empty()) {
    throw std::invalid_argument("system needs at least one user");
  }
  for (const auto& u : users_) total_train_len_ += u.train_len();
  if (total_train_len_ >= block_len_) {
    throw std::invalid_argument("total training length " + std::to_string(total_train_len_) +
                                " leaves no data symbols in a block of " +
                                std::to_string(block_len_));
  }
}

double SystemConfig::total_data_power() const noexcept {
  double sum = 0.0;
  for (const auto& u : users_) sum += u.data_power();
  return sum;
}

JammerBudget::JammerBudget(double avg_power) : avg_power_(avg_power) {
  if (!(avg_power >= 0.0) || !std::isfinite(avg_power)) {
    throw std::invalid_argument("jammer avg_power must be non-negative and finite");
  }
}

JammerAllocation::JammerAllocation(std::vector<double> zeta_t, double zeta_d)
    : zeta_t_(std::move(zeta_t)), zeta_d_(zeta_d) {
  if (zeta_t_.empty()) {
    throw std::invalid_argument("allocation needs at least one training coordinate");
  }
  double sum = zeta_d_;
  for (double z : zeta_t_) sum += z;
  if (!(zeta_d_ >= 0.0) ||
      std::any_of(zeta_t_.begin(), zeta_t_.end(), [](double z) { return !(z >= 0.0); })) {
    throw std::invalid_argument("allocation coordinates must be non-negative");
  }
  if (!(std::abs(sum - 1.0) <= kSumTolerance)) {
    throw std::invalid_argument("allocation coordinates sum to " + std::to_string(sum) +
                                ", expected 1");
  }
  if (std::abs(sum - 1.0) > 4.0 * std::numeric_limits<double>::epsilon()) {
    for (double& z : zeta_t_) z /= sum;
    zeta_d_ /= sum;
  }
}

JammerAllocation JammerAllocation::from_coordinates(std::span<const double> coords) {
  if (coords.size() < 2) {
    throw std::invalid_argument("allocation needs K+1 >= 2 coordinates");
  }
  return JammerAllocation(std::vector<double>(coords.begin(), coords.end() - 1), coords.back());
}

std::vector<double> JammerAllocation::coordinates() const {
  std::vector<double> out(zeta_t_);
  out.push_back(zeta_d_);
  return out;
}

double RhoTerms::alpha_sum() const noexcept {
  return std::accumulate(alpha.begin(), alpha.end(), 0.0);
}

double RhoTerms::beta_sum() const noexcept {
  return std::accumulate(beta.begin(), beta.end(), 0.0);
}

namespace {

void check_dims(std::size_t got, const SystemConfig& cfg) {
  if (got != cfg.num_users()) {
    throw std::invalid_argument("allocation has " + std::to_string(got) +
                                " training coordinates for " + std::to_string(cfg.num_users()) +
                                " users");
  }
}

}  // namespace

PhasePowers phase_jam_powers(const JammerAllocation& alloc, const SystemConfig& cfg,
                             JammerBudget budget) {
  check_dims(alloc.num_users(), cfg);
  if (cfg.data_len() <= 0) throw std::invalid_argument("data phase is empty");
  const double energy = budget.block_energy(cfg);
  PhasePowers out;
  out.train.reserve(cfg.num_users());
  for (std::size_t k = 0; k < cfg.num_users(); ++k) {
    out.train.push_back(alloc.zeta_t(k) * energy / cfg.user(k).train_len());
  }
  out.data = alloc.zeta_d() * energy / cfg.data_len();
  return out;
}

EstimationQuality lmmse_quality(const UserParams& user, double train_jam_power) {
  if (!(train_jam_power >= 0.0)) {
    throw std::invalid_argument("training jamming power must be non-negative");
  }
  const double snr = user.train_power() / (1.0 + train_jam_power) * user.train_len();
  return {snr / (1.0 + snr), 1.0 / (1.0 + snr)};
}

RhoTerms alpha_beta_gamma(std::span<const double> zeta_t, double zeta_d, const SystemConfig& cfg,
                          JammerBudget budget) {
  check_dims(zeta_t.size(), cfg);
  const double energy = budget.block_energy(cfg);
  RhoTerms terms;
  terms.alpha.reserve(cfg.num_users());
  terms.beta.reserve(cfg.num_users());
  for (std::size_t k = 0; k < cfg.num_users(); ++k) {
    const auto& u = cfg.user(k);
    const double tt = u.train_len();
    const double pilot = 1.0 + zeta_t[k] * energy / tt;
    const double snr = u.train_power() * tt / pilot;
    terms.alpha.push_back((u.data_power() * u.train_power() * tt / pilot) / (1.0 + snr));
    terms.beta.push_back(u.data_power() / (1.0 + snr));
  }
  terms.gamma = 1.0 / (1.0 + zeta_d * energy / cfg.data_len());
  return terms;
}

RhoTerms alpha_beta_gamma(const JammerAllocation& alloc, const SystemConfig& cfg,
                          JammerBudget budget) {
  return alpha_beta_gamma(alloc.zeta_t(), alloc.zeta_d(), cfg, budget);
}

double objective_rho(std::span<const double> zeta_t, double zeta_d, const SystemConfig& cfg,
                     JammerBudget budget) {
  const RhoTerms t = alpha_beta_gamma(zeta_t, zeta_d, cfg, budget);
  return t.gamma * t.alpha_sum() / (1.0 + t.gamma * t.beta_sum());
}

double objective_rho(const JammerAllocation& alloc, const SystemConfig& cfg, JammerBudget budget) {
  return objective_rho(alloc.zeta_t(), alloc.zeta_d(), cfg, budget);
}

double objective_rho_from_estimates(const JammerAllocation& alloc, const SystemConfig& cfg,
                                    JammerBudget budget) {
  const PhasePowers p = phase_jam_powers(alloc, cfg, budget);
  double signal = 0.0;
  double noise = 1.0;
  for (std::size_t k = 0; k < cfg.num_users(); ++k) {
    const auto q = lmmse_quality(cfg.user(k), p.train[k]);
    const double rx = cfg.user(k).data_power() / (1.0 + p.data);
    signal += rx * q.est_var;
    noise += rx * q.err_var;
  }
  return signal / noise;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

}  // namespace jamopt
