#include "jamopt/rates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

namespace jamopt {

namespace {

// Samples are drawn in fixed-size blocks whose partial statistics are merged
// in block order, which makes the result independent of thread scheduling.
constexpr std::uint64_t kBlockSize = 4096;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based uniform in (0, 1]: a pure function of (seed, counter).
double uniform_open0(std::uint64_t seed, std::uint64_t counter) {
  const std::uint64_t bits = mix64(mix64(seed) + 0x9e3779b97f4a7c15ULL * (counter + 1));
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

struct Moments {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }

  void merge(const Moments& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double total = static_cast<double>(n + o.n);
    const double d = o.mean - mean;
    mean += d * static_cast<double>(o.n) / total;
    m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / total;
    n += o.n;
  }
};

struct RateModel {
  std::vector<double> est_var;  // mean of |h_hat_k|^2
  std::vector<double> rx_gain;  // P_d_k / (1 + P_wd) / (1 + sum err_var * P_d / (1 + P_wd))
  double prefactor = 0.0;
};

RateModel make_rate_model(const JammerAllocation& alloc, const SystemConfig& cfg,
                          JammerBudget budget) {
  const PhasePowers p = phase_jam_powers(alloc, cfg, budget);
  RateModel m;
  double denom = 1.0;
  for (std::size_t k = 0; k < cfg.num_users(); ++k) {
    const auto q = lmmse_quality(cfg.user(k), p.train[k]);
    const double rx = cfg.user(k).data_power() / (1.0 + p.data);
    m.est_var.push_back(q.est_var);
    m.rx_gain.push_back(rx);
    denom += q.err_var * rx;
  }
  for (double& g : m.rx_gain) g /= denom;
  m.prefactor = data_fraction(cfg);
  return m;
}

Moments run_block(const RateModel& m, std::uint64_t seed, std::uint64_t first,
                  std::uint64_t last) {
  const std::size_t users = m.est_var.size();
  Moments acc;
  for (std::uint64_t i = first; i < last; ++i) {
    double sinr = 0.0;
    for (std::size_t k = 0; k < users; ++k) {
      const double u = uniform_open0(seed, i * users + k);
      sinr += m.rx_gain[k] * m.est_var[k] * -std::log(u);
    }
    acc.push(m.prefactor * std::log2(1.0 + sinr));
  }
  return acc;
}

}  // namespace

double data_fraction(const SystemConfig& cfg) {
  return static_cast<double>(cfg.data_len()) / cfg.block_len();
}

McEstimate sum_rate_mc(const JammerAllocation& alloc, const SystemConfig& cfg,
                       JammerBudget budget, const MonteCarloSettings& mc) {
  if (mc.samples == 0) throw std::invalid_argument("Monte Carlo needs at least one sample");
  const RateModel model = make_rate_model(alloc, cfg, budget);

  const std::uint64_t blocks = (mc.samples + kBlockSize - 1) / kBlockSize;
  std::vector<Moments> partial(blocks);
  auto work = [&](std::uint64_t start, std::uint64_t stride) {
    for (std::uint64_t b = start; b < blocks; b += stride) {
      const std::uint64_t first = b * kBlockSize;
      partial[b] = run_block(model, mc.seed, first, std::min(first + kBlockSize, mc.samples));
    }
  };

  unsigned workers = mc.workers == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                     : mc.workers;
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, blocks));
  if (workers <= 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
  }

  Moments total;
  for (const auto& p : partial) total.merge(p);
  McEstimate out;
  out.mean = total.mean;
  if (total.n > 1) {
    const double sd = std::sqrt(std::max(0.0, total.m2) / static_cast<double>(total.n - 1));
    out.halfwidth = mc.confidence_z * sd / std::sqrt(static_cast<double>(total.n));
  }
  return out;
}

double sum_rate_ub(const JammerAllocation& alloc, const SystemConfig& cfg, JammerBudget budget) {
  return data_fraction(cfg) * std::log2(1.0 + objective_rho(alloc, cfg, budget));
}

double sum_rate_lb(const JammerAllocation& alloc, const SystemConfig& cfg, JammerBudget budget) {
  const double rho = objective_rho(alloc, cfg, budget);
  return data_fraction(cfg) * std::log2(1.0 + rho * std::exp(-kEulerGamma));
}

RateReport rate_report(const JammerAllocation& alloc, const SystemConfig& cfg,
                       JammerBudget budget, const MonteCarloSettings& mc) {
  const McEstimate est = sum_rate_mc(alloc, cfg, budget, mc);
  return {sum_rate_lb(alloc, cfg, budget), est.mean, est.halfwidth,
          sum_rate_ub(alloc, cfg, budget)};
}

}  // namespace jamopt
