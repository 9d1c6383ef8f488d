// Brute-force reference minimizer. Deliberately shares nothing with the
// analytic solvers beyond the objective itself.

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <random>

#include "jamopt/optimizer.hpp"

namespace jamopt {

namespace {

std::uint64_t simplex_grid_size(std::uint64_t divisions, std::size_t free_coords) {
  // C(divisions + free_coords, free_coords), saturating.
  long double count = 1.0L;
  for (std::size_t i = 1; i <= free_coords; ++i) {
    count = count * static_cast<long double>(divisions + i) / static_cast<long double>(i);
  }
  if (count > static_cast<long double>(std::numeric_limits<std::uint64_t>::max() / 2)) {
    return std::numeric_limits<std::uint64_t>::max() / 2;
  }
  return static_cast<std::uint64_t>(std::llround(count));
}

struct SearchState {
  double best = std::numeric_limits<double>::infinity();
  double worst = -std::numeric_limits<double>::infinity();
  std::vector<double> argmin;
  std::uint64_t points = 0;

  void offer(double value, std::span<const double> coords) {
    ++points;
    worst = std::max(worst, value);
    if (value < best) {
      best = value;
      argmin.assign(coords.begin(), coords.end());
    }
  }
};

// Enumerates every grid point j / n with sum(j) <= n over the K training
// coordinates; zeta_d takes the remainder. Per-user terms are tabulated so the
// inner loop is a lookup and a division.
void grid_search(const RhoKernel& kernel, std::uint64_t n, SearchState& st) {
  const std::size_t users = kernel.c().size();
  const double a = kernel.energy();
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<std::vector<double>> table(users, std::vector<double>(n + 1));
  for (std::size_t k = 0; k < users; ++k) {
    for (std::uint64_t j = 0; j <= n; ++j) {
      table[k][j] = kernel.c()[k] / (a * (static_cast<double>(j) * inv_n) + kernel.e()[k]);
    }
  }
  std::vector<std::uint64_t> idx(users, 0);
  std::vector<double> coords(users + 1, 0.0);
  const double data_gain = a / kernel.data_len();

  auto emit_best = [&](double value) {
    for (std::size_t k = 0; k < users; ++k) coords[k] = static_cast<double>(idx[k]) * inv_n;
    double rest = 1.0;
    for (std::size_t k = 0; k < users; ++k) rest -= coords[k];
    coords[users] = std::max(0.0, rest);
    st.best = value;
    st.argmin = coords;
  };

  // Recurse over the first K-1 users; the last user is a tight loop.
  auto recurse = [&](auto&& self, std::size_t k, std::uint64_t remaining, double a_prefix) -> void {
    if (k + 1 < users) {
      for (std::uint64_t j = 0; j <= remaining; ++j) {
        idx[k] = j;
        self(self, k + 1, remaining - j, a_prefix + table[k][j]);
      }
      return;
    }
    const auto& last = table[k];
    for (std::uint64_t j = 0; j <= remaining; ++j) {
      const double a_sum = a_prefix + last[j];
      const double zeta_d = static_cast<double>(remaining - j) * inv_n;
      const double value = a_sum / (kernel.offset() + data_gain * zeta_d - a_sum);
      ++st.points;
      if (value > st.worst) st.worst = value;
      if (value < st.best) {
        idx[k] = j;
        emit_best(value);
      }
    }
  };
  recurse(recurse, 0, n, 0.0);
}

void random_search(const RhoKernel& kernel, const OracleOptions& opts, SearchState& st) {
  const std::size_t n = kernel.dim();
  std::vector<double> x(n);
  for (std::size_t v = 0; v < n; ++v) {
    std::fill(x.begin(), x.end(), 0.0);
    x[v] = 1.0;
    st.offer(kernel.value(x), x);
  }
  std::mt19937_64 rng(opts.seed);
  std::exponential_distribution<double> expo(1.0);
  for (std::uint64_t s = 0; s < opts.random_samples; ++s) {
    double sum = 0.0;
    for (double& xi : x) sum += (xi = expo(rng));
    for (double& xi : x) xi /= sum;
    st.offer(kernel.value(x), x);
  }
}

// Moves mass between pairs of coordinates, minimizing along each pair
// direction with Brent's method, until a full sweep brings no improvement.
double pairwise_polish(const RhoKernel& kernel, std::vector<double>& x) {
  const std::size_t n = x.size();
  double f = kernel.value(x);
  std::vector<double> trial(n);
  for (int sweep = 0; sweep < 2000; ++sweep) {
    const double f_start = f;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double lo = -x[i];
        const double hi = x[j];
        if (hi - lo <= 0.0) continue;
        auto along = [&](double t) {
          trial = x;
          trial[i] = std::max(0.0, x[i] + t);
          trial[j] = std::max(0.0, x[j] - t);
          return kernel.value(trial);
        };
        const auto [t, ft] = boost::math::tools::brent_find_minima(along, lo, hi, 52);
        if (ft < f) {
          x[i] = std::max(0.0, x[i] + t);
          x[j] = std::max(0.0, x[j] - t);
          f = ft;
        }
      }
    }
    if (!(f < f_start - 1e-15 * std::abs(f_start))) break;
  }
  return f;
}

}  // namespace

OracleResult solve_oracle(const SystemConfig& cfg, JammerBudget budget,
                          const OracleOptions& opts) {
  const RhoKernel kernel(cfg, budget);
  const std::size_t users = cfg.num_users();
  SearchState st;

  if (users <= 3) {
    if (!(opts.grid_step > 0.0) || opts.grid_step > 1.0) {
      throw std::invalid_argument("oracle grid step must lie in (0, 1]");
    }
    const auto n = static_cast<std::uint64_t>(std::llround(1.0 / opts.grid_step));
    const std::uint64_t size = simplex_grid_size(n, users);
    if (size > opts.max_grid_points) {
      throw std::length_error("oracle grid of " + std::to_string(size) +
                              " points exceeds the configured cap");
    }
    grid_search(kernel, n, st);
  } else {
    random_search(kernel, opts, st);
  }

  std::vector<double> x = st.argmin;
  if (opts.polish && budget.avg_power() > 0.0) pairwise_polish(kernel, x);

  double sum = 0.0;
  for (double v : x) sum += v;
  for (double& v : x) v /= sum;
  const auto alloc = JammerAllocation::from_coordinates(x);

  OracleResult out{.best = certify(alloc, SolveMethod::oracle, 0, cfg, budget)};
  out.points = st.points;
  out.search_min = st.best;
  out.search_max = st.worst;
  return out;
}

}  // namespace jamopt
