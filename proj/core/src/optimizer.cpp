#include "jamopt/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <random>

namespace jamopt {

std::string_view to_string(SolveMethod m) {
  switch (m) {
    case SolveMethod::kkt_active_set: return "kkt_active_set";
    case SolveMethod::closed_form: return "closed_form";
    case SolveMethod::asymptotic: return "asymptotic";
    case SolveMethod::oracle: return "oracle";
    case SolveMethod::projected_descent: return "projected_descent";
  }
  return "unknown";
}

double KktCertificate::residual() const noexcept {
  return std::max({feasibility, stationarity, dual, complementarity});
}

// ---------------------------------------------------------------------------
// RhoKernel

RhoKernel::RhoKernel(const SystemConfig& cfg, JammerBudget budget)
    : energy_(budget.block_energy(cfg)),
      data_len_(cfg.data_len()),
      offset_(1.0 + cfg.total_data_power()) {
  c_.reserve(cfg.num_users());
  e_.reserve(cfg.num_users());
  for (const auto& u : cfg.users()) {
    const double tt = u.train_len();
    c_.push_back(u.data_power() * u.train_power() * tt * tt);
    e_.push_back(tt * (1.0 + u.train_power() * tt));
  }
}

double RhoKernel::value(std::span<const double> coords) const {
  double a_sum = 0.0;
  for (std::size_t k = 0; k < c_.size(); ++k) a_sum += c_[k] / (energy_ * coords[k] + e_[k]);
  const double denom = offset_ + energy_ * coords[c_.size()] / data_len_ - a_sum;
  return a_sum / denom;
}

double RhoKernel::gradient(std::span<const double> coords, std::span<double> grad) const {
  const std::size_t users = c_.size();
  double a_sum = 0.0;
  for (std::size_t k = 0; k < users; ++k) a_sum += c_[k] / (energy_ * coords[k] + e_[k]);
  const double total = offset_ + energy_ * coords[users] / data_len_;
  const double denom = total - a_sum;
  const double inv2 = 1.0 / (denom * denom);
  for (std::size_t k = 0; k < users; ++k) {
    const double q = energy_ * coords[k] + e_[k];
    grad[k] = -energy_ * c_[k] / (q * q) * total * inv2;
  }
  grad[users] = -energy_ / data_len_ * a_sum * inv2;
  return a_sum / denom;
}

// ---------------------------------------------------------------------------
// KKT certificate and fixed-point map, written term by term in alpha/beta/gamma.

namespace {

struct StationarityTerms {
  std::vector<double> neg_grad;  // -d rho / d zeta, K training then data
  RhoTerms terms;
};

StationarityTerms stationarity_terms(const JammerAllocation& alloc, const SystemConfig& cfg,
                                     JammerBudget budget) {
  StationarityTerms out;
  out.terms = alpha_beta_gamma(alloc, cfg, budget);
  const double energy = budget.block_energy(cfg);
  const double gamma = out.terms.gamma;
  const double beta_term = 1.0 + gamma * out.terms.beta_sum();
  const double pd_term = 1.0 + gamma * cfg.total_data_power();
  for (std::size_t k = 0; k < cfg.num_users(); ++k) {
    const auto& u = cfg.user(k);
    const double tt = u.train_len();
    const double q = energy * alloc.zeta_t(k) + tt * (1.0 + u.train_power() * tt);
    out.neg_grad.push_back(energy * gamma * u.data_power() * u.train_power() * tt * tt * pd_term /
                           (q * q * beta_term * beta_term));
  }
  const double td = cfg.data_len();
  const double qd = energy * alloc.zeta_d() + td;
  out.neg_grad.push_back(energy * td * out.terms.alpha_sum() /
                         (qd * qd * beta_term * beta_term));
  return out;
}

}  // namespace

KktCertificate kkt_certificate(const JammerAllocation& alloc, const SystemConfig& cfg,
                               JammerBudget budget) {
  const StationarityTerms st = stationarity_terms(alloc, cfg, budget);
  const std::vector<double> zeta = alloc.coordinates();
  const std::size_t n = zeta.size();

  KktCertificate cert;
  double sum = 0.0;
  double negative = 0.0;
  for (double z : zeta) {
    sum += z;
    negative = std::max(negative, -z);
  }
  cert.feasibility = std::max(std::abs(sum - 1.0), negative);

  cert.nu = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (zeta[i] > kActiveTolerance) cert.nu = std::max(cert.nu, st.neg_grad[i]);
  }
  const double scale = cert.nu > 0.0 ? cert.nu : 1.0;
  cert.lambdas.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double slack = cert.nu - st.neg_grad[i];
    if (zeta[i] > kActiveTolerance) {
      cert.stationarity = std::max(cert.stationarity, std::abs(slack) / scale);
    } else {
      cert.lambdas[i] = slack;
      cert.dual = std::max(cert.dual, -slack / scale);
    }
    cert.complementarity = std::max(cert.complementarity, std::abs(slack * zeta[i]) / scale);
  }
  return cert;
}

std::vector<double> optimality_fixed_point(const JammerAllocation& alloc, double nu,
                                           const SystemConfig& cfg, JammerBudget budget) {
  const RhoTerms t = alpha_beta_gamma(alloc, cfg, budget);
  const double energy = budget.block_energy(cfg);
  const double gamma = t.gamma;
  const double beta_term = 1.0 + gamma * t.beta_sum();
  const double sqrt_nu = std::sqrt(nu);
  std::vector<double> out;
  out.reserve(cfg.num_users() + 1);
  for (const auto& u : cfg.users()) {
    const double tt = u.train_len();
    const double level = std::sqrt(energy * gamma * u.data_power() * u.train_power() * tt * tt *
                                   (1.0 + gamma * cfg.total_data_power())) /
                         (sqrt_nu * beta_term);
    out.push_back(std::max(0.0, level - tt * (1.0 + u.train_power() * tt)) / energy);
  }
  const double td = cfg.data_len();
  const double level = std::sqrt(energy * td * t.alpha_sum()) / (sqrt_nu * beta_term);
  out.push_back(std::max(0.0, level - td) / energy);
  return out;
}

SolveResult certify(const JammerAllocation& alloc, SolveMethod method, int iterations,
                    const SystemConfig& cfg, JammerBudget budget) {
  const KktCertificate cert = kkt_certificate(alloc, cfg, budget);
  std::vector<bool> at_zero;
  for (double z : alloc.coordinates()) at_zero.push_back(z <= kActiveTolerance);
  return SolveResult{.alloc = alloc,
                     .rho_star = objective_rho(alloc, cfg, budget),
                     .nu_star = cert.nu,
                     .lambdas = cert.lambdas,
                     .at_zero = std::move(at_zero),
                     .method = method,
                     .kkt_residual = cert.residual(),
                     .iterations = iterations};
}

namespace {

void require_positive_budget(JammerBudget budget) {
  if (!(budget.avg_power() > 0.0)) {
    throw std::invalid_argument(
        "jammer budget must be positive; with P_w = 0 every allocation is optimal");
  }
}

// Training water-filling at a fixed training budget: minimizes
// sum_k c_k / (a x_k + e_k) over x >= 0, sum x = budget. Active users share a
// common level s with a x_k + e_k = s sqrt(c_k).
class WaterFilling {
 public:
  explicit WaterFilling(const RhoKernel& kernel) : kernel_(kernel) {
    const auto c = kernel.c();
    const auto e = kernel.e();
    for (std::size_t k = 0; k < c.size(); ++k) {
      sqrt_c_.push_back(std::sqrt(c[k]));
      if (c[k] > 0.0) order_.push_back(k);
    }
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t i, std::size_t j) {
      return e[i] / sqrt_c_[i] < e[j] / sqrt_c_[j];
    });
  }

  bool degenerate() const noexcept { return order_.empty(); }

  struct Level {
    double s;        // common level
    double nu;       // marginal value a / s^2 of training energy
    double a_sum;    // sum_k c_k / (a x_k + e_k)
    std::size_t active;
  };

  Level solve(double budget) const {
    const auto c = kernel_.c();
    const auto e = kernel_.e();
    const double a = kernel_.energy();
    double e_sum = 0.0;
    double root_sum = 0.0;
    double s = 0.0;
    std::size_t m = 0;
    while (m < order_.size()) {
      const std::size_t k = order_[m];
      e_sum += e[k];
      root_sum += sqrt_c_[k];
      ++m;
      s = (a * budget + e_sum) / root_sum;
      if (m == order_.size()) break;
      const std::size_t next = order_[m];
      if (s <= e[next] / sqrt_c_[next]) break;
    }
    Level lv{s, a / (s * s), 0.0, m};
    for (std::size_t i = 0; i < order_.size(); ++i) {
      const std::size_t k = order_[i];
      lv.a_sum += i < m ? sqrt_c_[k] / s : c[k] / e[k];
    }
    return lv;
  }

  std::vector<double> allocation(double budget) const {
    const Level lv = solve(budget);
    const auto e = kernel_.e();
    const double a = kernel_.energy();
    std::vector<double> x(sqrt_c_.size(), 0.0);
    for (std::size_t i = 0; i < lv.active; ++i) {
      const std::size_t k = order_[i];
      x[k] = std::max(0.0, lv.s * sqrt_c_[k] - e[k]) / a;
    }
    return x;
  }

 private:
  const RhoKernel& kernel_;
  std::vector<double> sqrt_c_;
  std::vector<std::size_t> order_;
};

}  // namespace

SolveResult solve_kkt(const SystemConfig& cfg, JammerBudget budget, const KktOptions& opts) {
  require_positive_budget(budget);
  const RhoKernel kernel(cfg, budget);
  const WaterFilling wf(kernel);
  const std::size_t users = cfg.num_users();

  auto build = [&](double zeta_d) {
    std::vector<double> coords = wf.allocation(1.0 - zeta_d);
    coords.push_back(zeta_d);
    return JammerAllocation::from_coordinates(coords);
  };

  // No user carries data: rho vanishes identically, every point is optimal.
  if (wf.degenerate()) {
    std::vector<double> coords(users + 1, 0.0);
    coords.back() = 1.0;
    return certify(JammerAllocation::from_coordinates(coords), SolveMethod::kkt_active_set, 0,
                    cfg, budget);
  }

  // Sign of d/dzeta_d of min_x rho(x, zeta_d); the partial minimum is
  // quasiconvex in zeta_d, so the sign changes at most once.
  const double a = kernel.energy();
  const double td = kernel.data_len();
  auto slope = [&](double zeta_d) {
    const auto lv = wf.solve(1.0 - zeta_d);
    const double total = kernel.offset() + a * zeta_d / td;
    return lv.nu * total - lv.a_sum * a / td;
  };

  double zeta_d = 0.0;
  int iterations = 0;
  if (slope(0.0) >= 0.0) {
    zeta_d = 0.0;
  } else if (slope(1.0) <= 0.0) {
    zeta_d = 1.0;
  } else {
    double lo = 0.0;
    double hi = 1.0;
    while (iterations < opts.max_outer) {
      ++iterations;
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const double h = slope(mid);
      if (h == 0.0) {
        lo = hi = mid;
        break;
      }
      (h < 0.0 ? lo : hi) = mid;
    }
    zeta_d = 0.5 * (lo + hi);
  }

  SolveResult r = certify(build(zeta_d), SolveMethod::kkt_active_set, iterations, cfg, budget);
  if (!(r.kkt_residual < opts.tol)) {
    throw SolverError("KKT solver did not reach tolerance", r.kkt_residual, iterations);
  }
  return r;
}

double closed_form_data_threshold(const SystemConfig& cfg) {
  double delta = 0.0;
  for (const auto& u : cfg.users()) delta += u.train_power() * u.train_len() * u.train_len();
  const double td = cfg.data_len();
  return (td * (1.0 + cfg.total_data_power()) - cfg.total_train_len() - delta) /
         cfg.block_len();
}

std::optional<SolveResult> solve_closed_form(const SystemConfig& cfg, JammerBudget budget) {
  require_positive_budget(budget);
  const double a = budget.block_energy(cfg);
  const double block = cfg.block_len();
  const double td = cfg.data_len();
  const double pd_sum = cfg.total_data_power();
  double delta = 0.0;
  double eta = 0.0;
  for (const auto& u : cfg.users()) {
    const double tt = u.train_len();
    delta += u.train_power() * tt * tt;
    eta += tt * std::sqrt(u.data_power() * u.train_power());
  }
  if (!(eta > 0.0)) return std::nullopt;

  std::vector<double> zeta_t;
  for (const auto& u : cfg.users()) {
    const double tt = u.train_len();
    const double root = std::sqrt(u.data_power() * u.train_power());
    if (!(root > 0.0)) return std::nullopt;
    const double num = a + block + delta + td * pd_sum - (1.0 + u.train_power() * tt) / root * (2.0 * eta);
    const double den = 2.0 * a * (eta / (tt * root));
    zeta_t.push_back(num / den);
  }
  const double zeta_d = 0.5 + (cfg.total_train_len() + delta - td * (1.0 + pd_sum)) / (2.0 * a);
  if (!(zeta_d > 0.0) ||
      std::any_of(zeta_t.begin(), zeta_t.end(), [](double z) { return !(z > 0.0); })) {
    return std::nullopt;
  }
  return certify(JammerAllocation(std::move(zeta_t), zeta_d), SolveMethod::closed_form, 0, cfg,
                  budget);
}

JammerAllocation solve_asymptotic(const SystemConfig& cfg) {
  std::vector<double> weight;
  double eta = 0.0;
  for (const auto& u : cfg.users()) {
    weight.push_back(u.train_len() * std::sqrt(u.train_power() * u.data_power()));
    eta += weight.back();
  }
  if (!(eta > 0.0)) {
    throw std::domain_error("asymptotic allocation undefined when every user has zero data power");
  }
  for (double& w : weight) w /= 2.0 * eta;
  return JammerAllocation(std::move(weight), 0.5);
}

SolveResult solve_optimal(const SystemConfig& cfg, JammerBudget budget, const KktOptions& opts) {
  if (auto cf = solve_closed_form(cfg, budget); cf && cf->kkt_residual < opts.tol) {
    return *cf;
  }
  return solve_kkt(cfg, budget, opts);
}

// ---------------------------------------------------------------------------
// Projected gradient

std::vector<double> project_to_simplex(std::span<const double> v) {
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double t = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(0.0, v[i] - theta);
  return out;
}

namespace {

double projected_gradient_norm(std::span<const double> x, std::span<const double> g) {
  double gmax = 0.0;
  for (double gi : g) gmax = std::max(gmax, std::abs(gi));
  if (gmax == 0.0) return 0.0;
  std::vector<double> trial(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] - g[i] / gmax;
  const auto p = project_to_simplex(trial);
  double norm = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) norm = std::max(norm, std::abs(p[i] - x[i]));
  return norm;
}

// g . d for a direction d with zero sum. The gradient is shifted by its
// value at the largest coordinate first; the common part of g cancels in the
// plain sum and leaves only rounding once the iterate is near stationary.
double directional_derivative(std::span<const double> g, std::span<const double> d,
                              std::span<const double> x) {
  const auto ref = static_cast<std::size_t>(std::max_element(x.begin(), x.end()) - x.begin());
  double sum = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) sum += (g[i] - g[ref]) * d[i];
  return sum;
}

struct DescentRun {
  std::vector<double> x;
  double value;
  double pg_norm;
  int iterations;
};

DescentRun spectral_projected_gradient(const RhoKernel& kernel, std::vector<double> x,
                                       const DescentOptions& opts) {
  constexpr int kMemory = 10;
  constexpr double kArmijo = 1e-4;
  constexpr double kStepMin = 1e-30;
  constexpr double kStepMax = 1e30;

  const std::size_t n = x.size();
  x = project_to_simplex(x);
  std::vector<double> g(n), g_new(n), trial(n), d(n);
  double f = kernel.gradient(x, g);
  std::deque<double> history{f};

  double pg = projected_gradient_norm(x, g);
  double step = 1.0;
  {
    double gmax = 0.0;
    for (double gi : g) gmax = std::max(gmax, std::abs(gi));
    if (gmax > 0.0) step = 1.0 / gmax;
  }

  int it = 0;
  while (pg >= opts.tol && it < opts.max_iterations) {
    ++it;
    for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] - step * g[i];
    const auto p = project_to_simplex(trial);
    for (std::size_t i = 0; i < n; ++i) d[i] = p[i] - x[i];
    const double slope = directional_derivative(g, d, x);
    if (slope >= 0.0) break;

    // Nonmonotone Armijo test. Close to the optimum the value differences
    // drop below rounding, so a step along which rho is still decreasing at
    // its end point (convex along the segment) is accepted as well.
    const double f_ref = *std::max_element(history.begin(), history.end());
    double t = 1.0;
    double f_new = 0.0;
    for (int bt = 0; bt < 80; ++bt) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = std::max(0.0, x[i] + t * d[i]);
      f_new = kernel.gradient(trial, g_new);
      if (f_new <= f_ref + kArmijo * t * slope) break;
      if (directional_derivative(g_new, d, x) <= 0.0) break;
      t *= 0.5;
    }

    double ss = 0.0;
    double sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = trial[i] - x[i];
      const double y = g_new[i] - g[i];
      ss += s * s;
      sy += s * y;
    }
    if (ss == 0.0) break;
    step = sy > 0.0 ? std::clamp(ss / sy, kStepMin, kStepMax) : kStepMax;

    x = trial;
    g.swap(g_new);
    f = f_new;
    history.push_back(f);
    if (history.size() > kMemory) history.pop_front();
    pg = projected_gradient_norm(x, g);
  }
  return {x, f, pg, it};
}

std::vector<double> uniform_coordinates(const SystemConfig& cfg) {
  std::vector<double> x;
  for (const auto& u : cfg.users()) x.push_back(static_cast<double>(u.train_len()) / cfg.block_len());
  x.push_back(static_cast<double>(cfg.data_len()) / cfg.block_len());
  return x;
}

}  // namespace

SolveResult solve_projected_descent_from(const SystemConfig& cfg, JammerBudget budget,
                                         const JammerAllocation& start,
                                         const DescentOptions& opts) {
  require_positive_budget(budget);
  const RhoKernel kernel(cfg, budget);
  const DescentRun run = spectral_projected_gradient(kernel, start.coordinates(), opts);
  if (!(run.pg_norm < opts.tol)) {
    throw SolverError("projected descent did not converge", run.pg_norm, run.iterations);
  }
  return certify(JammerAllocation::from_coordinates(run.x), SolveMethod::projected_descent,
                  run.iterations, cfg, budget);
}

SolveResult solve_projected_descent(const SystemConfig& cfg, JammerBudget budget,
                                    const DescentOptions& opts) {
  require_positive_budget(budget);
  const RhoKernel kernel(cfg, budget);
  const std::size_t users = cfg.num_users();

  std::vector<std::vector<double>> starts;
  starts.push_back(uniform_coordinates(cfg));
  {
    std::vector<double> x;
    for (const auto& u : cfg.users())
      x.push_back(static_cast<double>(u.train_len()) / cfg.total_train_len());
    x.push_back(0.0);
    starts.push_back(std::move(x));
  }
  {
    std::vector<double> x(users + 1, 0.0);
    x.back() = 1.0;
    starts.push_back(std::move(x));
  }
  if (cfg.total_data_power() > 0.0) starts.push_back(solve_asymptotic(cfg).coordinates());
  {
    std::mt19937_64 rng(opts.seed);
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> x(users + 1);
    double sum = 0.0;
    for (double& xi : x) sum += (xi = expo(rng));
    for (double& xi : x) xi /= sum;
    starts.push_back(std::move(x));
  }

  std::optional<DescentRun> best;
  int total_iterations = 0;
  double best_unconverged = std::numeric_limits<double>::infinity();
  for (auto& s : starts) {
    DescentRun run = spectral_projected_gradient(kernel, std::move(s), opts);
    total_iterations += run.iterations;
    if (!(run.pg_norm < opts.tol)) {
      best_unconverged = std::min(best_unconverged, run.pg_norm);
      continue;
    }
    if (!best || run.value < best->value) best = std::move(run);
  }
  if (!best) {
    throw SolverError("projected descent did not converge from any start", best_unconverged,
                      total_iterations);
  }
  return certify(JammerAllocation::from_coordinates(best->x), SolveMethod::projected_descent,
                  total_iterations, cfg, budget);
}

// ---------------------------------------------------------------------------
// Pairwise ordering checks

std::vector<OrderingVerdict> check_corollary_orderings(const SolveResult& result,
                                                       const SystemConfig& cfg) {
  auto same = [](double x, double y) {
    return std::abs(x - y) <= 1e-12 * std::max(std::abs(x), std::abs(y));
  };
  std::vector<OrderingVerdict> out;
  const auto users = cfg.users();
  for (std::size_t i = 0; i < users.size(); ++i) {
    for (std::size_t j = i + 1; j < users.size(); ++j) {
      const auto& ui = users[i];
      const auto& uj = users[j];
      const bool eq_tt = ui.train_len() == uj.train_len();
      const bool eq_pt = same(ui.train_power(), uj.train_power());
      const bool eq_pd = same(ui.data_power(), uj.data_power());

      auto emit = [&](Corollary c, bool i_larger) {
        const std::size_t hi = i_larger ? i : j;
        const std::size_t lo = i_larger ? j : i;
        const bool ok = result.alloc.zeta_t(hi) >= result.alloc.zeta_t(lo) - kActiveTolerance;
        out.push_back({c, hi, lo, ok});
      };
      if (eq_tt && eq_pt && !eq_pd) emit(Corollary::data_power, ui.data_power() > uj.data_power());
      if (eq_tt && eq_pd && !eq_pt) emit(Corollary::train_power, ui.train_power() > uj.train_power());
      if (eq_pt && eq_pd && !eq_tt) emit(Corollary::train_len, ui.train_len() > uj.train_len());
    }
  }
  return out;
}

}  // namespace jamopt
