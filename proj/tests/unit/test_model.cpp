#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "jamopt/model.hpp"
#include "oracles.hpp"

using namespace jamopt;
using jamopt::testing::Channel;
using jamopt::testing::Generator;

namespace {

SystemConfig single_user(double pt, double pd, int tt, int T) {
  return SystemConfig(T, {UserParams(pt, pd, tt)});
}

double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("user and system invariants") {
  CHECK_THROWS_AS(UserParams(0.0, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(UserParams(-1.0, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(UserParams(1.0, -1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(UserParams(1.0, 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(UserParams(std::numeric_limits<double>::quiet_NaN(), 1.0, 1), std::invalid_argument);
  CHECK_NOTHROW(UserParams(1.0, 0.0, 1));

  CHECK_THROWS_AS(SystemConfig(10, {}), std::invalid_argument);
  CHECK_THROWS_AS(SystemConfig(4, {UserParams(1, 1, 2), UserParams(1, 1, 2)}), std::invalid_argument);
  const SystemConfig cfg(10, {UserParams(1, 2, 2), UserParams(1, 3, 3)});
  CHECK(cfg.total_train_len() == 5);
  CHECK(cfg.data_len() == 5);
  CHECK(cfg.total_data_power() == doctest::Approx(5.0));

  CHECK_THROWS_AS(JammerBudget(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(JammerBudget(std::numeric_limits<double>::infinity()), std::invalid_argument);
}

TEST_CASE("allocation construction renormalizes and rejects bad sums") {
  const JammerAllocation a({0.25, 0.25}, 0.5 + 5e-7);
  double s = a.zeta_d();
  for (double z : a.zeta_t()) s += z;
  CHECK(std::abs(s - 1.0) <= 1e-15);

  CHECK_THROWS_AS(JammerAllocation({0.3, 0.3}, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(JammerAllocation({-0.1, 0.6}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(JammerAllocation({}, 1.0), std::invalid_argument);

  const std::vector<double> coords{0.1, 0.2, 0.7};
  const auto b = JammerAllocation::from_coordinates(coords);
  CHECK(b.num_users() == 2);
  CHECK(b.zeta_d() == doctest::Approx(0.7));
  CHECK(b.coordinates() == coords);
}

TEST_CASE("phase jamming powers") {
  SUBCASE("zero budget") {
    const SystemConfig cfg(10, {UserParams(1, 1, 1), UserParams(2, 2, 2)});
    const auto p = phase_jam_powers(JammerAllocation({0.2, 0.3}, 0.5), cfg, JammerBudget(0.0));
    CHECK(p.train[0] == 0.0);
    CHECK(p.train[1] == 0.0);
    CHECK(p.data == 0.0);
  }
  SUBCASE("single user, all energy on its pilots") {
    const auto p = phase_jam_powers(JammerAllocation({1.0}, 0.0), single_user(1, 1, 4, 100), JammerBudget(1.0));
    CHECK(p.train[0] == doctest::Approx(25.0).epsilon(1e-14));
    CHECK(p.data == 0.0);
  }
  SUBCASE("two users") {
    const SystemConfig cfg(10, {UserParams(1, 1, 1), UserParams(1, 1, 1)});
    const auto p = phase_jam_powers(JammerAllocation({0.25, 0.25}, 0.5), cfg, JammerBudget(2.0));
    CHECK(p.train[0] == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(p.train[1] == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(p.data == doctest::Approx(1.25).epsilon(1e-14));
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(phase_jam_powers(JammerAllocation({0.5, 0.25}, 0.25), single_user(1, 1, 1, 10),
                                     JammerBudget(1.0)),
                    std::invalid_argument);
  }
}

TEST_CASE("phase energies add up to the block energy") {
  Generator gen(101);
  for (int trial = 0; trial < 1000; ++trial) {
    const Channel ch = gen.channel();
    const SystemConfig cfg = ch.config();
    const double pw = gen.log_uniform(1e-3, 1e6);
    const auto alloc = JammerAllocation::from_coordinates(gen.simplex_point(ch.users() + 1));
    const auto p = phase_jam_powers(alloc, cfg, JammerBudget(pw));
    double energy = p.data * ch.data_len();
    for (std::size_t k = 0; k < ch.users(); ++k) energy += p.train[k] * ch.train_len[k];
    CHECK(rel_diff(energy, pw * ch.block_len) <= 1e-9);
  }
}

TEST_CASE("LMMSE variances") {
  const auto q = lmmse_quality(UserParams(10, 1, 1), 0.0);
  CHECK(q.est_var == doctest::Approx(10.0 / 11.0).epsilon(1e-15));
  CHECK(q.err_var == doctest::Approx(1.0 / 11.0).epsilon(1e-15));

  const auto weak = lmmse_quality(UserParams(1e-12, 1, 1), 0.0);
  CHECK(weak.est_var < 1e-11);
  CHECK(weak.err_var > 1.0 - 1e-11);

  const auto jammed = lmmse_quality(UserParams(10, 1, 1), 1e15);
  CHECK(jammed.est_var < 1e-13);
  CHECK(jammed.err_var > 1.0 - 1e-13);

  CHECK_THROWS_AS(lmmse_quality(UserParams(1, 1, 1), -1.0), std::invalid_argument);

  Generator gen(7);
  for (int i = 0; i < 1000; ++i) {
    const UserParams u(gen.log_uniform(1e-3, 1e4), 1.0, gen.integer(1, 10));
    const auto e = lmmse_quality(u, gen.log_uniform(1e-6, 1e6));
    CHECK(std::abs(e.est_var + e.err_var - 1.0) <= 1e-12);
    CHECK(e.est_var >= 0.0);
    CHECK(e.est_var < 1.0);
    CHECK(e.err_var > 0.0);
    CHECK(e.err_var <= 1.0);
  }
}

TEST_CASE("objective on the single-user example") {
  // alpha = 100/11, beta = 10/11, gamma = 1, rho = (100/11) / (21/11) = 100/21.
  const auto cfg = single_user(10, 10, 1, 10);
  const JammerAllocation alloc({0.4}, 0.6);
  const auto terms = alpha_beta_gamma(alloc, cfg, JammerBudget(0.0));
  CHECK(terms.alpha[0] == doctest::Approx(100.0 / 11.0).epsilon(1e-15));
  CHECK(terms.beta[0] == doctest::Approx(10.0 / 11.0).epsilon(1e-15));
  CHECK(terms.gamma == 1.0);
  CHECK(objective_rho(alloc, cfg, JammerBudget(0.0)) == doctest::Approx(100.0 / 21.0).epsilon(1e-15));
}

TEST_CASE("alpha, beta and gamma at the edges") {
  const SystemConfig cfg(20, {UserParams(3, 7, 2), UserParams(0.5, 2, 1)});
  const JammerBudget budget(5.0);

  const auto free_pilots = alpha_beta_gamma(JammerAllocation({0.0, 0.0}, 1.0), cfg, budget);
  for (std::size_t k = 0; k < 2; ++k) {
    const auto& u = cfg.user(k);
    const double s = u.train_power() * u.train_len();
    CHECK(free_pilots.alpha[k] == doctest::Approx(u.data_power() * s / (1 + s)).epsilon(1e-15));
    CHECK(free_pilots.beta[k] == doctest::Approx(u.data_power() / (1 + s)).epsilon(1e-15));
  }

  const std::vector<double> huge{1e14, 1e14};
  const auto saturated = alpha_beta_gamma(huge, 0.0, cfg, budget);
  CHECK(saturated.gamma == 1.0);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(saturated.alpha[k] < 1e-10);
    CHECK(saturated.beta[k] == doctest::Approx(cfg.user(k).data_power()).epsilon(1e-12));
  }

  Generator gen(17);
  for (int i = 0; i < 200; ++i) {
    const Channel ch = gen.channel();
    const auto t = alpha_beta_gamma(JammerAllocation::from_coordinates(gen.simplex_point(ch.users() + 1)),
                                    ch.config(), JammerBudget(gen.log_uniform(1e-3, 1e5)));
    for (std::size_t k = 0; k < ch.users(); ++k) {
      CHECK(t.beta[k] > 0.0);
      CHECK(t.beta[k] <= ch.data_power[k]);
      CHECK(t.alpha[k] >= 0.0);
      CHECK(t.alpha[k] < ch.data_power[k] * ch.train_power[k] * ch.train_len[k]);
    }
  }
}

TEST_CASE("objective agrees with the reference and with the estimate route") {
  Generator gen(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const Channel ch = gen.channel();
    const SystemConfig cfg = ch.config();
    const double pw = gen.log_uniform(1e-3, 1e6);
    const auto coords = gen.simplex_point(ch.users() + 1);
    const auto alloc = JammerAllocation::from_coordinates(coords);
    const double direct = objective_rho(alloc, cfg, JammerBudget(pw));
    const double composed = objective_rho_from_estimates(alloc, cfg, JammerBudget(pw));
    std::vector<double> zt(alloc.zeta_t().begin(), alloc.zeta_t().end());
    const double reference = jamopt::testing::rho_reference(ch, pw, zt, alloc.zeta_d());
    CHECK(rel_diff(direct, composed) <= 1e-12);
    CHECK(rel_diff(direct, reference) <= 1e-12);
  }
}

TEST_CASE("objective decreases in every coordinate") {
  Generator gen(99);
  for (int trial = 0; trial < 100; ++trial) {
    const Channel ch = gen.channel();
    const SystemConfig cfg = ch.config();
    const JammerBudget budget(gen.log_uniform(1e-2, 1e4));
    const auto x = gen.simplex_point(ch.users() + 1);
    const std::span<const double> zt(x.data(), ch.users());
    const double base = objective_rho(zt, x.back(), cfg, budget);
    for (std::size_t i = 0; i <= ch.users(); ++i) {
      auto y = x;
      y[i] += 1e-3;
      const double bumped = objective_rho(std::span<const double>(y.data(), ch.users()), y.back(), cfg, budget);
      CHECK(bumped < base);
    }
  }
}

TEST_CASE("zero budget leaves the objective flat") {
  Generator gen(5);
  for (int c = 0; c < 10; ++c) {
    const Channel ch = gen.channel();
    const SystemConfig cfg = ch.config();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int i = 0; i < 100; ++i) {
      const double r = objective_rho(JammerAllocation::from_coordinates(gen.simplex_point(ch.users() + 1)), cfg,
                                     JammerBudget(0.0));
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    CHECK(hi - lo < 1e-12);
  }
}

TEST_CASE("decibel conversion") {
  CHECK(db_to_linear(10.0) == 10.0);
  CHECK(db_to_linear(0.0) == 1.0);
  CHECK(db_to_linear(20.0) == doctest::Approx(100.0).epsilon(1e-15));
  CHECK(db_to_linear(-std::numeric_limits<double>::infinity()) == 0.0);
  CHECK(linear_to_db(10.0) == 10.0);
  CHECK(linear_to_db(1.0) == 0.0);
  CHECK(linear_to_db(0.0) == -std::numeric_limits<double>::infinity());
}

}  // TEST_SUITE
