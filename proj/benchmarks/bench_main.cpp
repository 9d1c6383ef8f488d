#include <benchmark/benchmark.h>

#include "jamopt/model.hpp"
#include "jamopt/optimizer.hpp"
#include "jamopt/rates.hpp"
#include "jamopt/scenario.hpp"

using namespace jamopt;

namespace {

// K users with spread-out powers, one pilot each.
SystemConfig users(std::size_t k) {
  std::vector<UserParams> list;
  for (std::size_t i = 0; i < k; ++i) {
    const double p = 2.0 + 3.0 * static_cast<double>(i);
    list.emplace_back(p, 2.0 * p, 1);
  }
  return SystemConfig(static_cast<int>(10 * k + 50), list);
}

void BM_Objective(benchmark::State& state) {
  const auto cfg = users(static_cast<std::size_t>(state.range(0)));
  const auto alloc = uniform_allocation(cfg);
  for (auto _ : state) benchmark::DoNotOptimize(objective_rho(alloc, cfg, JammerBudget(5.0)));
}
BENCHMARK(BM_Objective)->Arg(1)->Arg(4)->Arg(16)->Arg(64);

void BM_SolveKkt(benchmark::State& state) {
  const auto cfg = users(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_kkt(cfg, JammerBudget(5.0)));
}
BENCHMARK(BM_SolveKkt)->Arg(1)->Arg(4)->Arg(16)->Arg(64);

void BM_ProjectedDescent(benchmark::State& state) {
  const auto cfg = users(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_projected_descent(cfg, JammerBudget(5.0)));
}
BENCHMARK(BM_ProjectedDescent)->Arg(4)->Arg(16);

void BM_MonteCarlo(benchmark::State& state) {
  const auto cfg = users(4);
  const auto alloc = uniform_allocation(cfg);
  MonteCarloSettings mc;
  mc.samples = static_cast<std::uint64_t>(state.range(0));
  mc.workers = 1;
  for (auto _ : state) benchmark::DoNotOptimize(sum_rate_mc(alloc, cfg, JammerBudget(5.0), mc));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MonteCarlo)->Arg(10'000)->Arg(200'000)->Unit(benchmark::kMillisecond);

void BM_OracleGrid(benchmark::State& state) {
  const auto cfg = users(2);
  OracleOptions opts;
  opts.grid_step = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_oracle(cfg, JammerBudget(5.0), opts));
}
BENCHMARK(BM_OracleGrid)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
