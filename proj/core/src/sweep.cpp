#include "jamopt/sweep.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "jamopt/scenario.hpp"

namespace jamopt {

SweepRow evaluate_point(const SystemConfig& cfg, double pw_db, const MonteCarloSettings& mc) {
  const JammerBudget budget(db_to_linear(pw_db));
  const JammerAllocation unif = uniform_allocation(cfg);

  SweepRow row;
  row.pw_db = pw_db;
  JammerAllocation opt = unif;
  if (budget.avg_power() > 0.0) {
    const SolveResult r = solve_optimal(cfg, budget);
    opt = r.alloc;
    row.method = r.method;
    row.kkt_residual = r.kkt_residual;
  }
  row.zeta_t.assign(opt.zeta_t().begin(), opt.zeta_t().end());
  row.zeta_d = opt.zeta_d();
  row.rho_opt = objective_rho(opt, cfg, budget);
  row.rho_unif = objective_rho(unif, cfg, budget);

  MonteCarloSettings inner = mc;
  inner.workers = 1;
  row.opt = rate_report(opt, cfg, budget, inner);
  row.unif = rate_report(unif, cfg, budget, inner);
  row.rate_reduction_pct = row.unif.r_mc > 0.0 ? 100.0 * (1.0 - row.opt.r_mc / row.unif.r_mc) : 0.0;
  return row;
}

std::vector<SweepRow> run_sweep(const SystemConfig& cfg, const std::vector<double>& grid_db,
                                const MonteCarloSettings& mc, unsigned workers) {
  std::vector<SweepRow> rows(grid_db.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  std::size_t error_index = grid_db.size();

  auto work = [&] {
    for (std::size_t i = next++; i < grid_db.size(); i = next++) {
      try {
        rows[i] = evaluate_point(cfg, grid_db[i], mc);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, grid_db.size())));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  if (error) {
    try {
      std::rethrow_exception(error);
    } catch (const SolverError& ex) {
      throw SolverError(fmt::format("solver failed at P_w = {} dB: {}", grid_db[error_index], ex.what()),
                        ex.last_residual(), ex.iterations());
    }
  }
  return rows;
}

std::vector<std::string> csv_columns(std::size_t users) {
  std::vector<std::string> cols{"pw_db"};
  for (std::size_t k = 1; k <= users; ++k) cols.push_back(fmt::format("zeta_t_{}", k));
  for (const char* c : {"zeta_d", "rho_opt", "rho_unif", "r_lb_opt", "r_mc_opt", "r_mc_hw_opt",
                        "r_ub_opt", "r_lb_unif", "r_mc_unif", "r_mc_hw_unif", "r_ub_unif",
                        "rate_reduction_pct", "method", "kkt_residual"}) {
    cols.emplace_back(c);
  }
  return cols;
}

void write_csv(std::ostream& os, const std::vector<SweepRow>& rows, std::size_t users,
               const std::vector<std::string>& comments) {
  for (const auto& c : comments) fmt::print(os, "# {}\n", c);
  fmt::print(os, "{}\n", fmt::join(csv_columns(users), ","));
  for (const auto& r : rows) {
    fmt::print(os, "{:.17g}", r.pw_db);
    for (double z : r.zeta_t) fmt::print(os, ",{:.17g}", z);
    fmt::print(os, ",{:.17g},{:.17g},{:.17g}", r.zeta_d, r.rho_opt, r.rho_unif);
    for (const RateReport* rep : {&r.opt, &r.unif}) {
      fmt::print(os, ",{:.17g},{:.17g},{:.17g},{:.17g}", rep->r_lb, rep->r_mc, rep->r_mc_halfwidth,
                 rep->r_ub);
    }
    fmt::print(os, ",{:.17g},{},{:.17g}\n", r.rate_reduction_pct, to_string(r.method),
               r.kkt_residual);
  }
}

void write_plot_script(std::ostream& os, const std::string& csv_name, const std::string& stem,
                       std::size_t users) {
  const auto cols = csv_columns(users);
  auto col = [&](const std::string& name) {
    return std::find(cols.begin(), cols.end(), name) - cols.begin() + 1;
  };
  fmt::print(os,
             "# gnuplot script generated by jamopt; run: gnuplot {stem}.plot\n"
             "set datafile separator ','\n"
             "set datafile commentschars '#'\n"
             "set key autotitle columnhead\n"
             "set terminal pngcairo size 900,600\n"
             "set grid\n"
             "set xlabel 'average jamming power P_w (dB)'\n\n"
             "set output '{stem}_rates.png'\n"
             "set ylabel 'ergodic sum-rate (bits/channel use)'\n"
             "plot '{csv}' using {pw}:{a} with lines lw 2 title 'R_{{LB}} optimal', \\\n"
             "     '' using {pw}:{b} with lines lw 2 title 'R optimal', \\\n"
             "     '' using {pw}:{c} with lines lw 2 title 'R_{{UB}} optimal', \\\n"
             "     '' using {pw}:{d} with lines dt 2 lw 2 title 'R_{{LB}} uniform', \\\n"
             "     '' using {pw}:{e} with lines dt 2 lw 2 title 'R uniform', \\\n"
             "     '' using {pw}:{f} with lines dt 2 lw 2 title 'R_{{UB}} uniform'\n\n"
             "set output '{stem}_allocation.png'\n"
             "set ylabel 'fraction of jamming energy'\n"
             "set yrange [0:1]\n",
             fmt::arg("stem", stem), fmt::arg("csv", csv_name), fmt::arg("pw", col("pw_db")),
             fmt::arg("a", col("r_lb_opt")), fmt::arg("b", col("r_mc_opt")),
             fmt::arg("c", col("r_ub_opt")), fmt::arg("d", col("r_lb_unif")),
             fmt::arg("e", col("r_mc_unif")), fmt::arg("f", col("r_ub_unif")));
  fmt::print(os, "plot ");
  for (std::size_t k = 1; k <= users; ++k) {
    fmt::print(os, "'{}' using {}:{} with lines lw 2 title 'zeta_{{t_{}}}', \\\n     ",
               k == 1 ? csv_name : std::string(), col("pw_db"), col(fmt::format("zeta_t_{}", k)), k);
  }
  fmt::print(os, "'' using {}:{} with lines lw 2 title 'zeta_d'\n", col("pw_db"), col("zeta_d"));
}

}  // namespace jamopt
