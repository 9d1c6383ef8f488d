#pragma once

// Jammer-power sweeps comparing optimal against uniform jamming, and their
// CSV / gnuplot output.

#include <iosfwd>
#include <string>
#include <vector>

#include "jamopt/model.hpp"
#include "jamopt/optimizer.hpp"
#include "jamopt/rates.hpp"

namespace jamopt {

struct SweepRow {
  double pw_db = 0.0;
  std::vector<double> zeta_t;
  double zeta_d = 0.0;
  double rho_opt = 0.0;
  double rho_unif = 0.0;
  RateReport opt;
  RateReport unif;
  double rate_reduction_pct = 0.0;  ///< 100 (1 - r_mc_opt / r_mc_unif), 0 when r_mc_unif = 0
  SolveMethod method = SolveMethod::kkt_active_set;
  double kkt_residual = 0.0;
};

/// Solves for the optimal allocation at pw_db and evaluates both optimal and
/// uniform jamming with the same Monte Carlo seed. Throws SolverError if the
/// solver fails.
SweepRow evaluate_point(const SystemConfig& cfg, double pw_db, const MonteCarloSettings& mc);

/// Evaluates every grid point, in parallel over `workers` threads (0: one
/// per hardware thread). Rows come back in grid order. A failing point
/// rethrows its SolverError with the P_w in the message.
std::vector<SweepRow> run_sweep(const SystemConfig& cfg, const std::vector<double>& grid_db,
                                const MonteCarloSettings& mc, unsigned workers = 0);

/// Header columns in order: pw_db, zeta_t_1..K, zeta_d, rho_opt, rho_unif,
/// r_lb_opt, r_mc_opt, r_mc_hw_opt, r_ub_opt, r_lb_unif, r_mc_unif,
/// r_mc_hw_unif, r_ub_unif, rate_reduction_pct, method, kkt_residual.
std::vector<std::string> csv_columns(std::size_t users);

/// Writes `# key: value` comment lines, the header and one row per point.
/// Reals use 17 significant digits.
void write_csv(std::ostream& os, const std::vector<SweepRow>& rows, std::size_t users,
               const std::vector<std::string>& comments = {});

/// A gnuplot script that reads `csv_name` and renders rate curves (optimal vs
/// uniform, LB/MC/UB) and allocation curves versus P_w.
void write_plot_script(std::ostream& os, const std::string& csv_name, const std::string& stem,
                       std::size_t users);

}  // namespace jamopt
