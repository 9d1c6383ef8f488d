#include "cli/commands.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include "jamopt/model.hpp"
#include "jamopt/optimizer.hpp"
#include "jamopt/rates.hpp"
#include "jamopt/scenario.hpp"
#include "jamopt/sweep.hpp"

namespace jamopt::cli {

namespace {

// Raised for command-line misuse that is not a parse error of the scenario.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double resolve_pw_db(const ScenarioSpec& spec, const std::optional<double>& override_db) {
  if (override_db) return *override_db;
  if (spec.has_sweep()) {
    throw UsageError("scenario defines a P_w sweep; pass --pw-db to pick a single point");
  }
  return std::get<double>(spec.jammer);
}

std::string fmt_db(double db) {
  return std::isinf(db) ? std::string("-inf") : fmt::format("{:g}", db);
}

void print_allocation(std::ostream& out, const JammerAllocation& alloc) {
  for (std::size_t k = 0; k < alloc.num_users(); ++k) {
    fmt::print(out, "zeta_t_{}: {:.12g}\n", k + 1, alloc.zeta_t(k));
  }
  fmt::print(out, "zeta_d: {:.12g}\n", alloc.zeta_d());
}

void write_allocation_file(const std::filesystem::path& path, const JammerAllocation& alloc) {
  std::ofstream f(path);
  if (!f) throw UsageError("cannot write " + path.string());
  fmt::print(f, "zeta_t: [{:.17g}]\nzeta_d: {:.17g}\n", fmt::join(alloc.zeta_t(), ", "),
             alloc.zeta_d());
}

int cmd_optimize(const std::string& path, const std::optional<double>& pw_db,
                 const std::string& out_file, std::ostream& out) {
  const ScenarioSpec spec = load_scenario(path);
  const SystemConfig cfg = spec.system();
  const double db = resolve_pw_db(spec, pw_db);
  const JammerBudget budget(db_to_linear(db));
  const SolveResult r = solve_optimal(cfg, budget);

  fmt::print(out, "users: {}  block_len: {}  data_len: {}\n", cfg.num_users(), cfg.block_len(),
             cfg.data_len());
  fmt::print(out, "P_w: {} dB ({:.12g} linear)\n", fmt_db(db), budget.avg_power());
  fmt::print(out, "method: {}\n", to_string(r.method));
  print_allocation(out, r.alloc);
  fmt::print(out, "rho*: {:.12g}\n", r.rho_star);
  fmt::print(out, "nu*: {:.12g}\n", r.nu_star);
  std::vector<std::string> zero;
  for (std::size_t i = 0; i < r.at_zero.size(); ++i) {
    if (r.at_zero[i]) {
      zero.push_back(i < cfg.num_users() ? fmt::format("zeta_t_{}", i + 1) : "zeta_d");
    }
  }
  fmt::print(out, "at_zero: [{}]\n", fmt::join(zero, ", "));
  fmt::print(out, "kkt_residual: {:.3e}\n", r.kkt_residual);
  fmt::print(out, "iterations: {}\n", r.iterations);
  for (const auto& v : check_corollary_orderings(r, cfg)) {
    fmt::print(out, "ordering corollary {}: user {} >= user {}: {}\n", static_cast<int>(v.corollary),
               v.larger + 1, v.smaller + 1, v.passed ? "pass" : "FAIL");
  }
  if (!out_file.empty()) write_allocation_file(out_file, r.alloc);
  return kOk;
}

int cmd_rates(const std::string& path, const std::string& alloc_choice,
              const std::optional<double>& pw_db, std::ostream& out) {
  const ScenarioSpec spec = load_scenario(path);
  const SystemConfig cfg = spec.system();
  const double db = resolve_pw_db(spec, pw_db);
  const JammerBudget budget(db_to_linear(db));

  std::optional<JammerAllocation> alloc;
  if (alloc_choice == "uniform") {
    alloc = uniform_allocation(cfg);
  } else if (alloc_choice == "optimal") {
    // With no budget every allocation is optimal; report the uniform one.
    alloc = budget.avg_power() > 0.0 ? solve_optimal(cfg, budget).alloc : uniform_allocation(cfg);
  } else if (alloc_choice.starts_with("file:")) {
    alloc = load_allocation(alloc_choice.substr(5));
    if (alloc->num_users() != cfg.num_users()) {
      throw ConfigError(fmt::format("allocation has {} training coordinates, scenario has {} users",
                                    alloc->num_users(), cfg.num_users()),
                        "zeta_t", 0);
    }
  } else {
    throw UsageError("--alloc must be uniform, optimal or file:PATH");
  }

  const RateReport rep = rate_report(*alloc, cfg, budget, spec.mc);
  fmt::print(out, "P_w: {} dB\n", fmt_db(db));
  fmt::print(out, "allocation: {}\n", alloc_choice);
  print_allocation(out, *alloc);
  fmt::print(out, "R_LB: {:.12g}\n", rep.r_lb);
  fmt::print(out, "R_MC: {:.12g} +/- {:.6g}\n", rep.r_mc, rep.r_mc_halfwidth);
  fmt::print(out, "R_UB: {:.12g}\n", rep.r_ub);
  return kOk;
}

std::vector<std::string> csv_comments(const ScenarioSpec& spec, const SystemConfig& cfg) {
  std::vector<std::string> c;
  c.push_back("jamopt sweep: optimal vs uniform jamming energy allocation");
  c.push_back(fmt::format("block_len: {}  data_len: {}  users: {}", cfg.block_len(), cfg.data_len(),
                          cfg.num_users()));
  for (std::size_t k = 0; k < cfg.num_users(); ++k) {
    const auto& u = cfg.user(k);
    const bool budget_form = std::holds_alternative<BudgetPower>(spec.users[k].power);
    c.push_back(fmt::format("user {}: train_len {}  train_power {:.17g}  data_power {:.17g}{}", k + 1,
                            u.train_len(), u.train_power(), u.data_power(),
                            budget_form ? "  (split from avg budget)" : ""));
  }
  if (std::any_of(spec.users.begin(), spec.users.end(),
                  [](const UserSpec& u) { return std::holds_alternative<BudgetPower>(u.power); })) {
    c.push_back(
        "budget split: each user maximizes its own jamming-free rate lower bound; a stand-in for a "
        "joint multiuser training design, not a reproduction of one");
  }
  c.push_back(fmt::format("mc_samples: {}  mc_seed: {}", spec.mc.samples, spec.mc.seed));
  return c;
}

int cmd_sweep(const std::string& path, const std::string& stem_override, unsigned workers,
              std::ostream& out) {
  const ScenarioSpec spec = load_scenario(path);
  if (!spec.has_sweep()) throw UsageError("scenario has no jammer.sweep range");
  const SystemConfig cfg = spec.system();
  const std::string stem = stem_override.empty() ? spec.output : stem_override;

  const auto rows = run_sweep(cfg, spec.jammer_grid_db(), spec.mc, workers);

  const std::filesystem::path csv_path = stem + ".csv";
  const std::filesystem::path plot_path = stem + ".plot";
  {
    std::ofstream f(csv_path, std::ios::binary);
    if (!f) throw UsageError("cannot write " + csv_path.string());
    write_csv(f, rows, cfg.num_users(), csv_comments(spec, cfg));
  }
  {
    std::ofstream f(plot_path, std::ios::binary);
    if (!f) throw UsageError("cannot write " + plot_path.string());
    write_plot_script(f, csv_path.filename().string(), std::filesystem::path(stem).filename().string(),
                      cfg.num_users());
  }
  double peak = 0.0;
  for (const auto& r : rows) peak = std::max(peak, r.rate_reduction_pct);
  fmt::print(out, "points: {}\n", rows.size());
  fmt::print(out, "peak rate reduction: {:.2f} %\n", peak);
  fmt::print(out, "wrote {} and {}\n", csv_path.string(), plot_path.string());
  return kOk;
}

int cmd_oracle_check(const std::string& path, const std::optional<double>& pw_db, double grid,
                     std::ostream& out) {
  constexpr double kAgreement = 1e-4;
  const ScenarioSpec spec = load_scenario(path);
  const SystemConfig cfg = spec.system();
  const std::vector<double> points = pw_db ? std::vector<double>{*pw_db} : spec.jammer_grid_db();

  OracleOptions opts;
  opts.grid_step = grid;
  double worst = 0.0;
  for (double db : points) {
    const JammerBudget budget(db_to_linear(db));
    const OracleResult oracle = solve_oracle(cfg, budget, opts);
    if (budget.avg_power() == 0.0) {
      fmt::print(out, "P_w {:>6} dB  flat objective, spread {:.3e}\n", fmt_db(db), oracle.spread());
      worst = std::max(worst, oracle.spread());
      continue;
    }
    const SolveResult solver = solve_optimal(cfg, budget);
    const double diff = solver.rho_star - oracle.best.rho_star;
    worst = std::max(worst, std::abs(diff));
    fmt::print(out, "P_w {:>6} dB  rho_solver {:.12g}  rho_oracle {:.12g}  diff {:+.3e}\n", fmt_db(db),
               solver.rho_star, oracle.best.rho_star, diff);
  }
  const bool ok = worst <= kAgreement;
  fmt::print(out, "max |diff|: {:.3e} ({})\n", worst, ok ? "agree" : "DISAGREE");
  return ok ? kOk : kSolverFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal jamming energy allocation for training-based multiple access channels",
               "jamopt"};
  app.require_subcommand(1);

  std::string scenario;
  std::optional<double> pw_db;
  std::string out_file;
  std::string alloc_choice;
  std::string stem;
  unsigned workers = 0;
  double grid = 1e-3;

  auto* optimize = app.add_subcommand("optimize", "Solve for the optimal allocation at one P_w");
  optimize->add_option("scenario", scenario, "Scenario file")->required();
  optimize->add_option("--pw-db", pw_db, "Jammer average power in dB (overrides the scenario)");
  optimize->add_option("--out", out_file, "Write the allocation to this file");

  auto* rates = app.add_subcommand("rates", "Report R_LB, Monte Carlo R and R_UB");
  rates->add_option("scenario", scenario, "Scenario file")->required();
  rates->add_option("--alloc", alloc_choice, "uniform | optimal | file:PATH")->required();
  rates->add_option("--pw-db", pw_db, "Jammer average power in dB (overrides the scenario)");

  auto* sweep = app.add_subcommand("sweep", "Sweep P_w and write <stem>.csv and <stem>.plot");
  sweep->add_option("scenario", scenario, "Scenario file")->required();
  sweep->add_option("--output", stem, "Output stem (overrides the scenario)");
  sweep->add_option("--workers", workers, "Worker threads (0: one per hardware thread)");

  auto* oracle = app.add_subcommand("oracle-check", "Compare the solver with the brute-force oracle");
  oracle->add_option("scenario", scenario, "Scenario file")->required();
  oracle->add_option("--pw-db", pw_db, "Check a single P_w instead of the scenario's grid");
  oracle->add_option("--grid", grid, "Oracle simplex grid step");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kConfigError;
  }

  try {
    if (optimize->parsed()) return cmd_optimize(scenario, pw_db, out_file, out);
    if (rates->parsed()) return cmd_rates(scenario, alloc_choice, pw_db, out);
    if (sweep->parsed()) return cmd_sweep(scenario, stem, workers, out);
    if (oracle->parsed()) return cmd_oracle_check(scenario, pw_db, grid, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << " (residual " << e.last_residual() << ")\n";
    return kSolverFailure;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::length_error& e) {
    err << "resource limit: " << e.what() << "\n";
    return kConfigError;
  }
  return kConfigError;
}

}  // namespace jamopt::cli
