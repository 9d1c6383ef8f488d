#pragma once

// Scenario files: a small YAML document describing the block structure, the
// users' powers (explicit or as an average budget to be split), the jammer's
// power or sweep range, Monte Carlo settings and an output stem.
//
//   block_len: 100
//   users:
//     - {train_len: 1, avg_power_db: 5}
//     - {train_len: 1, train_power_db: 12, data_power_db: 9}
//   jammer:
//     sweep: {min_db: -10, max_db: 60, step_db: 1}   # or: power_db: 10
//   mc: {samples: 200000, seed: 1}
//   output: fig2
//
// Unknown keys are errors. data_power_db may be -.inf for a silent user and
// jammer power_db may be -.inf for P_w = 0.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "jamopt/model.hpp"
#include "jamopt/rates.hpp"

namespace jamopt {

/// Parse or validation failure, with the 1-based line of the offending node
/// when it is known (0 otherwise) and the dotted field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string message, std::string field, int line);
  const std::string& message() const noexcept { return message_; }
  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  std::string message_;
  std::string field_;
  int line_;
};

struct ExplicitPower {
  double train_power_db;
  double data_power_db;
  friend bool operator==(const ExplicitPower&, const ExplicitPower&) = default;
};

struct BudgetPower {
  double avg_power_db;
  friend bool operator==(const BudgetPower&, const BudgetPower&) = default;
};

struct UserSpec {
  int train_len = 1;
  std::variant<ExplicitPower, BudgetPower> power;
  friend bool operator==(const UserSpec&, const UserSpec&) = default;
};

struct SweepRange {
  double min_db;
  double max_db;
  double step_db;
  /// min_db + i * step_db for every i that stays within max_db (plus a
  /// 1e-9 step slack against rounding).
  std::vector<double> grid() const;
  friend bool operator==(const SweepRange&, const SweepRange&) = default;
};

struct ScenarioSpec {
  int block_len = 0;
  std::vector<UserSpec> users;
  std::variant<double, SweepRange> jammer{0.0};
  MonteCarloSettings mc;
  std::string output;

  bool has_sweep() const noexcept { return std::holds_alternative<SweepRange>(jammer); }
  /// Jammer power grid in dB: the sweep grid, or the single fixed power.
  std::vector<double> jammer_grid_db() const;

  /// Builds the validated system, splitting budget-form users with
  /// budget_split. Throws ConfigError naming the violated invariant.
  SystemConfig system() const;

  friend bool operator==(const ScenarioSpec& a, const ScenarioSpec& b);
};

ScenarioSpec parse_scenario(std::string_view text, const std::string& source = "<string>");
ScenarioSpec load_scenario(const std::filesystem::path& path);
std::string serialize_scenario(const ScenarioSpec& spec);

enum class SplitMode {
  /// Maximize the user's own jamming-free lower bound.
  lower_bound,
  /// Same power on pilots and data: P_t = P_d = avg_power.
  equal_power,
};

struct PowerSplit {
  double train_power;
  double data_power;
  double train_fraction;  ///< share of the block energy spent on pilots
};

/// Splits an average per-symbol budget between pilots and data under
/// P_t T_t + P_d T_d = avg_power * T. In lower_bound mode the pilot energy
/// fraction maximizes T_d/T log2(1 + rho_k e^-kappa) with
/// rho_k = P_d s / (1 + s + P_d), s = P_t T_t, found by a bracketed 1-D
/// minimizer. This is a stand-in for a full multiuser training design.
PowerSplit budget_split(double avg_power, int train_len, int block_len, int data_len,
                        SplitMode mode = SplitMode::lower_bound);

/// The single-user objective maximized by budget_split, as a function of the
/// pilot energy fraction. Exposed for tests.
double split_objective(double train_fraction, double avg_power, int block_len, int data_len);

/// Uniform-in-time jamming: zeta_t_k = T_t_k / T, zeta_d = T_d / T, i.e. the
/// same jamming power on every symbol.
JammerAllocation uniform_allocation(const SystemConfig& cfg);

/// Reads an explicit allocation file: `zeta_t: [..]` and `zeta_d: x`.
JammerAllocation load_allocation(const std::filesystem::path& path);

}  // namespace jamopt
