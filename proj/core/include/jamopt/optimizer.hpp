#pragma once

// Minimization of rho over the allocation simplex
//
//   min rho(zeta_t_1..K, zeta_d)  s.t.  zeta >= 0,  sum(zeta) = 1
//
// by several independent routes: an exact active-set KKT solver, the
// closed-form interior solution, the P_w -> infinity limit, a projected
// gradient method and a brute-force oracle. Every route reports a KKT
// certificate so results can be compared on equal terms.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "jamopt/model.hpp"

namespace jamopt {

enum class SolveMethod { kkt_active_set, closed_form, asymptotic, oracle, projected_descent };

std::string_view to_string(SolveMethod m);

/// Coordinates at or below this value are treated as sitting on the boundary.
inline constexpr double kActiveTolerance = 1e-9;

/// Multipliers and residuals of the first-order conditions at a point.
///
/// With g = grad rho, nu is the common value of -g over the positive
/// coordinates and lambda_i = g_i + nu. Stationarity, dual feasibility and
/// complementary slackness violations are relative to nu (absolute when
/// nu = 0), so the residual is comparable across budgets spanning many
/// decades.
struct KktCertificate {
  double nu = 0.0;
  std::vector<double> lambdas;  ///< K training multipliers, then the data multiplier
  double feasibility = 0.0;     ///< max(|sum - 1|, max negative part)
  double stationarity = 0.0;    ///< spread of g_i + nu over positive coordinates
  double dual = 0.0;            ///< max negative part of lambda over boundary coordinates
  double complementarity = 0.0; ///< max |lambda_i * zeta_i|
  double residual() const noexcept;
};

struct SolveResult {
  JammerAllocation alloc;
  double rho_star = 0.0;
  double nu_star = 0.0;
  std::vector<double> lambdas;
  std::vector<bool> at_zero;  ///< K+1 flags, true where the coordinate is on the boundary
  SolveMethod method = SolveMethod::kkt_active_set;
  double kkt_residual = 0.0;
  int iterations = 0;
};

/// Raised when an iterative solver fails to reach its tolerance.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double last_residual, int iterations)
      : std::runtime_error(what), last_residual_(last_residual), iterations_(iterations) {}
  double last_residual() const noexcept { return last_residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double last_residual_;
  int iterations_;
};

/// rho and its gradient in the reduced form
///
///   rho = A / (1 + sum P_d + a z / T_d - A),   A = sum_k c_k / (a x_k + e_k)
///
/// with a = P_w T, c_k = P_d P_t T_t^2, e_k = T_t (1 + P_t T_t). Used by the
/// iterative solvers; cheaper than the alpha/beta/gamma route.
class RhoKernel {
 public:
  RhoKernel(const SystemConfig& cfg, JammerBudget budget);

  std::size_t dim() const noexcept { return c_.size() + 1; }
  double value(std::span<const double> coords) const;
  /// Writes d rho / d coords into grad and returns rho.
  double gradient(std::span<const double> coords, std::span<double> grad) const;

  double energy() const noexcept { return energy_; }
  double data_len() const noexcept { return data_len_; }
  std::span<const double> c() const noexcept { return c_; }
  std::span<const double> e() const noexcept { return e_; }
  double offset() const noexcept { return offset_; }

 private:
  std::vector<double> c_;
  std::vector<double> e_;
  double energy_;
  double data_len_;
  double offset_;  // 1 + sum P_d
};

/// Evaluates the stationarity conditions term by term from alpha, beta and
/// gamma and derives multipliers and residuals.
KktCertificate kkt_certificate(const JammerAllocation& alloc, const SystemConfig& cfg,
                               JammerBudget budget);

/// Right-hand sides of the optimality equations for training coordinates and
/// for the data coordinate, given a multiplier nu. At a KKT point with
/// multiplier nu these reproduce the allocation itself.
std::vector<double> optimality_fixed_point(const JammerAllocation& alloc, double nu,
                                           const SystemConfig& cfg, JammerBudget budget);

/// Packages an allocation with its objective value and KKT certificate.
SolveResult certify(const JammerAllocation& alloc, SolveMethod method, int iterations,
                    const SystemConfig& cfg, JammerBudget budget);

struct KktOptions {
  double tol = 1e-10;
  int max_outer = 500;
};

/// Exact solver. For a fixed data fraction the training sub-problem is a
/// separable convex water-filling with closed-form levels; the data fraction
/// is then located by bisection on the sign of the directional derivative
/// along the data coordinate. Throws std::invalid_argument if P_w = 0 and
/// SolverError if the certificate misses opts.tol.
SolveResult solve_kkt(const SystemConfig& cfg, JammerBudget budget, const KktOptions& opts = {});

/// Closed-form interior optimum. std::nullopt when any coordinate would be
/// non-positive, i.e. the budget is too small for every phase to be jammed.
std::optional<SolveResult> solve_closed_form(const SystemConfig& cfg, JammerBudget budget);

/// P_w that makes the closed-form data fraction exactly zero:
/// (T_d (1 + sum P_d) - T_t - sum P_t T_t^2) / T. May be negative.
double closed_form_data_threshold(const SystemConfig& cfg);

/// Limit of the optimum as P_w grows without bound: half the energy on data,
/// the rest split in proportion to T_t_k sqrt(P_t_k P_d_k).
JammerAllocation solve_asymptotic(const SystemConfig& cfg);

struct OracleOptions {
  double grid_step = 1e-3;
  /// Resource guard on the number of simplex grid points.
  std::uint64_t max_grid_points = 400'000'000;
  /// Random simplex samples for K > 3.
  std::uint64_t random_samples = 200'000;
  std::uint64_t seed = 7;
  bool polish = true;
};

struct OracleResult {
  SolveResult best;
  std::uint64_t points = 0;   ///< objective evaluations in the search phase
  double search_min = 0.0;    ///< lowest rho seen during the search
  double search_max = 0.0;    ///< highest rho seen during the search
  double spread() const noexcept { return search_max - search_min; }
};

/// Brute-force minimizer: full simplex grid for K <= 3, Dirichlet random
/// search for larger K, then pairwise coordinate polishing. Accepts P_w = 0.
/// Throws std::length_error when the grid exceeds opts.max_grid_points.
OracleResult solve_oracle(const SystemConfig& cfg, JammerBudget budget,
                          const OracleOptions& opts = {});

struct DescentOptions {
  double tol = 1e-10;
  int max_iterations = 20'000;
  std::uint64_t seed = 11;
};

/// Spectral projected gradient with nonmonotone Armijo backtracking and exact
/// Euclidean projection onto the simplex, restarted from five points
/// (uniform, all-training, all-data, asymptotic, random). Returns the best.
SolveResult solve_projected_descent(const SystemConfig& cfg, JammerBudget budget,
                                    const DescentOptions& opts = {});

/// Single descent run from a given start; used for warm-start checks.
SolveResult solve_projected_descent_from(const SystemConfig& cfg, JammerBudget budget,
                                         const JammerAllocation& start,
                                         const DescentOptions& opts = {});

/// Closed form when it is interior and certifies, else the KKT solver.
SolveResult solve_optimal(const SystemConfig& cfg, JammerBudget budget,
                          const KktOptions& opts = {});

/// Euclidean projection of v onto the probability simplex.
std::vector<double> project_to_simplex(std::span<const double> v);

enum class Corollary { data_power = 1, train_power = 2, train_len = 3 };

struct OrderingVerdict {
  Corollary corollary;
  std::size_t larger;   ///< user with the larger distinguishing parameter
  std::size_t smaller;
  bool passed;
};

/// For every user pair that differs in exactly one of (P_d, P_t, T_t), checks
/// that the user with the larger value receives at least as much training
/// jamming energy.
std::vector<OrderingVerdict> check_corollary_orderings(const SolveResult& result,
                                                       const SystemConfig& cfg);

}  // namespace jamopt
