#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mhc/constraints.hpp"

namespace mhc {

/// min q.b subject to `constraints`, 0 <= b <= 1 (binary for solve_binary).
struct LpProblem {
  std::vector<double> objective;
  std::vector<LinearConstraint> constraints;
  /// -1 free, 0 or 1 fixed.
  std::vector<std::int8_t> fixed;

  explicit LpProblem(std::vector<double> q = {});
  int size() const noexcept { return static_cast<int>(objective.size()); }
  void fix(int var, int value) { fixed[static_cast<std::size_t>(var)] = static_cast<std::int8_t>(value); }
  /// Throws unless every term references a declared variable once with a
  /// nonzero coefficient.
  void validate() const;
};

enum class SolveStatus : std::uint8_t { optimal, infeasible, iteration_limit, node_limit };

struct Solution {
  SolveStatus status = SolveStatus::optimal;
  std::vector<double> values;
  double objective = 0.0;
  /// Constraint index with a positive phase-1 artificial when infeasible.
  int infeasible_row = -1;
  /// Branch-and-bound nodes solved (1 for a pure relaxation).
  long nodes = 0;

  /// An assignment is available: optimal, or the incumbent at the node limit.
  bool ok() const noexcept {
    return status == SolveStatus::optimal || (status == SolveStatus::node_limit && !values.empty());
  }
  std::vector<std::uint8_t> binary() const;
};

struct SolverConfig {
  long iteration_limit = 1'000'000;
  long node_limit = 100'000;
  /// Exact rational pivoting up to this many free variables, doubles above.
  int exact_limit = 5000;
  double tolerance = 1e-9;
  /// Pivots between refactorizations of the basis inverse in double mode.
  int refactor_every = 64;
  /// Triangle rows enter the LP only once violated.
  bool lazy_triangles = true;
};

Solution solve_relaxation(const LpProblem& p, const SolverConfig& config = {});
Solution solve_binary(const LpProblem& p, const SolverConfig& config = {});
/// Lexicographically smallest optimal assignment by full enumeration.
Solution brute_force(const LpProblem& p);

/// q.b summed in variable order.
double objective_value(const LpProblem& p, std::span<const double> values);
/// Exact integer check of a 0/1 assignment against constraints and fixings.
bool is_feasible(const LpProblem& p, std::span<const std::uint8_t> b);
/// True if every value is exactly 0 or 1.
bool is_integral(std::span<const double> values);

}  // namespace mhc
