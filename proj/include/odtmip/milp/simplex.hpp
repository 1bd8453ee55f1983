#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "odtmip/milp/model.hpp"

namespace odtmip::milp {

using Clock = std::chrono::steady_clock;

struct LpOptions {
  double feasibility_tolerance = 1e-9;
  double optimality_tolerance = 1e-9;
  double pivot_tolerance = 1e-9;
  /// Consecutive degenerate pivots after which pricing switches from
  /// Dantzig's rule to Bland's rule (until the next non-degenerate step).
  std::size_t degenerate_switch = 25;
  /// Start in Bland's rule and never leave it.
  bool bland_only = false;
  std::size_t max_iterations = 0;  ///< 0 picks a size-based limit
  std::size_t max_tableau_entries = std::size_t{1} << 27;
  std::optional<Clock::time_point> deadline;
};

struct LpResult {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<double> values;
  double objective = kInfinity;
  std::size_t iterations = 0;
  /// The tableau would exceed LpOptions::max_tableau_entries; nothing was solved.
  bool too_large = false;
};

/// Bounded-variable primal simplex on a dense tableau (two phases).
/// Integrality is ignored, so this solves the LP relaxation of `model`
/// under the given bound vectors. The returned point is a basic solution.
LpResult solve_lp_relaxation(const Model& model, std::span<const double> lower,
                             std::span<const double> upper, const LpOptions& options = {});

/// Solves `model` as a linear program; integer and binary variables are
/// treated as continuous within their bounds.
Solution solve_lp_simplex(const Model& model, const SolverConfig& config = {});

}  // namespace odtmip::milp
