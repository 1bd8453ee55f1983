#pragma once

#include <span>

#include "odtmip/milp/model.hpp"

namespace odtmip::milp {

/// Best-bound-first branch-and-bound over LP relaxations solved by the
/// built-in simplex. Branches on the most fractional integer variable
/// (lowest id on ties); open nodes with equal bounds are processed in
/// creation order, so the search is deterministic for a fixed config.
///
/// A non-empty `warm_start` must be feasible (ErrorCode::InfeasibleWarmStart
/// otherwise) and seeds the incumbent; the returned objective is never
/// worse than it. When the time limit is reached the best incumbent is
/// returned with status TimeLimit.
Solution solve_bnb(const Model& model, const SolverConfig& config = {},
                   std::span<const double> warm_start = {});

}  // namespace odtmip::milp
