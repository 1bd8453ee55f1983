#include "odtmip/milp/bnb.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "odtmip/error.hpp"
#include "odtmip/milp/simplex.hpp"

namespace odtmip::milp {
namespace {

struct Node {
  std::vector<double> lower;
  std::vector<double> upper;
  double bound = -kInfinity;
  std::size_t id = 0;
};

struct WorseNode {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

double prune_tolerance(const SolverConfig& config, double incumbent) {
  if (!std::isfinite(incumbent)) return 0.0;
  return std::max(config.absolute_gap, config.relative_gap * std::abs(incumbent));
}

// Most fractional integer variable; ties resolved by lowest id.
std::ptrdiff_t branching_variable(const Model& model, const std::vector<double>& values,
                                  double tolerance) {
  std::ptrdiff_t best = -1;
  double best_score = tolerance;
  const auto& vars = model.variables();
  for (std::size_t j = 0; j < vars.size(); ++j) {
    if (!vars[j].is_integral()) continue;
    const double frac = values[j] - std::floor(values[j]);
    const double score = std::min(frac, 1.0 - frac);
    if (score > best_score + 1e-12) {
      best_score = score;
      best = static_cast<std::ptrdiff_t>(j);
    }
  }
  return best;
}

}  // namespace

Solution solve_bnb(const Model& model, const SolverConfig& config,
                   std::span<const double> warm_start) {
  config.validate();
  const auto start = Clock::now();
  std::optional<Clock::time_point> deadline;
  if (std::isfinite(config.time_limit_seconds)) {
    deadline = start + std::chrono::duration_cast<Clock::duration>(
                           std::chrono::duration<double>(config.time_limit_seconds));
  }

  Solution result;
  double incumbent = kInfinity;
  if (!warm_start.empty()) {
    const auto report = check_feasible(model, warm_start, 1e-6, config.integrality_tolerance);
    if (!report.empty()) {
      throw Error(ErrorCode::InfeasibleWarmStart,
                  "warm start violates " + std::to_string(report.size()) +
                      " constraint(s), bound(s) or integrality requirement(s)");
    }
    result.values.assign(warm_start.begin(), warm_start.end());
    incumbent = model.evaluate_objective(result.values);
    result.from_warm_start = true;
  }

  LpOptions lp_options;
  lp_options.deadline = deadline;
  lp_options.max_tableau_entries = config.max_tableau_entries;

  std::priority_queue<Node, std::vector<Node>, WorseNode> open;
  {
    Node root;
    for (const auto& v : model.variables()) {
      double lo = v.lower;
      double hi = v.upper;
      if (v.is_integral()) {
        lo = std::isfinite(lo) ? std::ceil(lo - config.integrality_tolerance) : lo;
        hi = std::isfinite(hi) ? std::floor(hi + config.integrality_tolerance) : hi;
      }
      root.lower.push_back(lo);
      root.upper.push_back(hi);
    }
    open.push(std::move(root));
  }

  std::size_t next_id = 1;
  bool hit_time_limit = false;
  bool hit_node_limit = false;
  bool unbounded = false;

  while (!open.empty()) {
    if (deadline && Clock::now() > *deadline) {
      hit_time_limit = true;
      break;
    }
    if (result.nodes >= config.max_nodes) {
      hit_node_limit = true;
      break;
    }
    if (open.top().bound >= incumbent - prune_tolerance(config, incumbent)) {
      // Best-first: every remaining node is dominated as well.
      while (!open.empty()) open.pop();
      break;
    }
    Node node = open.top();
    open.pop();
    ++result.nodes;

    const LpResult lp = solve_lp_relaxation(model, node.lower, node.upper, lp_options);
    result.lp_iterations += lp.iterations;
    if (lp.status == SolveStatus::TimeLimit) {
      open.push(std::move(node));
      hit_time_limit = true;
      break;
    }
    if (lp.status == SolveStatus::Infeasible) continue;
    if (lp.status == SolveStatus::Unbounded) {
      if (result.values.empty()) unbounded = true;
      continue;
    }
    const double bound = lp.objective;
    if (bound >= incumbent - prune_tolerance(config, incumbent)) continue;

    const auto branch = branching_variable(model, lp.values, config.integrality_tolerance);
    if (branch < 0) {
      std::vector<double> values = lp.values;
      const auto& vars = model.variables();
      for (std::size_t j = 0; j < vars.size(); ++j) {
        if (vars[j].is_integral()) values[j] = std::round(values[j]);
      }
      const double objective = model.evaluate_objective(values);
      if (objective < incumbent - 1e-9) {
        incumbent = objective;
        result.values = std::move(values);
        result.from_warm_start = false;
      }
      continue;
    }

    const auto j = static_cast<std::size_t>(branch);
    const double x = lp.values[j];
    Node down{node.lower, node.upper, bound, next_id++};
    down.upper[j] = std::floor(x);
    Node up{std::move(node.lower), std::move(node.upper), bound, next_id++};
    up.lower[j] = std::ceil(x);
    open.push(std::move(down));
    open.push(std::move(up));
  }

  double open_bound = kInfinity;
  if (!open.empty()) open_bound = open.top().bound;
  result.objective = result.values.empty() ? kInfinity : incumbent;
  result.best_bound = std::min(open_bound, result.objective);

  if (unbounded && result.values.empty()) {
    result.status = SolveStatus::Unbounded;
    result.best_bound = -kInfinity;
    return result;
  }
  const bool closed = open.empty() ||
                      (!result.values.empty() &&
                       result.objective - result.best_bound <= prune_tolerance(config, incumbent));
  if (hit_time_limit && !closed) {
    result.status = SolveStatus::TimeLimit;
  } else if (hit_node_limit && !closed) {
    result.status = result.values.empty() ? SolveStatus::TimeLimit : SolveStatus::Feasible;
  } else {
    result.status = result.values.empty() ? SolveStatus::Infeasible : SolveStatus::Optimal;
    if (!result.values.empty()) result.best_bound = std::min(result.best_bound, result.objective);
  }
  if (result.status == SolveStatus::Infeasible) result.best_bound = kInfinity;
  return result;
}

}  // namespace odtmip::milp
