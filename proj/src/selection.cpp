#include "odtmip/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "internal/parallel.hpp"
#include "odtmip/error.hpp"
#include "odtmip/milp/bnb.hpp"
#include "odtmip/milp/model.hpp"
#include "odtmip/milp/simplex.hpp"

namespace odtmip {
namespace {

using internal::parallel_for;
using milp::Model;
using milp::Sense;
using milp::Term;
using milp::VarId;
using milp::VarKind;

constexpr double kOne = 1.0 - 1e-9;
constexpr double kWeightFloor = 1e-12;

milp::LpResult solve_lp(const Model& model) {
  std::vector<double> lower;
  std::vector<double> upper;
  for (const auto& v : model.variables()) {
    lower.push_back(v.lower);
    upper.push_back(v.upper);
  }
  auto result = milp::solve_lp_relaxation(model, lower, upper);
  if (result.status != milp::SolveStatus::Optimal) {
    throw Error(ErrorCode::SolverFailure,
                std::string("selection LP ended with status ") + milp::to_string(result.status));
  }
  return result;
}

// Rows b x_j - sum lambda_i x_i within +-eps' (or equal when eps' = 0).
void add_expression_rows(Model& model, const Dataset& data, std::span<const std::size_t> cluster,
                         std::size_t j, VarId b, const std::vector<std::pair<std::size_t, VarId>>& lambda,
                         double eps_prime) {
  const auto xj = data.row(cluster[j]);
  for (std::size_t k = 0; k < data.dims; ++k) {
    std::vector<Term> terms{{b, xj[k]}};
    for (const auto& [pos, var] : lambda) terms.push_back({var, -data.at(cluster[pos], k)});
    if (eps_prime == 0.0) {
      model.add_constraint("", terms, Sense::Equal, 0.0);
    } else {
      model.add_constraint("", terms, Sense::LessEqual, eps_prime);
      model.add_constraint("", std::move(terms), Sense::GreaterEqual, -eps_prime);
    }
  }
  std::vector<Term> sum{{b, -1.0}};
  for (const auto& [pos, var] : lambda) sum.push_back({var, 1.0});
  model.add_constraint("", std::move(sum), Sense::Equal, 0.0);
}

std::vector<std::size_t> complement(std::size_t n, const std::vector<std::size_t>& sorted) {
  std::vector<std::size_t> out;
  std::size_t k = 0;
  for (std::size_t p = 0; p < n; ++p) {
    if (k < sorted.size() && sorted[k] == p) {
      ++k;
    } else {
      out.push_back(p);
    }
  }
  return out;
}

}  // namespace

void SelectionParams::validate(std::size_t dims) const {
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "beta1 and beta2 must lie in (0, 1)");
  }
  if (!(beta2 < static_cast<double>(dims + 1) * (1.0 - beta1))) {
    throw Error(ErrorCode::InvalidArgument, "need beta2 < (d + 1)(1 - beta1)");
  }
  if (!(eps_prime >= 0.0 && eps_prime <= 0.5)) {
    throw Error(ErrorCode::InvalidArgument, "eps' must lie in [0, 0.5]");
  }
}

std::vector<std::size_t> SelectionResult::selected_rows() const {
  std::vector<std::size_t> rows;
  rows.reserve(selected.size());
  for (const std::size_t p : selected) rows.push_back(members[p]);
  return rows;
}

PointExpression selection_lp_point(const Dataset& data, std::span<const std::size_t> cluster,
                                   std::size_t j, double eps_prime,
                                   const std::vector<bool>& allowed) {
  if (j >= cluster.size()) throw Error(ErrorCode::InvalidArgument, "point outside cluster");
  Model model;
  const VarId b = model.add_variable("", VarKind::Continuous, 0.0, 1.0, -1.0);
  std::vector<std::pair<std::size_t, VarId>> lambda;
  for (std::size_t i = 0; i < cluster.size(); ++i) {
    if (i == j || (!allowed.empty() && !allowed[i])) continue;
    lambda.emplace_back(i, model.add_variable("", VarKind::Continuous, 0.0, milp::kInfinity));
  }
  PointExpression out;
  if (lambda.empty()) return out;
  add_expression_rows(model, data, cluster, j, b, lambda, eps_prime);
  const auto result = solve_lp(model);
  out.b = result.values[b.pos()];
  if (out.b >= kOne) out.b = 1.0;
  if (out.b <= 1e-9) out.b = 0.0;
  for (const auto& [pos, var] : lambda) {
    const double v = result.values[var.pos()];
    if (v > kWeightFloor) out.lambda.emplace_back(pos, v);
  }
  return out;
}

SelectionResult selection_lp_cluster(const Dataset& data, std::span<const std::size_t> cluster,
                                     double eps_prime, std::size_t threads) {
  if (cluster.empty()) throw Error(ErrorCode::InvalidArgument, "empty cluster");
  const std::size_t n = cluster.size();
  SelectionResult r;
  r.members.assign(cluster.begin(), cluster.end());
  r.b.assign(n, 0.0);
  r.lambda.assign(n, {});
  parallel_for(n, threads, [&](std::size_t j) {
    auto e = selection_lp_point(data, cluster, j, eps_prime);
    r.b[j] = e.b;
    r.lambda[j] = std::move(e.lambda);
  });

  std::vector<bool> interior(n, false);
  for (std::size_t j = 0; j < n; ++j) interior[j] = r.b[j] >= kOne;
  // Demote one failing point per pass (the highest position), so a twin or
  // a chain of boundary points keeps as many interior members as possible.
  for (;;) {
    std::vector<std::size_t> pending;
    for (std::size_t j = 0; j < n; ++j) {
      if (!interior[j]) continue;
      for (const auto& [pos, w] : r.lambda[j]) {
        if (interior[pos] && w > 0.0) {
          pending.push_back(j);
          break;
        }
      }
    }
    if (pending.empty()) break;
    std::vector<bool> allowed(n);
    for (std::size_t j = 0; j < n; ++j) allowed[j] = !interior[j];
    std::vector<PointExpression> again(pending.size());
    parallel_for(pending.size(), threads, [&](std::size_t k) {
      again[k] = selection_lp_point(data, cluster, pending[k], eps_prime, allowed);
    });
    std::size_t failed = n;
    for (std::size_t k = 0; k < pending.size(); ++k) {
      if (again[k].b >= kOne) {
        r.lambda[pending[k]] = std::move(again[k].lambda);
      } else {
        failed = pending[k];
      }
    }
    if (failed != n) interior[failed] = false;
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (interior[j]) r.interior.push_back(j);
  }
  return r;
}

void partition_sets(SelectionResult& r, std::size_t dims, bool any_weight) {
  const std::size_t n = r.members.size();
  const double threshold = 1.0 / static_cast<double>(dims + 1) - 1e-9;
  std::vector<bool> interior(n, false);
  for (const std::size_t j : r.interior) interior[j] = true;
  std::vector<bool> heavy(n, false);
  for (const std::size_t j : r.interior) {
    for (const auto& [i, w] : r.lambda[j]) {
      if (interior[i]) continue;
      if (any_weight ? w > kWeightFloor : w >= threshold) heavy[i] = true;
    }
  }
  r.heavy.clear();
  r.rest.clear();
  for (std::size_t i = 0; i < n; ++i) {
    if (interior[i]) continue;
    (heavy[i] ? r.heavy : r.rest).push_back(i);
  }
}

std::vector<Branch> path_hyperplanes(const ObliqueTree& tree, std::size_t leaf) {
  std::vector<Branch> out;
  for (std::size_t node = leaf; node > 1; node /= 2) out.push_back(tree.branch(node / 2));
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> hyperplane_distance_select(const Dataset& data,
                                                    std::span<const std::size_t> rows,
                                                    const std::vector<Branch>& hyperplanes,
                                                    std::size_t count, std::uint64_t seed) {
  count = std::min(count, rows.size());
  if (count == 0) return {};
  std::vector<std::pair<const Branch*, double>> usable;
  for (const auto& h : hyperplanes) {
    if (h.categorical) continue;
    double norm = 0.0;
    for (const double v : h.h) norm += v * v;
    if (norm > 0.0) usable.emplace_back(&h, std::sqrt(norm));
  }
  std::vector<std::size_t> sorted(rows.begin(), rows.end());
  std::sort(sorted.begin(), sorted.end());
  if (usable.empty()) {
    std::mt19937_64 rng(seed);
    std::shuffle(sorted.begin(), sorted.end(), rng);
    sorted.resize(count);
    std::sort(sorted.begin(), sorted.end());
    return sorted;
  }
  std::vector<std::pair<double, std::size_t>> keyed;
  keyed.reserve(sorted.size());
  for (const std::size_t i : sorted) {
    double best = milp::kInfinity;
    for (const auto& [h, norm] : usable) {
      best = std::min(best, std::abs(dot(h->h, data.row(i)) - h->g) / norm);
    }
    keyed.emplace_back(best, i);
  }
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < count; ++k) out.push_back(keyed[k].second);
  return out;
}

SelectionResult select_cluster(const Dataset& data, std::span<const std::size_t> cluster,
                               const SelectionParams& params,
                               const std::vector<Branch>& hyperplanes) {
  params.validate(data.dims);
  SelectionResult r = selection_lp_cluster(data, cluster, params.eps_prime, params.threads);
  partition_sets(r, data.dims);
  const auto n = static_cast<double>(r.members.size());
  const double interior_share = static_cast<double>(r.interior.size()) / n;
  if (interior_share >= 1.0 - params.beta1 - 1e-12) {
    r.branch = SelectionBranch::DropInterior;
    r.selected = complement(r.members.size(), r.interior);
  } else if (static_cast<double>(r.heavy.size()) > params.beta2 * n) {
    r.branch = SelectionBranch::Heavy;
    r.selected = r.heavy;
  } else {
    r.branch = SelectionBranch::Hyperplane;
    const double budget = std::floor(params.beta2 * n - static_cast<double>(r.heavy.size()));
    const auto count = budget > 0.0 ? static_cast<std::size_t>(budget) : std::size_t{0};
    // Select by position so the answer maps back into the cluster.
    std::vector<std::size_t> rest_rows;
    for (const std::size_t p : r.rest) rest_rows.push_back(r.members[p]);
    const auto picked = hyperplane_distance_select(data, rest_rows, hyperplanes, count, params.seed);
    r.selected = r.heavy;
    for (const std::size_t row : picked) {
      for (const std::size_t p : r.rest) {
        if (r.members[p] == row) {
          r.selected.push_back(p);
          break;
        }
      }
    }
    std::sort(r.selected.begin(), r.selected.end());
  }
  return r;
}

double selection_lp_monolithic(const Dataset& data, std::span<const std::size_t> cluster,
                               double eps_prime) {
  Model model;
  const std::size_t n = cluster.size();
  std::vector<VarId> b;
  for (std::size_t j = 0; j < n; ++j) {
    b.push_back(model.add_variable("", VarKind::Continuous, 0.0, 1.0, -1.0));
  }
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<std::pair<std::size_t, VarId>> lambda;
    for (std::size_t i = 0; i < n; ++i) {
      if (i != j) lambda.emplace_back(i, model.add_variable("", VarKind::Continuous, 0.0, milp::kInfinity));
    }
    if (!lambda.empty()) {
      add_expression_rows(model, data, cluster, j, b[j], lambda, eps_prime);
    } else {
      model.add_constraint("", {{b[j], 1.0}}, Sense::Equal, 0.0);
    }
  }
  return -solve_lp(model).objective;
}

BalancedSelection balanced_selection(const Dataset& data, std::span<const std::size_t> cluster,
                                     std::size_t max_ambiguous) {
  const std::size_t n = cluster.size();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "balanced selection needs two points");

  Model model;
  std::vector<VarId> a;
  std::vector<VarId> b;
  for (std::size_t i = 0; i < n; ++i) {
    a.push_back(model.add_variable("a[" + std::to_string(i) + "]", VarKind::Binary, 0, 1, 1.0));
  }
  for (std::size_t i = 0; i < n; ++i) {
    b.push_back(model.add_variable("b[" + std::to_string(i) + "]", VarKind::Binary, 0, 1, -1.0));
  }
  std::vector<std::vector<std::pair<std::size_t, VarId>>> lambda(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      if (i == j) continue;
      lambda[j].emplace_back(i, model.add_variable("", VarKind::Continuous, 0.0, 1.0));
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    add_expression_rows(model, data, cluster, j, b[j], lambda[j], 0.0);
    for (const auto& [i, var] : lambda[j]) {
      model.add_constraint("", {{var, 1.0}, {a[i], -1.0}}, Sense::LessEqual, 0.0);
    }
    model.add_constraint("", {{a[j], 1.0}, {b[j], 1.0}}, Sense::LessEqual, 1.0);
  }

  const auto relaxed = milp::solve_lp_simplex(model);
  if (relaxed.status != milp::SolveStatus::Optimal) {
    throw Error(ErrorCode::SolverFailure, std::string("balanced selection relaxation ended ") +
                                                 milp::to_string(relaxed.status));
  }
  BalancedSelection out;
  out.relaxation_objective = -relaxed.objective;
  const auto& v = relaxed.values;

  // Greedy answer: select the relaxation's a-support and express whatever
  // the selected points cover. Feasible by construction.
  std::vector<double> greedy(model.num_variables(), 0.0);
  std::vector<bool> support(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    support[i] = v[a[i].pos()] > 1e-9 && v[b[i].pos()] < kOne;
    if (support[i]) greedy[a[i].pos()] = 1.0;
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (support[j]) continue;
    const auto e = selection_lp_point(data, cluster, j, 0.0, support);
    if (e.b < 1.0) continue;
    greedy[b[j].pos()] = 1.0;
    for (const auto& [pos, w] : e.lambda) {
      for (const auto& [k, var] : lambda[j]) {
        if (k == pos) greedy[var.pos()] = w;
      }
    }
  }

  std::size_t ambiguous = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double bi = v[b[i].pos()];
    auto& bv = model.variable(b[i]);
    if (bi <= 1e-9) {
      bv.upper = 0.0;
    } else if (bi >= kOne) {
      bv.lower = 1.0;
      model.variable(a[i]).upper = 0.0;
    } else {
      ++ambiguous;
    }
  }
  out.ambiguous = ambiguous;

  std::vector<double> chosen = greedy;
  if (ambiguous > max_ambiguous) {
    out.greedy_fallback = true;
  } else {
    milp::SolverConfig config;
    config.max_nodes = 20000;
    const bool warm_ok = milp::check_feasible(model, greedy).empty();
    const auto exact = milp::solve_bnb(model, config,
                                       warm_ok ? std::span<const double>(greedy)
                                               : std::span<const double>());
    if (exact.has_incumbent()) chosen = exact.values;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (chosen[a[i].pos()] > 0.5) out.selected.push_back(cluster[i]);
    if (chosen[b[i].pos()] > 0.5) out.expressed.push_back(cluster[i]);
  }
  return out;
}

DataSelection select_all(const Dataset& data, const ObliqueTree& tree,
                         const SelectionParams& params) {
  params.validate(data.dims);
  const auto clusters = cluster_by_leaf(data, tree);
  DataSelection out;
  out.misclassified = clusters.misclassified;
  std::vector<std::size_t> rows = clusters.misclassified;
  for (const auto& c : clusters.clusters) {
    SelectionParams local = params;
    local.seed = params.seed + c.leaf;
    auto r = select_cluster(data, c.members, local, path_hyperplanes(tree, c.leaf));
    const auto picked = r.selected_rows();
    rows.insert(rows.end(), picked.begin(), picked.end());
    out.cluster_leaf.push_back(c.leaf);
    out.clusters.push_back(std::move(r));
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  out.rows = std::move(rows);
  return out;
}

}  // namespace odtmip
