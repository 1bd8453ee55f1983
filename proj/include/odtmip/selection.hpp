#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "odtmip/dataset.hpp"
#include "odtmip/tree.hpp"

namespace odtmip {

struct SelectionParams {
  double eps_prime = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.1;
  std::uint64_t seed = 0;
  /// Worker threads for the per-point LPs; 0 uses the hardware count.
  std::size_t threads = 0;

  /// Throws unless beta1, beta2 lie in (0, 1), beta2 < (d + 1)(1 - beta1)
  /// and eps_prime lies in [0, 0.5].
  void validate(std::size_t dims) const;
};

/// Sparse convex weights: (position in the cluster, lambda).
using Weights = std::vector<std::pair<std::size_t, double>>;

struct PointExpression {
  double b = 0.0;
  Weights lambda;
};

/// max b s.t. |b x_j - sum_i lambda_i x_i| <= eps' componentwise,
/// sum lambda = b, lambda >= 0, 0 <= b <= 1, over the cluster points other
/// than position j. When `allowed` is non-empty only positions marked true
/// may carry weight. Solved by the built-in simplex, so the answer is a
/// vertex.
PointExpression selection_lp_point(const Dataset& data, std::span<const std::size_t> cluster,
                                   std::size_t j, double eps_prime,
                                   const std::vector<bool>& allowed = {});

enum class SelectionBranch { None, DropInterior, Heavy, Hyperplane };

struct SelectionResult {
  std::vector<std::size_t> members;    ///< dataset rows of the cluster
  std::vector<double> b;               ///< per position, as solved
  std::vector<Weights> lambda;         ///< per position
  /// Positions, ascending. `interior` holds the points with b = 1 whose
  /// expression avoids every other interior point.
  std::vector<std::size_t> interior, heavy, rest;
  std::vector<std::size_t> selected;   ///< positions, ascending
  SelectionBranch branch = SelectionBranch::None;
  bool greedy_fallback = false;

  std::vector<std::size_t> selected_rows() const;
};

/// Solves every per-point LP (on `threads` workers; the result does not
/// depend on the count) and fills members, b, lambda and interior.
/// Interior points are then re-expressed using non-interior points only;
/// when some cannot be, the highest-positioned of them leaves the interior
/// set and the rest are retried.
SelectionResult selection_lp_cluster(const Dataset& data, std::span<const std::size_t> cluster,
                                     double eps_prime, std::size_t threads = 0);

/// Fills heavy and rest. A non-interior point is heavy when it carries
/// weight >= 1/(d + 1) in some interior point's expression, or any
/// positive weight when `any_weight` is set.
void partition_sets(SelectionResult& result, std::size_t dims, bool any_weight = false);

/// Branch hyperplanes on the path from the root to `leaf`.
std::vector<Branch> path_hyperplanes(const ObliqueTree& tree, std::size_t leaf);

/// The `count` rows closest (Euclidean) to any hyperplane in H, stable on
/// ties. Zero and categorical hyperplanes are ignored; with none left a
/// seeded random sample is returned instead. Output keeps the distance
/// order.
std::vector<std::size_t> hyperplane_distance_select(const Dataset& data,
                                                    std::span<const std::size_t> rows,
                                                    const std::vector<Branch>& hyperplanes,
                                                    std::size_t count, std::uint64_t seed);

/// Selection for one cluster: drop the interior when it is large, else keep
/// the heavy points, topping up from the remainder by hyperplane distance.
SelectionResult select_cluster(const Dataset& data, std::span<const std::size_t> cluster,
                               const SelectionParams& params,
                               const std::vector<Branch>& hyperplanes);

struct BalancedSelection {
  std::vector<std::size_t> selected;  ///< dataset rows
  std::vector<std::size_t> expressed; ///< dataset rows with b = 1
  double relaxation_objective = 0.0;
  std::size_t ambiguous = 0;
  bool greedy_fallback = false;
};

/// Trades selected points against expressed points (objective sum b - a):
/// solves the relaxation, fixes the points it decides, and settles the
/// ambiguous rest exactly by branch-and-bound, or greedily above
/// `max_ambiguous` points.
BalancedSelection balanced_selection(const Dataset& data, std::span<const std::size_t> cluster,
                                     std::size_t max_ambiguous = 50);

/// Optimum of the joint selection LP over the whole cluster (sum of b);
/// the per-point LPs decompose it.
double selection_lp_monolithic(const Dataset& data, std::span<const std::size_t> cluster,
                               double eps_prime);

struct DataSelection {
  std::vector<std::size_t> rows;  ///< selected dataset rows, ascending
  std::vector<std::size_t> misclassified;
  std::vector<std::size_t> cluster_leaf;
  std::vector<SelectionResult> clusters;

  double fraction(std::size_t total) const {
    return total == 0 ? 0.0 : static_cast<double>(rows.size()) / static_cast<double>(total);
  }
};

/// Per-leaf selection merged with every misclassified row.
DataSelection select_all(const Dataset& data, const ObliqueTree& tree,
                         const SelectionParams& params);

}  // namespace odtmip
