#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "odtmip/dataset.hpp"
#include "odtmip/tree.hpp"

namespace odtmip {

struct CartParams {
  int max_depth = 2;
  std::size_t min_samples_split = 2;
};

/// 1 - sum_k p_k^2. Throws InvalidArgument when every count is zero.
double gini(std::span<const std::size_t> counts);

struct SplitCandidate {
  std::size_t feature = 0;
  bool categorical = false;
  double threshold = 0.0;
  int category = 0;
  double gain = 0.0;
};

/// Every candidate split of `rows`: midpoints between consecutive distinct
/// values of each numeric column, and one-vs-rest for each categorical
/// value present. Ordered by (feature, threshold or category).
std::vector<SplitCandidate> candidate_splits(const Dataset& data,
                                             std::span<const std::size_t> rows);

/// Majority label of `rows`, ties to the smallest class.
int majority_label(const Dataset& data, std::span<const std::size_t> rows);

/// Greedy Gini tree. A node splits only when some candidate has positive
/// gain; the first candidate with maximal gain wins.
AxisTree train_cart(const Dataset& data, const CartParams& params);

}  // namespace odtmip
