#include "odtmip/cart.hpp"

#include <algorithm>
#include <numeric>

#include "odtmip/error.hpp"

namespace odtmip {
namespace {

constexpr double kGainTolerance = 1e-12;

std::vector<std::size_t> class_counts(const Dataset& data, std::span<const std::size_t> rows) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(data.num_classes), 0);
  for (const std::size_t i : rows) ++counts[static_cast<std::size_t>(data.labels[i] - 1)];
  return counts;
}

double weighted_gini(const std::vector<std::size_t>& counts, std::size_t total) {
  if (total == 0) return 0.0;
  return static_cast<double>(total) * gini(counts);
}

}  // namespace

double gini(std::span<const std::size_t> counts) {
  const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  if (total == 0) throw Error(ErrorCode::InvalidArgument, "gini of empty counts");
  double sum = 0.0;
  for (const std::size_t c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sum += p * p;
  }
  return 1.0 - sum;
}

int majority_label(const Dataset& data, std::span<const std::size_t> rows) {
  const auto counts = class_counts(data, rows);
  const auto best = std::max_element(counts.begin(), counts.end());
  return static_cast<int>(best - counts.begin()) + 1;
}

std::vector<SplitCandidate> candidate_splits(const Dataset& data,
                                             std::span<const std::size_t> rows) {
  std::vector<SplitCandidate> out;
  if (rows.size() < 2) return out;
  const auto parent = class_counts(data, rows);
  const std::size_t n = rows.size();
  const double parent_impurity = gini(parent);
  const auto gain_of = [&](const std::vector<std::size_t>& left, std::size_t n_left) {
    std::vector<std::size_t> right(parent.size());
    for (std::size_t k = 0; k < parent.size(); ++k) right[k] = parent[k] - left[k];
    return parent_impurity -
           (weighted_gini(left, n_left) + weighted_gini(right, n - n_left)) /
               static_cast<double>(n);
  };

  std::vector<std::size_t> order(rows.begin(), rows.end());
  for (std::size_t j = 0; j < data.dims; ++j) {
    if (data.features[j].kind == FeatureKind::Categorical) {
      std::vector<int> values;
      for (const std::size_t i : rows) values.push_back(static_cast<int>(data.at(i, j)));
      std::sort(values.begin(), values.end());
      values.erase(std::unique(values.begin(), values.end()), values.end());
      if (values.size() < 2) continue;
      for (const int v : values) {
        std::vector<std::size_t> left(parent.size(), 0);
        std::size_t n_left = 0;
        for (const std::size_t i : rows) {
          if (static_cast<int>(data.at(i, j)) == v) {
            ++left[static_cast<std::size_t>(data.labels[i] - 1)];
            ++n_left;
          }
        }
        out.push_back({j, true, 0.0, v, gain_of(left, n_left)});
      }
      continue;
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return data.at(a, j) < data.at(b, j); });
    std::vector<std::size_t> left(parent.size(), 0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      ++left[static_cast<std::size_t>(data.labels[order[k]] - 1)];
      const double a = data.at(order[k], j);
      const double b = data.at(order[k + 1], j);
      if (!(a < b)) continue;
      double mid = a + (b - a) / 2.0;
      if (mid >= b) mid = a;
      out.push_back({j, false, mid, 0, gain_of(left, k + 1)});
    }
  }
  return out;
}

AxisTree train_cart(const Dataset& data, const CartParams& params) {
  if (data.rows == 0) throw Error(ErrorCode::InvalidArgument, "cannot train on empty data");
  if (params.max_depth < 0 || params.max_depth > kMaxDepth) {
    throw Error(ErrorCode::InvalidArgument, "CART depth outside 0.." + std::to_string(kMaxDepth));
  }
  AxisTree tree;
  tree.dims = data.dims;
  std::vector<std::size_t> all(data.rows);
  std::iota(all.begin(), all.end(), std::size_t{0});

  const auto grow = [&](auto&& self, std::vector<std::size_t> rows, int depth) -> int {
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(AxisNode{});
    tree.nodes[index].label = majority_label(data, rows);
    const auto counts = class_counts(data, rows);
    const bool pure = std::count_if(counts.begin(), counts.end(),
                                    [](std::size_t c) { return c > 0; }) <= 1;
    if (depth >= params.max_depth || rows.size() < params.min_samples_split || pure) {
      return index;
    }
    const auto candidates = candidate_splits(data, rows);
    const SplitCandidate* best = nullptr;
    for (const auto& c : candidates) {
      if (c.gain > kGainTolerance && (best == nullptr || c.gain > best->gain + kGainTolerance)) {
        best = &c;
      }
    }
    if (best == nullptr) return index;
    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    for (const std::size_t i : rows) {
      const double v = data.at(i, best->feature);
      const bool left =
          best->categorical ? static_cast<int>(v) == best->category : v <= best->threshold;
      (left ? left_rows : right_rows).push_back(i);
    }
    AxisNode node = tree.nodes[index];
    node.is_leaf = false;
    node.feature = best->feature;
    node.categorical = best->categorical;
    node.threshold = best->threshold;
    node.category = best->category;
    node.left = self(self, std::move(left_rows), depth + 1);
    node.right = self(self, std::move(right_rows), depth + 1);
    tree.nodes[index] = node;
    return index;
  };
  grow(grow, std::move(all), 0);
  return tree;
}

}  // namespace odtmip
