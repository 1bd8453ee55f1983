#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "odtmip/dataset.hpp"

namespace odtmip {

inline constexpr int kMaxDepth = 10;

/// Branch on a categorical column: rows whose value code is in `accepted`
/// go left.
struct CategoricalRule {
  std::size_t feature = 0;
  std::vector<int> accepted;  ///< ascending value codes

  friend bool operator==(const CategoricalRule&, const CategoricalRule&) = default;
};

struct Branch {
  std::vector<double> h;
  double g = 0.0;
  std::optional<CategoricalRule> categorical;

  friend bool operator==(const Branch&, const Branch&) = default;
};

/// Balanced oblique tree in heap layout: branches 1..2^D-1, leaves
/// 2^D..2^(D+1)-1, children of b are 2b and 2b+1.
class ObliqueTree {
 public:
  ObliqueTree() = default;
  ObliqueTree(int depth, std::size_t dims, int leaf_label = 1);

  int depth() const { return depth_; }
  std::size_t dims() const { return dims_; }
  std::size_t num_branches() const { return branches_.size(); }
  std::size_t num_leaves() const { return labels_.size(); }
  std::size_t first_leaf() const { return branches_.size() + 1; }
  bool is_leaf(std::size_t node) const { return node >= first_leaf(); }

  const Branch& branch(std::size_t b) const { return branches_.at(b - 1); }
  Branch& branch(std::size_t b) { return branches_.at(b - 1); }
  int label(std::size_t leaf) const { return labels_.at(leaf - first_leaf()); }
  void set_label(std::size_t leaf, int label) { labels_.at(leaf - first_leaf()) = label; }

  /// True when `x` takes the left branch at b (ties go left).
  bool goes_left(std::size_t b, std::span<const double> x) const;

  friend bool operator==(const ObliqueTree&, const ObliqueTree&) = default;

 private:
  int depth_ = 0;
  std::size_t dims_ = 0;
  std::vector<Branch> branches_;
  std::vector<int> labels_;
};

struct AncestorSets {
  int depth = 0;
  std::vector<std::vector<std::size_t>> left;         ///< left[l - 2^D] = A_L(l)
  std::vector<std::vector<std::size_t>> right;        ///< right[l - 2^D] = A_R(l)
  std::vector<std::vector<std::size_t>> descendants;  ///< descendants[b - 1] = L_b

  std::size_t first_leaf() const { return std::size_t{1} << depth; }
  const std::vector<std::size_t>& left_of(std::size_t leaf) const {
    return left.at(leaf - first_leaf());
  }
  const std::vector<std::size_t>& right_of(std::size_t leaf) const {
    return right.at(leaf - first_leaf());
  }
  const std::vector<std::size_t>& leaves_below(std::size_t b) const {
    return descendants.at(b - 1);
  }
};

/// Branch sets are sorted ascending. Throws for depth outside 1..10.
AncestorSets ancestor_sets(int depth);

double dot(std::span<const double> h, std::span<const double> x);

std::size_t route(const ObliqueTree& tree, std::span<const double> x);
std::vector<int> predict(const ObliqueTree& tree, const Dataset& data);
double accuracy(const ObliqueTree& tree, const Dataset& data);
std::size_t misclassified_count(const ObliqueTree& tree, const Dataset& data);

/// Node of an axis-parallel tree. Numeric splits send x_j <= threshold
/// left; categorical splits send x_j == category left.
struct AxisNode {
  bool is_leaf = true;
  int label = 1;
  std::size_t feature = 0;
  double threshold = 0.0;
  bool categorical = false;
  int category = 0;
  int left = -1;
  int right = -1;
};

struct AxisTree {
  std::vector<AxisNode> nodes;  ///< nodes[0] is the root
  std::size_t dims = 0;

  int depth() const;
  int predict(std::span<const double> x) const;
};

/// Embeds an axis tree of depth <= D. Shallow leaves are padded with
/// pass-through branches (h = 0, g = 0, so every point goes left) whose
/// leaves all repeat the original label.
ObliqueTree axis_to_oblique(const AxisTree& axis, int depth);

/// JSON document {"depth", "dims", "branches", "leaves"}; numbers are
/// written with 17 significant digits.
std::string tree_to_json(const ObliqueTree& tree);
ObliqueTree tree_from_json(const std::string& text);

}  // namespace odtmip
