#include "odtmip/tree.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <sstream>

#include "json.hpp"

#include "odtmip/error.hpp"

namespace odtmip {
namespace {

void check_depth(int depth) {
  if (depth < 1 || depth > kMaxDepth) {
    throw Error(ErrorCode::InvalidArgument,
                "depth " + std::to_string(depth) + " outside 1.." + std::to_string(kMaxDepth));
  }
}

std::string number(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

}  // namespace

ObliqueTree::ObliqueTree(int depth, std::size_t dims, int leaf_label)
    : depth_(depth), dims_(dims) {
  check_depth(depth);
  const std::size_t leaves = std::size_t{1} << depth;
  branches_.assign(leaves - 1, Branch{std::vector<double>(dims, 0.0), 0.0, std::nullopt});
  labels_.assign(leaves, leaf_label);
}

bool ObliqueTree::goes_left(std::size_t b, std::span<const double> x) const {
  const Branch& br = branch(b);
  if (br.categorical) {
    const int code = static_cast<int>(x[br.categorical->feature]);
    return std::binary_search(br.categorical->accepted.begin(), br.categorical->accepted.end(),
                              code);
  }
  return dot(br.h, x) <= br.g;
}

AncestorSets ancestor_sets(int depth) {
  check_depth(depth);
  AncestorSets a;
  a.depth = depth;
  const std::size_t first = std::size_t{1} << depth;
  a.left.resize(first);
  a.right.resize(first);
  a.descendants.resize(first - 1);
  for (std::size_t l = first; l < 2 * first; ++l) {
    for (std::size_t node = l; node > 1; node /= 2) {
      const std::size_t parent = node / 2;
      (node % 2 == 0 ? a.left : a.right)[l - first].push_back(parent);
      a.descendants[parent - 1].push_back(l);
    }
    std::sort(a.left[l - first].begin(), a.left[l - first].end());
    std::sort(a.right[l - first].begin(), a.right[l - first].end());
  }
  return a;
}

double dot(std::span<const double> h, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t j = 0; j < h.size(); ++j) s += h[j] * x[j];
  return s;
}

std::size_t route(const ObliqueTree& tree, std::span<const double> x) {
  if (x.size() != tree.dims()) {
    throw Error(ErrorCode::DimensionMismatch, "point dimension differs from tree");
  }
  std::size_t node = 1;
  while (!tree.is_leaf(node)) node = tree.goes_left(node, x) ? 2 * node : 2 * node + 1;
  return node;
}

std::vector<int> predict(const ObliqueTree& tree, const Dataset& data) {
  std::vector<int> out(data.rows);
  for (std::size_t i = 0; i < data.rows; ++i) out[i] = tree.label(route(tree, data.row(i)));
  return out;
}

std::size_t misclassified_count(const ObliqueTree& tree, const Dataset& data) {
  const auto yhat = predict(tree, data);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < data.rows; ++i) wrong += yhat[i] != data.labels[i];
  return wrong;
}

double accuracy(const ObliqueTree& tree, const Dataset& data) {
  if (data.rows == 0) return 1.0;
  return 1.0 - static_cast<double>(misclassified_count(tree, data)) /
                   static_cast<double>(data.rows);
}

int AxisTree::depth() const {
  if (nodes.empty()) return 0;
  std::function<int(int)> walk = [&](int k) -> int {
    const auto& n = nodes.at(static_cast<std::size_t>(k));
    if (n.is_leaf) return 0;
    return 1 + std::max(walk(n.left), walk(n.right));
  };
  return walk(0);
}

int AxisTree::predict(std::span<const double> x) const {
  std::size_t k = 0;
  while (!nodes.at(k).is_leaf) {
    const auto& n = nodes[k];
    const bool left = n.categorical ? static_cast<int>(x[n.feature]) == n.category
                                    : x[n.feature] <= n.threshold;
    k = static_cast<std::size_t>(left ? n.left : n.right);
  }
  return nodes[k].label;
}

ObliqueTree axis_to_oblique(const AxisTree& axis, int depth) {
  if (axis.nodes.empty()) throw Error(ErrorCode::InvalidArgument, "axis tree has no nodes");
  if (axis.depth() > depth) {
    throw Error(ErrorCode::InvalidArgument, "axis tree depth " + std::to_string(axis.depth()) +
                                                " exceeds target depth " + std::to_string(depth));
  }
  ObliqueTree tree(depth, axis.dims);
  std::function<void(std::size_t, int)> place = [&](std::size_t heap, int k) {
    const auto& n = axis.nodes.at(static_cast<std::size_t>(k));
    if (tree.is_leaf(heap)) {
      tree.set_label(heap, n.label);
      return;
    }
    if (n.is_leaf) {
      // Pass-through: the hyperplane stays all-zero, and both subtrees
      // carry this leaf's label.
      place(2 * heap, k);
      place(2 * heap + 1, k);
      return;
    }
    Branch& br = tree.branch(heap);
    if (n.categorical) {
      br.categorical = CategoricalRule{n.feature, {n.category}};
    } else {
      br.h[n.feature] = 1.0;
      br.g = n.threshold;
    }
    place(2 * heap, n.left);
    place(2 * heap + 1, n.right);
  };
  place(1, 0);
  return tree;
}

std::string tree_to_json(const ObliqueTree& tree) {
  std::ostringstream out;
  out << "{\"depth\":" << tree.depth() << ",\"dims\":" << tree.dims() << ",\"branches\":[";
  for (std::size_t b = 1; b <= tree.num_branches(); ++b) {
    if (b > 1) out << ',';
    const Branch& br = tree.branch(b);
    if (br.categorical) {
      out << "{\"categorical\":{\"feature\":" << br.categorical->feature
          << ",\"accepted_values\":[";
      for (std::size_t k = 0; k < br.categorical->accepted.size(); ++k) {
        out << (k ? "," : "") << br.categorical->accepted[k];
      }
      out << "]}}";
    } else {
      out << "{\"h\":[";
      for (std::size_t j = 0; j < br.h.size(); ++j) out << (j ? "," : "") << number(br.h[j]);
      out << "],\"g\":" << number(br.g) << '}';
    }
  }
  out << "],\"leaves\":[";
  for (std::size_t k = 0; k < tree.num_leaves(); ++k) {
    out << (k ? "," : "") << tree.label(tree.first_leaf() + k);
  }
  out << "]}";
  return out.str();
}

ObliqueTree tree_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
    const int depth = doc.at("depth").get<int>();
    const auto dims = doc.at("dims").get<std::size_t>();
    ObliqueTree tree(depth, dims);
    const auto& branches = doc.at("branches");
    const auto& leaves = doc.at("leaves");
    if (branches.size() != tree.num_branches() || leaves.size() != tree.num_leaves()) {
      throw Error(ErrorCode::Parse, "node counts do not match depth");
    }
    for (std::size_t b = 1; b <= tree.num_branches(); ++b) {
      const auto& node = branches[b - 1];
      Branch& br = tree.branch(b);
      if (node.contains("categorical")) {
        const auto& c = node["categorical"];
        CategoricalRule rule{c.at("feature").get<std::size_t>(),
                             c.at("accepted_values").get<std::vector<int>>()};
        std::sort(rule.accepted.begin(), rule.accepted.end());
        if (rule.feature >= dims) throw Error(ErrorCode::Parse, "categorical feature out of range");
        br.categorical = std::move(rule);
      } else {
        br.h = node.at("h").get<std::vector<double>>();
        br.g = node.at("g").get<double>();
        if (br.h.size() != dims) throw Error(ErrorCode::Parse, "hyperplane length differs from dims");
      }
    }
    for (std::size_t k = 0; k < tree.num_leaves(); ++k) {
      tree.set_label(tree.first_leaf() + k, leaves[k].get<int>());
    }
    return tree;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("tree JSON: ") + e.what());
  }
}

}  // namespace odtmip
