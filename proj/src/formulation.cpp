#include "odtmip/formulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "odtmip/cuts.hpp"
#include "odtmip/error.hpp"

namespace odtmip {
namespace {

using milp::ConstraintTag;
using milp::Sense;
using milp::Term;
using milp::VarId;
using milp::VarKind;

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string idx(std::size_t a) { return "[" + std::to_string(a) + "]"; }
std::string idx(std::size_t a, std::size_t b) {
  return "[" + std::to_string(a) + "," + std::to_string(b) + "]";
}
std::string idx(std::size_t a, std::size_t b, std::size_t c) {
  return "[" + std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(c) + "]";
}

bool under(std::size_t leaf, std::size_t node) {
  while (leaf > node) leaf /= 2;
  return leaf == node;
}

// Leaf holding point i in the solution: the largest e_il.
std::size_t assigned_leaf(std::span<const double> values, const VariableIndexMap& map,
                          std::size_t i) {
  std::size_t best = map.first_leaf();
  for (std::size_t l = map.first_leaf(); l < 2 * map.first_leaf(); ++l) {
    if (values[map.e_(i, l).pos()] > values[map.e_(i, best).pos()]) best = l;
  }
  return best;
}

}  // namespace

void Svm1OdtParams::validate() const {
  if (depth < 1 || depth > kMaxDepth) {
    throw Error(ErrorCode::InvalidArgument, "depth outside 1.." + std::to_string(kMaxDepth));
  }
  if (!(alpha1 >= 0.0) || !(alpha2 >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "alpha1 and alpha2 must be non-negative");
  }
  if (!(epsilon > 0.0) || !(big_m > 0.0) || !(epsilon < big_m)) {
    throw Error(ErrorCode::InvalidArgument, "need 0 < epsilon < M");
  }
}

Svm1OdtParams rescale_to_unit_M(const Svm1OdtParams& params) {
  if (!(params.big_m > 0.0)) throw Error(ErrorCode::InvalidArgument, "M must be positive");
  Svm1OdtParams out = params;
  out.alpha1 = params.alpha1 * params.big_m;
  out.alpha2 = params.alpha2 * params.big_m;
  out.epsilon = params.epsilon / params.big_m;
  out.big_m = 1.0;
  return out;
}

BuiltModel build_model(const Dataset& data, const Svm1OdtParams& params_in,
                       std::span<const double> point_weights) {
  params_in.validate();
  const Svm1OdtParams params =
      params_in.rescale_to_unit_M ? rescale_to_unit_M(params_in) : params_in;
  if (data.num_classes < 2) throw Error(ErrorCode::SingleClass, "need at least two classes");
  if (data.has_categorical() && !params.categorical_mode) {
    throw Error(ErrorCode::Categorical,
                "categorical columns present; enable categorical mode and call add_categorical");
  }
  if (!point_weights.empty() && point_weights.size() != data.rows) {
    throw Error(ErrorCode::DimensionMismatch, "one weight per point expected");
  }

  BuiltModel built;
  auto& model = built.model;
  auto& map = built.map;
  const std::size_t n = data.rows;
  const std::size_t d = data.dims;
  const auto anc = ancestor_sets(params.depth);
  const std::size_t first = anc.first_leaf();
  const std::size_t nb = first - 1;
  const double Y = data.num_classes;
  const double M = params.big_m;
  const double eps = params.epsilon;

  map.n = n;
  map.d = d;
  map.depth = params.depth;
  map.classes = data.num_classes;
  map.branches = nb;
  map.leaves = first;
  map.params = params;
  if (params.categorical_mode) map.categorical_features = data.categorical_features();
  std::vector<bool> numeric(d, true);
  for (const std::size_t j : map.categorical_features) numeric[j] = false;

  for (std::size_t i = 0; i < n; ++i) {
    const double weight = point_weights.empty() ? 1.0 : point_weights[i];
    map.c.push_back(model.add_variable("c" + idx(i), VarKind::Binary, 0, 1, weight));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = first; l < 2 * first; ++l) {
      map.e.push_back(model.add_variable("e" + idx(i, l), VarKind::Binary, 0, 1));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = first; l < 2 * first; ++l) {
      map.w.push_back(model.add_variable("w" + idx(i, l), VarKind::Continuous, -kInf, kInf));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    map.yhat.push_back(model.add_variable("yhat" + idx(i), VarKind::Continuous, -kInf, kInf));
  }
  for (std::size_t l = first; l < 2 * first; ++l) {
    map.u.push_back(model.add_variable("u" + idx(l),
                                       params.relax_u ? VarKind::Continuous : VarKind::Integer,
                                       1.0, Y));
  }
  for (std::size_t b = 1; b <= nb; ++b) {
    for (std::size_t j = 0; j < d; ++j) {
      if (!numeric[j]) {
        map.h_plus.push_back(VarId{});
        map.h_minus.push_back(VarId{});
        continue;
      }
      map.h_plus.push_back(
          model.add_variable("hp" + idx(b, j), VarKind::Continuous, 0, kInf, params.alpha2));
      map.h_minus.push_back(
          model.add_variable("hm" + idx(b, j), VarKind::Continuous, 0, kInf, params.alpha2));
    }
  }
  for (std::size_t b = 1; b <= nb; ++b) {
    map.g.push_back(model.add_variable("g" + idx(b), VarKind::Continuous, -kInf, kInf));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t b = 1; b <= nb; ++b) {
      map.p_plus.push_back(model.add_variable("pp" + idx(i, b), VarKind::Continuous, 0, kInf));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t b = 1; b <= nb; ++b) {
      map.p_minus.push_back(model.add_variable("pm" + idx(i, b), VarKind::Continuous, 0, kInf));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t b = 1; b <= nb; ++b) {
      map.m.push_back(
          model.add_variable("m" + idx(i, b), VarKind::Continuous, 0, kInf, params.alpha1));
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const double y = data.labels[i];
    // (y - Y) c <= y - yhat <= (y - 1) c
    model.add_constraint("label_lo" + idx(i), {{map.yhat[i], 1.0}, {map.c[i], y - Y}},
                         Sense::LessEqual, y);
    model.add_constraint("label_hi" + idx(i), {{map.yhat[i], 1.0}, {map.c[i], y - 1.0}},
                         Sense::GreaterEqual, y);
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Term> terms{{map.yhat[i], 1.0}};
    for (std::size_t l = first; l < 2 * first; ++l) terms.push_back({map.w_(i, l), -1.0});
    model.add_constraint("yhat" + idx(i), std::move(terms), Sense::Equal, 0.0);
  }
  // McCormick envelope of w = u e with u in [1, Y] and e binary.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = first; l < 2 * first; ++l) {
      const VarId w = map.w_(i, l);
      const VarId e = map.e_(i, l);
      const VarId u = map.u_(l);
      model.add_constraint("mc_lo1" + idx(i, l), {{w, 1.0}, {e, -1.0}}, Sense::GreaterEqual, 0.0);
      model.add_constraint("mc_lo2" + idx(i, l), {{u, 1.0}, {w, -1.0}, {e, 1.0}},
                           Sense::GreaterEqual, 1.0);
      model.add_constraint("mc_hi1" + idx(i, l), {{e, Y}, {u, 1.0}, {w, -1.0}},
                           Sense::LessEqual, Y);
      model.add_constraint("mc_hi2" + idx(i, l), {{w, 1.0}, {e, -Y}}, Sense::LessEqual, 0.0);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = data.row(i);
    for (std::size_t b = 1; b <= nb; ++b) {
      std::vector<Term> terms{{map.g_(b), 1.0}};
      for (std::size_t j = 0; j < d; ++j) {
        if (!numeric[j] || x[j] == 0.0) continue;
        terms.push_back({map.h_plus_(b, j), -x[j]});
        terms.push_back({map.h_minus_(b, j), x[j]});
      }
      terms.push_back({map.p_plus_(i, b), -1.0});
      terms.push_back({map.p_minus_(i, b), 1.0});
      model.add_constraint("split" + idx(i, b), std::move(terms), Sense::Equal, 0.0);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = first; l < 2 * first; ++l) {
      const VarId e = map.e_(i, l);
      for (const std::size_t b : anc.right_of(l)) {
        model.add_constraint("bigm_right" + idx(i, l, b), {{map.p_plus_(i, b), 1.0}, {e, M}},
                             Sense::LessEqual, M);
        const auto row = model.add_constraint(
            "margin_right" + idx(i, l, b),
            {{map.p_minus_(i, b), 1.0}, {map.m_(i, b), 1.0}, {e, -eps}}, Sense::GreaterEqual, 0.0);
        map.margin_rows.push_back({row, i, l, b});
      }
      for (const std::size_t b : anc.left_of(l)) {
        model.add_constraint("bigm_left" + idx(i, l, b), {{map.p_minus_(i, b), 1.0}, {e, M}},
                             Sense::LessEqual, M);
        const auto row = model.add_constraint(
            "margin_left" + idx(i, l, b),
            {{map.p_plus_(i, b), 1.0}, {map.m_(i, b), 1.0}, {e, -eps}}, Sense::GreaterEqual, 0.0);
        map.margin_rows.push_back({row, i, l, b});
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Term> terms;
    for (std::size_t l = first; l < 2 * first; ++l) terms.push_back({map.e_(i, l), 1.0});
    model.add_constraint("assign" + idx(i), std::move(terms), Sense::Equal, 1.0);
  }

  if (params.add_cuts) {
    CutFamilyConfig cuts;
    cuts.seed = params.seed;
    add_cuts(model, map, data, cuts);
  }
  return built;
}

void add_categorical(milp::Model& model, VariableIndexMap& map, const Dataset& data) {
  if (!map.params.categorical_mode || map.categorical_features.empty()) {
    throw Error(ErrorCode::Categorical, "model has no categorical columns to branch on");
  }
  if (!map.h_cat.empty()) throw Error(ErrorCode::Categorical, "categorical rules already added");
  const auto& cats = map.categorical_features;
  const std::size_t nb = map.branches;
  const std::size_t first = map.first_leaf();
  const auto anc = ancestor_sets(map.depth);
  for (std::size_t i = 0; i < data.rows; ++i) {
    for (const std::size_t j : cats) {
      const double v = data.at(i, j);
      const auto size = static_cast<double>(data.features[j].values.size());
      if (!(v >= 0.0 && v < size && v == std::floor(v))) {
        throw Error(ErrorCode::Categorical, "row " + std::to_string(i) + " of column '" +
                                                data.features[j].name +
                                                "' is outside its value set");
      }
    }
  }

  for (std::size_t b = 1; b <= nb; ++b) {
    for (std::size_t k = 0; k < cats.size(); ++k) {
      map.h_cat.push_back(model.add_variable("hc" + idx(b, cats[k]), VarKind::Binary, 0, 1));
    }
  }
  for (std::size_t b = 1; b <= nb; ++b) {
    for (std::size_t k = 0; k < cats.size(); ++k) {
      std::vector<VarId> values;
      for (std::size_t v = 0; v < data.features[cats[k]].values.size(); ++v) {
        values.push_back(model.add_variable("s" + idx(b, cats[k], v), VarKind::Binary, 0, 1));
      }
      map.s.push_back(std::move(values));
    }
  }

  const auto cat_sum = [&](std::size_t b, double coef) {
    std::vector<Term> terms;
    for (std::size_t k = 0; k < cats.size(); ++k) terms.push_back({map.h_cat_(b, k), coef});
    return terms;
  };
  for (std::size_t b = 1; b <= nb; ++b) {
    model.add_constraint("cat_one" + idx(b), cat_sum(b, 1.0), Sense::LessEqual, 1.0);
    for (std::size_t k = 0; k < cats.size(); ++k) {
      for (const VarId s : map.s_(b, k)) {
        model.add_constraint("cat_link" + idx(b, cats[k], s.pos()),
                             {{s, 1.0}, {map.h_cat_(b, k), -1.0}}, Sense::LessEqual, 0.0);
      }
    }
    for (std::size_t j = 0; j < map.d; ++j) {
      if (!map.h_plus_(b, j).valid()) continue;
      auto lo = cat_sum(b, -1.0);
      lo.push_back({map.h_plus_(b, j), 1.0});
      lo.push_back({map.h_minus_(b, j), -1.0});
      model.add_constraint("cat_hlo" + idx(b, j), std::move(lo), Sense::GreaterEqual, -1.0);
      auto hi = cat_sum(b, 1.0);
      hi.push_back({map.h_plus_(b, j), 1.0});
      hi.push_back({map.h_minus_(b, j), -1.0});
      model.add_constraint("cat_hhi" + idx(b, j), std::move(hi), Sense::LessEqual, 1.0);
    }
  }

  // Sum over categorical features of s_bjv for the value x_ij takes.
  const auto matching = [&](std::size_t i, std::size_t b, double coef) {
    std::vector<Term> terms;
    for (std::size_t k = 0; k < cats.size(); ++k) {
      const auto v = static_cast<std::size_t>(data.at(i, cats[k]));
      terms.push_back({map.s_(b, k)[v], coef});
    }
    return terms;
  };
  for (std::size_t i = 0; i < data.rows; ++i) {
    for (std::size_t l = first; l < 2 * first; ++l) {
      const VarId e = map.e_(i, l);
      for (const std::size_t b : anc.left_of(l)) {
        auto terms = matching(i, b, 1.0);
        terms.push_back({e, -1.0});
        const auto h = cat_sum(b, -1.0);
        terms.insert(terms.end(), h.begin(), h.end());
        model.add_constraint("cat_left" + idx(i, l, b), std::move(terms), Sense::GreaterEqual,
                             -1.0);
      }
      for (const std::size_t b : anc.right_of(l)) {
        auto terms = matching(i, b, 1.0);
        terms.push_back({e, 1.0});
        const auto h = cat_sum(b, 1.0);
        terms.insert(terms.end(), h.begin(), h.end());
        model.add_constraint("cat_right" + idx(i, l, b), std::move(terms), Sense::LessEqual, 2.0);
      }
    }
  }
  // Margins only bind when the branch uses the hyperplane.
  const double eps = map.params.epsilon;
  for (const auto& r : map.margin_rows) model.add_terms(r.row, cat_sum(r.branch, eps));
}

ObliqueTree extract_tree(std::span<const double> values, const VariableIndexMap& map,
                         const Dataset& data) {
  const std::size_t first = map.first_leaf();
  ObliqueTree tree(map.depth, map.d);

  std::vector<std::size_t> leaf_of(map.n);
  std::vector<bool> occupied(first, false);
  for (std::size_t i = 0; i < map.n; ++i) {
    leaf_of[i] = assigned_leaf(values, map, i);
    occupied[leaf_of[i] - first] = true;
  }
  for (std::size_t l = first; l < 2 * first; ++l) {
    const double u = values[map.u_(l).pos()];
    const double rounded = std::floor(u + 0.5);
    if (occupied[l - first] && std::abs(u - rounded) > 0.01) {
      throw Error(ErrorCode::SolverFailure,
                  "leaf " + std::to_string(l) + " label " + std::to_string(u) + " is fractional");
    }
    tree.set_label(l, static_cast<int>(std::clamp(rounded, 1.0, double(map.classes))));
  }

  for (std::size_t b = 1; b <= map.branches; ++b) {
    Branch& br = tree.branch(b);
    std::size_t chosen = map.categorical_features.size();
    double strongest = 0.5;
    for (std::size_t k = 0; k < map.categorical_features.size() && !map.h_cat.empty(); ++k) {
      const double v = values[map.h_cat_(b, k).pos()];
      if (v > strongest) {
        strongest = v;
        chosen = k;
      }
    }
    if (chosen < map.categorical_features.size()) {
      CategoricalRule rule{map.categorical_features[chosen], {}};
      const auto& s = map.s_(b, chosen);
      for (std::size_t v = 0; v < s.size(); ++v) {
        if (values[s[v].pos()] > 0.5) rule.accepted.push_back(static_cast<int>(v));
      }
      br.categorical = std::move(rule);
      continue;
    }
    for (std::size_t j = 0; j < map.d; ++j) {
      if (!map.h_plus_(b, j).valid()) continue;
      br.h[j] = values[map.h_plus_(b, j).pos()] - values[map.h_minus_(b, j).pos()];
    }
    br.g = values[map.g_(b).pos()];

    // Move g into the open gap between the points the solution sends left
    // and right, when it is not there already.
    double max_left = -kInf;
    double min_right = kInf;
    bool inconsistent = false;
    for (std::size_t i = 0; i < map.n; ++i) {
      const std::size_t l = leaf_of[i];
      const double hx = dot(br.h, data.row(i));
      if (under(l, 2 * b)) {
        max_left = std::max(max_left, hx);
        inconsistent |= hx > br.g;
      } else if (under(l, 2 * b + 1)) {
        min_right = std::min(min_right, hx);
        inconsistent |= hx <= br.g;
      }
    }
    if (!inconsistent || !(max_left < min_right)) continue;
    if (std::isinf(min_right)) {
      br.g = max_left;
    } else if (std::isinf(max_left)) {
      br.g = std::nextafter(min_right, -kInf);
    } else {
      double mid = max_left + (min_right - max_left) / 2.0;
      if (mid >= min_right) mid = max_left;
      br.g = mid;
    }
  }
  return tree;
}

std::vector<double> embed_warm_start(const ObliqueTree& tree_in, const Dataset& data,
                                     const VariableIndexMap& map, std::size_t num_variables) {
  if (tree_in.depth() != map.depth || tree_in.dims() != map.d || data.rows != map.n) {
    throw Error(ErrorCode::DimensionMismatch, "tree or data does not match the model");
  }
  const double M = map.params.big_m;
  const double eps = map.params.epsilon;
  const std::size_t first = map.first_leaf();

  ObliqueTree tree = tree_in;
  for (std::size_t b = 1; b <= map.branches; ++b) {
    Branch& br = tree.branch(b);
    if (br.categorical) {
      if (map.h_cat.empty()) {
        throw Error(ErrorCode::Categorical, "categorical branch needs categorical rules");
      }
      std::fill(br.h.begin(), br.h.end(), 0.0);
      br.g = 0.0;
      continue;
    }
    double largest = 0.0;
    for (std::size_t i = 0; i < map.n; ++i) {
      largest = std::max(largest, std::abs(br.g - dot(br.h, data.row(i))));
    }
    double scale = largest > M ? M / largest : 1.0;
    for (std::size_t j = 0; j < map.d; ++j) {
      if (!map.h_plus_(b, j).valid()) {
        if (br.h[j] != 0.0) {
          throw Error(ErrorCode::Categorical, "hyperplane uses a categorical column");
        }
        continue;
      }
      if (!map.h_cat.empty() && std::abs(br.h[j]) > 1.0) scale = std::min(scale, 1.0 / std::abs(br.h[j]));
    }
    if (scale < 1.0) {
      for (double& h : br.h) h *= scale;
      br.g *= scale;
    }
  }

  std::vector<double> v(num_variables, 0.0);
  for (std::size_t l = first; l < 2 * first; ++l) {
    const int label = tree.label(l);
    if (label < 1 || label > map.classes) {
      throw Error(ErrorCode::InvalidArgument, "leaf label outside 1..Y");
    }
    v[map.u_(l).pos()] = label;
  }
  for (std::size_t b = 1; b <= map.branches; ++b) {
    const Branch& br = tree.branch(b);
    v[map.g_(b).pos()] = br.g;
    for (std::size_t j = 0; j < map.d; ++j) {
      if (!map.h_plus_(b, j).valid()) continue;
      v[map.h_plus_(b, j).pos()] = std::max(br.h[j], 0.0);
      v[map.h_minus_(b, j).pos()] = std::max(-br.h[j], 0.0);
    }
    if (br.categorical) {
      const auto& cats = map.categorical_features;
      const auto k = static_cast<std::size_t>(
          std::find(cats.begin(), cats.end(), br.categorical->feature) - cats.begin());
      if (k == cats.size()) throw Error(ErrorCode::Categorical, "rule on a numeric column");
      v[map.h_cat_(b, k).pos()] = 1.0;
      for (const int value : br.categorical->accepted) {
        v[map.s_(b, k).at(static_cast<std::size_t>(value)).pos()] = 1.0;
      }
    }
  }
  for (std::size_t i = 0; i < map.n; ++i) {
    const auto x = data.row(i);
    const std::size_t leaf = route(tree, x);
    const int label = tree.label(leaf);
    v[map.e_(i, leaf).pos()] = 1.0;
    v[map.w_(i, leaf).pos()] = label;
    v[map.yhat[i].pos()] = label;
    v[map.c[i].pos()] = label == data.labels[i] ? 0.0 : 1.0;
    for (std::size_t b = 1; b <= map.branches; ++b) {
      const Branch& br = tree.branch(b);
      const double dev = br.g - dot(br.h, x);
      v[map.p_plus_(i, b).pos()] = std::max(dev, 0.0);
      v[map.p_minus_(i, b).pos()] = std::max(-dev, 0.0);
    }
    std::size_t node = leaf;
    while (node > 1) {
      const std::size_t b = node / 2;
      const bool left = node == 2 * b;
      node = b;
      if (tree.branch(b).categorical) continue;
      const double active =
          left ? v[map.p_plus_(i, b).pos()] : v[map.p_minus_(i, b).pos()];
      v[map.m_(i, b).pos()] = std::max(0.0, eps - active);
    }
  }
  return v;
}

ObjectiveTerms objective_terms(std::span<const double> values, const VariableIndexMap& map,
                               std::span<const double> point_weights) {
  ObjectiveTerms t;
  for (std::size_t i = 0; i < map.n; ++i) {
    t.misclassified += (point_weights.empty() ? 1.0 : point_weights[i]) * values[map.c[i].pos()];
  }
  for (const VarId m : map.m) t.margin += values[m.pos()];
  for (std::size_t k = 0; k < map.h_plus.size(); ++k) {
    if (!map.h_plus[k].valid()) continue;
    t.l1 += values[map.h_plus[k].pos()] + values[map.h_minus[k].pos()];
  }
  return t;
}

}  // namespace odtmip
