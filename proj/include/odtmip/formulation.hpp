#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "odtmip/dataset.hpp"
#include "odtmip/milp/model.hpp"
#include "odtmip/tree.hpp"

namespace odtmip {

struct Svm1OdtParams {
  int depth = 2;
  double alpha1 = 1000.0;  ///< weight on margin slacks m
  double alpha2 = 0.1;     ///< weight on ||h_b||_1
  double epsilon = 0.01;
  double big_m = 1.0;
  bool relax_u = false;
  bool rescale_to_unit_M = true;
  bool add_cuts = true;
  /// Accept categorical columns; they are excluded from the hyperplanes
  /// and handled by add_categorical.
  bool categorical_mode = false;
  /// Seed for sampling the pigeonhole cut index sets.
  std::uint64_t seed = 0;

  void validate() const;
};

/// (a1, a2, M, eps) -> (M a1, M a2, 1, eps / M).
Svm1OdtParams rescale_to_unit_M(const Svm1OdtParams& params);

/// Model variable ids for every symbol of the formulation. Invalid ids mark
/// symbols that do not exist in this model (for example h of a categorical
/// column).
struct VariableIndexMap {
  std::size_t n = 0;
  std::size_t d = 0;
  int depth = 0;
  int classes = 0;
  std::size_t branches = 0;
  std::size_t leaves = 0;
  /// Parameters the model was built with, after any rescaling.
  Svm1OdtParams params;

  std::vector<milp::VarId> c, yhat;              // per point
  std::vector<milp::VarId> e, w;                 // point-major, per leaf
  std::vector<milp::VarId> u;                    // per leaf
  std::vector<milp::VarId> h_plus, h_minus;      // branch-major, per feature
  std::vector<milp::VarId> g;                    // per branch
  std::vector<milp::VarId> p_plus, p_minus, m;   // point-major, per branch

  std::vector<std::size_t> categorical_features;
  std::vector<milp::VarId> h_cat;                // branch-major, per categorical feature
  std::vector<std::vector<milp::VarId>> s;       // [branch-major, per categorical feature][value]
  /// Rows of the epsilon-margin constraints, one per (point, leaf,
  /// ancestor branch), in emission order.
  struct MarginRow {
    std::size_t row;
    std::size_t point;
    std::size_t leaf;
    std::size_t branch;
  };
  std::vector<MarginRow> margin_rows;

  std::size_t first_leaf() const { return leaves; }
  milp::VarId c_(std::size_t i) const { return c[i]; }
  milp::VarId e_(std::size_t i, std::size_t l) const { return e[i * leaves + (l - leaves)]; }
  milp::VarId w_(std::size_t i, std::size_t l) const { return w[i * leaves + (l - leaves)]; }
  milp::VarId u_(std::size_t l) const { return u[l - leaves]; }
  milp::VarId h_plus_(std::size_t b, std::size_t j) const { return h_plus[(b - 1) * d + j]; }
  milp::VarId h_minus_(std::size_t b, std::size_t j) const { return h_minus[(b - 1) * d + j]; }
  milp::VarId g_(std::size_t b) const { return g[b - 1]; }
  milp::VarId p_plus_(std::size_t i, std::size_t b) const { return p_plus[i * branches + b - 1]; }
  milp::VarId p_minus_(std::size_t i, std::size_t b) const {
    return p_minus[i * branches + b - 1];
  }
  milp::VarId m_(std::size_t i, std::size_t b) const { return m[i * branches + b - 1]; }
  milp::VarId h_cat_(std::size_t b, std::size_t k) const {
    return h_cat[(b - 1) * categorical_features.size() + k];
  }
  const std::vector<milp::VarId>& s_(std::size_t b, std::size_t k) const {
    return s[(b - 1) * categorical_features.size() + k];
  }
};

struct BuiltModel {
  milp::Model model;
  VariableIndexMap map;
};

/// The SVM1-ODT MILP. `point_weights` (default all 1) are the objective
/// coefficients of c_i. Cuts are appended when params.add_cuts is set.
BuiltModel build_model(const Dataset& data, const Svm1OdtParams& params,
                       std::span<const double> point_weights = {});

/// Categorical branching rules on top of a categorical-mode model.
void add_categorical(milp::Model& model, VariableIndexMap& map, const Dataset& data);

/// Tree encoded by a solution. Hyperplane offsets are moved inside the gap
/// between the left and right point sets when the solution leaves points
/// exactly on a hyperplane that should route them right.
ObliqueTree extract_tree(std::span<const double> values, const VariableIndexMap& map,
                         const Dataset& data);

/// Feasible variable values encoding `tree`. Each hyperplane is shrunk if
/// needed so |g_b - <h_b, x_i>| <= M for every point.
std::vector<double> embed_warm_start(const ObliqueTree& tree, const Dataset& data,
                                     const VariableIndexMap& map, std::size_t num_variables);

struct ObjectiveTerms {
  double misclassified = 0.0;  ///< weighted sum of c
  double margin = 0.0;         ///< sum of m
  double l1 = 0.0;             ///< sum of h+ + h-
};

ObjectiveTerms objective_terms(std::span<const double> values, const VariableIndexMap& map,
                               std::span<const double> point_weights = {});

}  // namespace odtmip
