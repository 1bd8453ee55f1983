#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "odtmip/dataset.hpp"
#include "odtmip/formulation.hpp"
#include "odtmip/milp/model.hpp"
#include "odtmip/selection.hpp"
#include "odtmip/tree.hpp"

namespace odtmip {

enum class Method { Cart, S1O, S1ODS, Iterative };

const char* to_string(Method method);
Method parse_method(const std::string& name);

/// One point of the cross-validation grid.
struct GridPoint {
  double epsilon = 0.01;
  double alpha1 = 1000.0;
  double alpha2 = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.1;

  friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

/// eps in {0.005, 0.01, 0.05} x alpha1 in {30, 1000, 1e6} x alpha2 in
/// {0.01, 0.1}, betas from `base`.
std::vector<GridPoint> default_grid(const GridPoint& base = {});

struct RunConfig {
  std::string data_path;
  CsvOptions csv;
  Method method = Method::S1O;
  Svm1OdtParams params;
  SelectionParams selection;
  std::vector<GridPoint> grid;
  double time_limit_seconds = 900.0;
  double train_fraction = 0.75;
  std::size_t folds = 5;
  std::size_t rounds = 3;
  std::uint64_t seed = 0;
  std::string backend = "builtin";
  std::string output_dir;
  /// Concurrent folds in cross_validate and rows in benchmark.
  std::size_t threads = 1;

  void validate() const;
  milp::SolverConfig solver_config() const;
};

struct FoldResult {
  GridPoint point;
  std::size_t fold = 0;
  double validation_accuracy = 0.0;
};

struct RunReport {
  Method method = Method::S1O;
  std::string dataset;
  Svm1OdtParams params;
  std::optional<SelectionParams> selection;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  /// Rows handed to the MIP (all training rows unless data selection ran).
  std::size_t mip_rows = 0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  double cart_train_accuracy = 0.0;
  double cart_test_accuracy = 0.0;
  /// 1 - sum c / mip_rows at the incumbent (unweighted).
  double mip_train_accuracy = 0.0;
  double solve_seconds = 0.0;
  std::string status = "n/a";
  double objective = milp::kInfinity;
  double best_bound = -milp::kInfinity;
  double gap = milp::kInfinity;
  /// The solver did not beat the embedded warm start.
  bool incumbent_is_warm_start = false;
  /// The solved tree classified fewer training rows than the warm start,
  /// so the warm-start tree was kept.
  bool kept_warm_start_tree = false;
  std::optional<double> selection_fraction;
  std::vector<double> objective_trace;
  std::vector<double> accuracy_trace;
  std::vector<FoldResult> folds;
  std::optional<GridPoint> chosen;
  ObliqueTree tree;
  MinMaxScaler scaler;
  std::vector<std::string> label_names;
  std::vector<FeatureInfo> features;
};

struct PreparedData {
  Dataset train;  ///< normalized with the scaler fitted on the training rows
  Dataset test;
  MinMaxScaler scaler;
  Split split;
};

/// Loads the CSV, takes a stratified split and normalizes both parts with
/// the training scaler.
PreparedData prepare(const RunConfig& config);
PreparedData prepare(const Dataset& raw, const RunConfig& config);

/// Axis-parallel baseline embedded as an oblique tree of the configured depth.
ObliqueTree cart_tree(const Dataset& train, int depth);

struct SolveOutcome {
  ObliqueTree tree;
  milp::Solution solution;
  double seconds = 0.0;
  double mip_accuracy = 0.0;
  std::string status;
  /// The extracted tree misclassified more of `data` than `warm`.
  bool kept_warm = false;
};

/// Builds the model on `data`, warm-starts it from `warm`, solves and
/// extracts the tree. Without an incumbent better than the warm start the
/// returned tree is `warm` itself.
SolveOutcome solve_tree(const Dataset& data, const ObliqueTree& warm, const Svm1OdtParams& params,
                        const RunConfig& config, std::span<const double> point_weights = {});

RunReport train_cart_baseline(const Dataset& train, const Dataset& test, const RunConfig& config);
RunReport train_s1o(const Dataset& train, const Dataset& test, const RunConfig& config);
RunReport train_s1o_ds(const Dataset& train, const Dataset& test, const RunConfig& config);
/// Each round clusters by the current tree, drops the points expressed by
/// others and weights the expressing points by (|I| + 1) where I is the
/// misclassified set. accuracy_trace[0] is the starting tree.
RunReport iterative_train(const Dataset& train, const Dataset& test, const RunConfig& config);
/// Grid search by stratified k-fold validation on `train`, ties to the
/// first grid point, then a refit with the chosen point.
RunReport cross_validate(const Dataset& train, const Dataset& test, const RunConfig& config);

/// Runs config.method.
RunReport run(const Dataset& train, const Dataset& test, const RunConfig& config);
RunReport run(const RunConfig& config);

/// Runs every config on its own split of `raw`, `threads` at a time;
/// reports come back in config order.
std::vector<RunReport> benchmark(const Dataset& raw, const std::vector<RunConfig>& configs,
                                 std::size_t threads = 1);

}  // namespace odtmip
