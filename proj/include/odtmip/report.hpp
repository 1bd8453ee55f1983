#pragma once

#include <optional>
#include <string>
#include <vector>

#include "odtmip/dataset.hpp"
#include "odtmip/pipeline.hpp"
#include "odtmip/selection.hpp"
#include "odtmip/tree.hpp"

namespace odtmip {

/// Placeholder for fields a run did not produce.
inline constexpr const char* kMissing = "—";

/// Full report as JSON. Without `include_timing` the wall-clock fields are
/// left out so two runs of the same config produce identical bytes.
std::string report_json(const RunReport& report, bool include_timing = true);

/// One line per report under a fixed header.
std::string reports_csv(const std::vector<RunReport>& reports, bool include_timing = true);

/// Benchmark table with one column per report and one row per field (test
/// and train accuracy, CART accuracies, runtime, selection %, parameters).
/// `names` labels the columns; empty names fall back to the method.
std::string benchmark_text(const std::vector<RunReport>& reports,
                           const std::vector<std::string>& names = {});
std::string benchmark_csv(const std::vector<RunReport>& reports,
                          const std::vector<std::string>& names = {});

/// What predict needs: the tree and how raw rows reach its input space.
struct TrainedModel {
  ObliqueTree tree;
  MinMaxScaler scaler;
  std::vector<std::string> label_names;
  std::vector<FeatureInfo> features;
  std::string label_column = "class";
};

TrainedModel trained_model(const RunReport& report, const std::string& label_column);
std::string model_json(const TrainedModel& model);
TrainedModel model_from_json(const std::string& text);

struct Prediction {
  std::vector<std::string> labels;
  /// Accuracy against the label column, when every row carries a known label.
  std::optional<double> accuracy;
};

/// Applies the scaler and the tree to rows read against the model schema.
Prediction predict_csv(const TrainedModel& model, const std::string& csv_text);

/// Per-point selection detail for a cluster-by-cluster run of select_all.
std::string selection_json(const Dataset& data, const DataSelection& selection);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace odtmip
