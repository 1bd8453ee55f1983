#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace odtmip {

class ObliqueTree;

enum class FeatureKind { Numeric, Categorical };

struct FeatureInfo {
  std::string name;
  FeatureKind kind = FeatureKind::Numeric;
  /// Declared value set V_j of a categorical column. Cells hold the index
  /// of their value in this list.
  std::vector<std::string> values;
};

/// Labelled training data. Labels are 1..num_classes; class_sizes[k - 1]
/// counts label k. `origin` maps each row back to the row it came from in
/// the loaded file (selection and splitting preserve it).
struct Dataset {
  std::size_t rows = 0;
  std::size_t dims = 0;
  std::vector<double> points;  ///< row-major rows x dims
  std::vector<int> labels;
  int num_classes = 0;
  std::vector<std::size_t> class_sizes;
  std::vector<FeatureInfo> features;
  std::vector<std::string> label_names;
  std::vector<std::size_t> origin;

  std::span<const double> row(std::size_t i) const {
    return {points.data() + i * dims, dims};
  }
  double at(std::size_t i, std::size_t j) const { return points[i * dims + j]; }
  bool has_categorical() const;
  std::vector<std::size_t> categorical_features() const;
  std::vector<std::size_t> numeric_features() const;

  /// Rows `indices` in order; labels keep their encoding.
  Dataset subset(std::span<const std::size_t> indices) const;
};

/// Builds a numeric dataset from rows and 1-based labels, validating the
/// Dataset invariants. Throws SingleClass when fewer than two classes.
Dataset make_dataset(std::vector<std::vector<double>> rows, std::vector<int> labels,
                     int num_classes = 0);

struct CsvOptions {
  std::string label_column = "class";
  std::vector<std::string> categorical_columns;
};

/// Reads a comma-separated file with a header row. Labels are re-encoded
/// to 1..Y in order of first appearance.
Dataset load_csv(const std::string& path, const CsvOptions& options);
Dataset parse_csv(const std::string& text, const CsvOptions& options);

/// Reads rows against a known schema: feature columns are matched by name
/// (extra columns are ignored), categorical cells are coded by
/// features[j].values and labels by `label_names`. Labels are 0 when the
/// label column is absent or holds an unseen value; no class checks apply.
Dataset parse_csv_with_schema(const std::string& text, const std::vector<FeatureInfo>& features,
                              const std::vector<std::string>& label_names,
                              const std::string& label_column);

/// Writes the dataset (decoded labels, category names) with a header row.
void write_csv(const std::string& path, const Dataset& data, const std::string& label_column);

/// Per-column min-max map fitted on one dataset and applied to others.
struct MinMaxScaler {
  std::vector<double> minimum;
  std::vector<double> range;  ///< zero for constant columns

  static MinMaxScaler fit(const Dataset& data);
  Dataset apply(const Dataset& data) const;
};

/// Numeric columns scaled to [0, 1]; constant columns become zeros.
Dataset normalize(const Dataset& data);

struct ClassPartition {
  std::vector<std::vector<std::size_t>> members;  ///< members[k - 1] = N_k
  std::vector<std::size_t> sorted_sizes;          ///< s_1 <= ... <= s_Y
};

ClassPartition class_partition(const Dataset& data);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  /// Stratified folds partitioning `train`.
  std::vector<std::vector<std::size_t>> folds;
};

/// Stratified train/test split plus stratified folds of the train part.
/// Deterministic for a fixed seed.
Split stratified_split(const Dataset& data, double train_fraction, std::size_t folds,
                       std::uint64_t seed);

/// Stratified folds over the given row indices.
std::vector<std::vector<std::size_t>> stratified_folds(const Dataset& data,
                                                       std::span<const std::size_t> indices,
                                                       std::size_t folds, std::uint64_t seed);

struct Cluster {
  std::size_t leaf = 0;
  int label = 0;
  std::vector<std::size_t> members;  ///< row indices, ascending
};

struct LeafClusters {
  std::vector<Cluster> clusters;          ///< ordered by leaf
  std::vector<std::size_t> misclassified;  ///< the set I, ascending
};

/// One cluster per leaf holding the correctly classified rows routed
/// there; misclassified rows are returned separately. Empty leaves emit
/// no cluster.
LeafClusters cluster_by_leaf(const Dataset& data, const ObliqueTree& tree);

}  // namespace odtmip
