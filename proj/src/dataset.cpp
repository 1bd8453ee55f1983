#include "odtmip/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "odtmip/error.hpp"
#include "odtmip/tree.hpp"

namespace odtmip {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r')) ++a;
  while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
  return std::string(s.substr(a, b - a));
}

// RFC 4180 style: fields may be quoted, "" escapes a quote inside quotes.
std::vector<std::vector<std::string>> split_records(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  bool any = false;
  auto end_field = [&] {
    fields.push_back(was_quoted ? field : trim(field));
    field.clear();
    was_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    const bool blank = fields.size() == 1 && fields[0].empty();
    if (!blank) records.push_back(std::move(fields));
    fields.clear();
    any = false;
  };
  for (std::size_t k = 0; k < text.size(); ++k) {
    const char c = text[k];
    if (quoted) {
      if (c == '"') {
        if (k + 1 < text.size() && text[k + 1] == '"') {
          field += '"';
          ++k;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && trim(field).empty()) {
      field.clear();
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      end_record();
      continue;
    } else {
      field += c;
    }
    any = true;
  }
  if (quoted) throw Error(ErrorCode::Parse, "unterminated quoted field");
  if (any || !field.empty() || !fields.empty()) end_record();
  return records;
}

double parse_number(const std::string& cell, std::size_t line, const std::string& column) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (cell.empty() || ec != std::errc() || ptr != last) {
    throw Error(ErrorCode::Parse, "line " + std::to_string(line) + ", column '" + column +
                                      "': '" + cell + "' is not a number");
  }
  return value;
}

void fill_class_sizes(Dataset& data) {
  data.class_sizes.assign(static_cast<std::size_t>(data.num_classes), 0);
  for (const int y : data.labels) ++data.class_sizes[static_cast<std::size_t>(y - 1)];
}

std::string format_number(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

bool Dataset::has_categorical() const {
  return std::any_of(features.begin(), features.end(),
                     [](const FeatureInfo& f) { return f.kind == FeatureKind::Categorical; });
}

std::vector<std::size_t> Dataset::categorical_features() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < features.size(); ++j) {
    if (features[j].kind == FeatureKind::Categorical) out.push_back(j);
  }
  return out;
}

std::vector<std::size_t> Dataset::numeric_features() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < features.size(); ++j) {
    if (features[j].kind == FeatureKind::Numeric) out.push_back(j);
  }
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.rows = indices.size();
  out.dims = dims;
  out.num_classes = num_classes;
  out.features = features;
  out.label_names = label_names;
  out.points.reserve(indices.size() * dims);
  out.labels.reserve(indices.size());
  out.origin.reserve(indices.size());
  for (const std::size_t i : indices) {
    if (i >= rows) throw Error(ErrorCode::InvalidArgument, "subset index out of range");
    const auto r = row(i);
    out.points.insert(out.points.end(), r.begin(), r.end());
    out.labels.push_back(labels[i]);
    out.origin.push_back(origin.empty() ? i : origin[i]);
  }
  fill_class_sizes(out);
  return out;
}

Dataset make_dataset(std::vector<std::vector<double>> rows, std::vector<int> labels,
                     int num_classes) {
  if (rows.size() != labels.size()) {
    throw Error(ErrorCode::DimensionMismatch, "row and label counts differ");
  }
  Dataset data;
  data.rows = rows.size();
  data.dims = rows.empty() ? 0 : rows.front().size();
  const int max_label = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
  data.num_classes = num_classes > 0 ? num_classes : max_label;
  if (data.num_classes < 2) throw Error(ErrorCode::SingleClass, "need at least two classes");
  for (const int y : labels) {
    if (y < 1 || y > data.num_classes) {
      throw Error(ErrorCode::InvalidArgument, "label " + std::to_string(y) + " outside 1.." +
                                                  std::to_string(data.num_classes));
    }
  }
  data.points.reserve(data.rows * data.dims);
  for (const auto& r : rows) {
    if (r.size() != data.dims) throw Error(ErrorCode::DimensionMismatch, "ragged rows");
    data.points.insert(data.points.end(), r.begin(), r.end());
  }
  data.labels = std::move(labels);
  for (std::size_t j = 0; j < data.dims; ++j) {
    data.features.push_back({"x" + std::to_string(j + 1), FeatureKind::Numeric, {}});
  }
  for (int k = 1; k <= data.num_classes; ++k) data.label_names.push_back(std::to_string(k));
  data.origin.resize(data.rows);
  std::iota(data.origin.begin(), data.origin.end(), std::size_t{0});
  fill_class_sizes(data);
  return data;
}

Dataset parse_csv(const std::string& text, const CsvOptions& options) {
  const auto records = split_records(text);
  if (records.empty()) throw Error(ErrorCode::Parse, "empty file");
  const auto& header = records.front();
  const auto label_it = std::find(header.begin(), header.end(), options.label_column);
  if (label_it == header.end()) {
    throw Error(ErrorCode::MissingColumn, "label column '" + options.label_column + "' not found");
  }
  const auto label_col = static_cast<std::size_t>(label_it - header.begin());
  for (const auto& name : options.categorical_columns) {
    if (std::find(header.begin(), header.end(), name) == header.end()) {
      throw Error(ErrorCode::MissingColumn, "categorical column '" + name + "' not found");
    }
  }
  if (records.size() < 2) throw Error(ErrorCode::Parse, "no data rows");

  Dataset data;
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == label_col) continue;
    feature_cols.push_back(c);
    FeatureInfo info{header[c], FeatureKind::Numeric, {}};
    if (std::find(options.categorical_columns.begin(), options.categorical_columns.end(),
                  header[c]) != options.categorical_columns.end()) {
      info.kind = FeatureKind::Categorical;
    }
    data.features.push_back(std::move(info));
  }
  data.dims = feature_cols.size();
  data.rows = records.size() - 1;
  data.points.reserve(data.rows * data.dims);

  std::unordered_map<std::string, int> label_codes;
  std::vector<std::unordered_map<std::string, int>> value_codes(data.dims);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != header.size()) {
      throw Error(ErrorCode::Parse, "line " + std::to_string(r + 1) + " has " +
                                        std::to_string(rec.size()) + " fields, expected " +
                                        std::to_string(header.size()));
    }
    for (std::size_t j = 0; j < data.dims; ++j) {
      const auto& cell = rec[feature_cols[j]];
      auto& info = data.features[j];
      if (info.kind == FeatureKind::Categorical) {
        auto [it, inserted] = value_codes[j].try_emplace(cell, static_cast<int>(info.values.size()));
        if (inserted) info.values.push_back(cell);
        data.points.push_back(it->second);
      } else {
        data.points.push_back(parse_number(cell, r + 1, info.name));
      }
    }
    const auto& label = rec[label_col];
    auto [it, inserted] =
        label_codes.try_emplace(label, static_cast<int>(data.label_names.size()) + 1);
    if (inserted) data.label_names.push_back(label);
    data.labels.push_back(it->second);
  }
  data.num_classes = static_cast<int>(data.label_names.size());
  if (data.num_classes < 2) {
    throw Error(ErrorCode::SingleClass, "label column '" + options.label_column +
                                            "' holds a single class");
  }
  data.origin.resize(data.rows);
  std::iota(data.origin.begin(), data.origin.end(), std::size_t{0});
  fill_class_sizes(data);
  return data;
}

Dataset parse_csv_with_schema(const std::string& text, const std::vector<FeatureInfo>& features,
                              const std::vector<std::string>& label_names,
                              const std::string& label_column) {
  const auto records = split_records(text);
  if (records.empty()) throw Error(ErrorCode::Parse, "empty file");
  const auto& header = records.front();
  const auto column = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) -
                                    header.begin());
  };
  std::vector<std::size_t> cols;
  for (const auto& f : features) {
    const auto c = column(f.name);
    if (c == header.size()) throw Error(ErrorCode::MissingColumn, "column '" + f.name + "' not found");
    cols.push_back(c);
  }
  const auto label_col = column(label_column);

  Dataset data;
  data.features = features;
  data.label_names = label_names;
  data.num_classes = static_cast<int>(label_names.size());
  data.dims = features.size();
  data.rows = records.size() - 1;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != header.size()) {
      throw Error(ErrorCode::Parse, "line " + std::to_string(r + 1) + " has " +
                                        std::to_string(rec.size()) + " fields, expected " +
                                        std::to_string(header.size()));
    }
    for (std::size_t j = 0; j < data.dims; ++j) {
      const auto& cell = rec[cols[j]];
      const auto& f = features[j];
      if (f.kind == FeatureKind::Categorical) {
        const auto it = std::find(f.values.begin(), f.values.end(), cell);
        if (it == f.values.end()) {
          throw Error(ErrorCode::Categorical,
                      "value '" + cell + "' is not in the value set of '" + f.name + "'");
        }
        data.points.push_back(static_cast<double>(it - f.values.begin()));
      } else {
        data.points.push_back(parse_number(cell, r + 1, f.name));
      }
    }
    int label = 0;
    if (label_col < header.size()) {
      const auto it = std::find(label_names.begin(), label_names.end(), rec[label_col]);
      if (it != label_names.end()) label = static_cast<int>(it - label_names.begin()) + 1;
    }
    data.labels.push_back(label);
  }
  data.origin.resize(data.rows);
  std::iota(data.origin.begin(), data.origin.end(), std::size_t{0});
  data.class_sizes.assign(label_names.size(), 0);
  for (const int y : data.labels) {
    if (y > 0) ++data.class_sizes[static_cast<std::size_t>(y - 1)];
  }
  return data;
}

Dataset load_csv(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), options);
}

void write_csv(const std::string& path, const Dataset& data, const std::string& label_column) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  for (const auto& f : data.features) out << quote_if_needed(f.name) << ',';
  out << quote_if_needed(label_column) << '\n';
  for (std::size_t i = 0; i < data.rows; ++i) {
    for (std::size_t j = 0; j < data.dims; ++j) {
      const auto& f = data.features[j];
      const double v = data.at(i, j);
      if (f.kind == FeatureKind::Categorical) {
        out << quote_if_needed(f.values.at(static_cast<std::size_t>(v))) << ',';
      } else {
        out << format_number(v) << ',';
      }
    }
    const auto y = static_cast<std::size_t>(data.labels[i] - 1);
    out << quote_if_needed(y < data.label_names.size() ? data.label_names[y]
                                                        : std::to_string(data.labels[i]))
        << '\n';
  }
}

MinMaxScaler MinMaxScaler::fit(const Dataset& data) {
  MinMaxScaler s;
  s.minimum.assign(data.dims, 0.0);
  s.range.assign(data.dims, 0.0);
  for (std::size_t j = 0; j < data.dims; ++j) {
    if (data.features[j].kind == FeatureKind::Categorical) continue;
    double lo = kInf;
    double hi = -kInf;
    for (std::size_t i = 0; i < data.rows; ++i) {
      const double v = data.at(i, j);
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::NonFinite, "column '" + data.features[j].name +
                                              "' holds a non-finite value");
      }
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (data.rows == 0) continue;
    s.minimum[j] = lo;
    s.range[j] = hi - lo;
  }
  return s;
}

Dataset MinMaxScaler::apply(const Dataset& data) const {
  if (data.dims != minimum.size()) {
    throw Error(ErrorCode::DimensionMismatch, "scaler fitted on a different column count");
  }
  Dataset out = data;
  for (std::size_t j = 0; j < data.dims; ++j) {
    if (data.features[j].kind == FeatureKind::Categorical) continue;
    for (std::size_t i = 0; i < data.rows; ++i) {
      double& v = out.points[i * data.dims + j];
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::NonFinite, "column '" + data.features[j].name +
                                              "' holds a non-finite value");
      }
      v = range[j] > 0.0 ? (v - minimum[j]) / range[j] : 0.0;
    }
  }
  return out;
}

Dataset normalize(const Dataset& data) { return MinMaxScaler::fit(data).apply(data); }

ClassPartition class_partition(const Dataset& data) {
  ClassPartition p;
  p.members.resize(static_cast<std::size_t>(data.num_classes));
  for (std::size_t i = 0; i < data.rows; ++i) {
    p.members[static_cast<std::size_t>(data.labels[i] - 1)].push_back(i);
  }
  for (const auto& m : p.members) p.sorted_sizes.push_back(m.size());
  std::sort(p.sorted_sizes.begin(), p.sorted_sizes.end());
  return p;
}

std::vector<std::vector<std::size_t>> stratified_folds(const Dataset& data,
                                                       std::span<const std::size_t> indices,
                                                       std::size_t folds, std::uint64_t seed) {
  if (folds < 1) throw Error(ErrorCode::InvalidArgument, "folds must be at least 1");
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(data.num_classes));
  for (const std::size_t i : indices) {
    by_class[static_cast<std::size_t>(data.labels.at(i) - 1)].push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> out(folds);
  std::size_t next = 0;
  for (std::size_t k = 0; k < by_class.size(); ++k) {
    auto& members = by_class[k];
    if (!members.empty() && members.size() < folds) {
      throw Error(ErrorCode::InvalidArgument,
                  "class " + std::to_string(k + 1) + " has " + std::to_string(members.size()) +
                      " samples, fewer than " + std::to_string(folds) + " folds");
    }
    std::shuffle(members.begin(), members.end(), rng);
    for (const std::size_t i : members) {
      out[next].push_back(i);
      next = (next + 1) % folds;
    }
  }
  for (auto& f : out) std::sort(f.begin(), f.end());
  return out;
}

Split stratified_split(const Dataset& data, double train_fraction, std::size_t folds,
                       std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "train fraction must lie in (0, 1)");
  }
  if (folds < 1) throw Error(ErrorCode::InvalidArgument, "folds must be at least 1");
  const auto partition = class_partition(data);
  const std::size_t classes = partition.members.size();

  // Largest-remainder apportionment of round(fraction * n) across classes.
  const auto total = static_cast<std::size_t>(std::llround(train_fraction * data.rows));
  std::vector<std::size_t> quota(classes);
  std::vector<double> remainder(classes);
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < classes; ++k) {
    const double exact = train_fraction * static_cast<double>(partition.members[k].size());
    quota[k] = static_cast<std::size_t>(std::floor(exact));
    remainder[k] = exact - std::floor(exact);
    assigned += quota[k];
  }
  std::vector<std::size_t> order(classes);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t r = 0; assigned < total && r < classes; ++r) {
    const std::size_t k = order[r];
    if (quota[k] < partition.members[k].size()) {
      ++quota[k];
      ++assigned;
    }
  }

  std::mt19937_64 rng(seed);
  Split split;
  for (std::size_t k = 0; k < classes; ++k) {
    auto members = partition.members[k];
    std::shuffle(members.begin(), members.end(), rng);
    split.train.insert(split.train.end(), members.begin(), members.begin() + quota[k]);
    split.test.insert(split.test.end(), members.begin() + quota[k], members.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  split.folds = stratified_folds(data, split.train, folds, rng());
  return split;
}

LeafClusters cluster_by_leaf(const Dataset& data, const ObliqueTree& tree) {
  if (tree.dims() != data.dims) {
    throw Error(ErrorCode::DimensionMismatch, "tree has " + std::to_string(tree.dims()) +
                                                  " features, data has " +
                                                  std::to_string(data.dims));
  }
  std::map<std::size_t, std::vector<std::size_t>> members;
  LeafClusters out;
  for (std::size_t i = 0; i < data.rows; ++i) {
    const std::size_t leaf = route(tree, data.row(i));
    if (tree.label(leaf) == data.labels[i]) {
      members[leaf].push_back(i);
    } else {
      out.misclassified.push_back(i);
    }
  }
  for (auto& [leaf, rows] : members) {
    out.clusters.push_back({leaf, tree.label(leaf), std::move(rows)});
  }
  return out;
}

}  // namespace odtmip
