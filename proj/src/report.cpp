#include "odtmip/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "odtmip/error.hpp"

namespace odtmip {
namespace {

using Json = nlohmann::ordered_json;

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json params_json(const Svm1OdtParams& p) {
  return Json{{"depth", p.depth},       {"alpha1", p.alpha1},
              {"alpha2", p.alpha2},     {"epsilon", p.epsilon},
              {"big_m", p.big_m},       {"relax_u", p.relax_u},
              {"rescale_to_unit_M", p.rescale_to_unit_M},
              {"cuts", p.add_cuts},     {"seed", p.seed}};
}

Json selection_params_json(const SelectionParams& s) {
  return Json{{"eps_prime", s.eps_prime}, {"beta1", s.beta1}, {"beta2", s.beta2},
              {"seed", s.seed}};
}

Json grid_json(const GridPoint& g) {
  return Json{{"epsilon", g.epsilon}, {"alpha1", g.alpha1}, {"alpha2", g.alpha2},
              {"beta1", g.beta1},     {"beta2", g.beta2}};
}

Json scaler_json(const MinMaxScaler& s) {
  return Json{{"minimum", s.minimum}, {"range", s.range}};
}

Json features_json(const std::vector<FeatureInfo>& features) {
  Json out = Json::array();
  for (const auto& f : features) {
    Json item{{"name", f.name},
              {"kind", f.kind == FeatureKind::Categorical ? "categorical" : "numeric"}};
    if (f.kind == FeatureKind::Categorical) item["values"] = f.values;
    out.push_back(std::move(item));
  }
  return out;
}

std::vector<FeatureInfo> features_from_json(const Json& doc) {
  std::vector<FeatureInfo> out;
  for (const auto& item : doc) {
    FeatureInfo f;
    f.name = item.at("name").get<std::string>();
    if (item.at("kind").get<std::string>() == "categorical") {
      f.kind = FeatureKind::Categorical;
      f.values = item.at("values").get<std::vector<std::string>>();
    }
    out.push_back(std::move(f));
  }
  return out;
}

std::string fixed(double v, int digits) {
  if (!std::isfinite(v)) return kMissing;
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", digits, v);
  return buffer;
}

std::string percent(double v) { return fixed(100.0 * v, 2); }

// Display width in code points, so the placeholder dash counts as one.
std::size_t width(const std::string& s) {
  std::size_t n = 0;
  for (const unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string params_summary(const RunReport& r) {
  std::ostringstream out;
  out << "D=" << r.params.depth << " eps=" << r.params.epsilon << " a1=" << r.params.alpha1
      << " a2=" << r.params.alpha2;
  if (r.selection) out << " b1=" << r.selection->beta1 << " b2=" << r.selection->beta2;
  return out.str();
}

std::vector<std::vector<std::string>> benchmark_cells(const std::vector<RunReport>& reports,
                                                      const std::vector<std::string>& names) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"field"};
  for (std::size_t k = 0; k < reports.size(); ++k) {
    header.push_back(k < names.size() && !names[k].empty() ? names[k]
                                                            : to_string(reports[k].method));
  }
  rows.push_back(header);
  const auto add = [&](const std::string& field, auto cell) {
    std::vector<std::string> row{field};
    for (const auto& r : reports) row.push_back(cell(r));
    rows.push_back(std::move(row));
  };
  add("test accuracy (%)", [](const RunReport& r) { return percent(r.test_accuracy); });
  add("train accuracy (%)", [](const RunReport& r) { return percent(r.train_accuracy); });
  add("CART test accuracy (%)", [](const RunReport& r) { return percent(r.cart_test_accuracy); });
  add("CART train accuracy (%)",
      [](const RunReport& r) { return percent(r.cart_train_accuracy); });
  add("running time (s)", [](const RunReport& r) {
    return r.method == Method::Cart ? std::string(kMissing) : fixed(r.solve_seconds, 2);
  });
  add("selected data (%)", [](const RunReport& r) {
    return r.selection_fraction ? percent(*r.selection_fraction) : std::string(kMissing);
  });
  add("status", [](const RunReport& r) { return r.status == "n/a" ? kMissing : r.status; });
  add("gap", [](const RunReport& r) { return fixed(r.gap, 4); });
  add("parameters", params_summary);
  return rows;
}

}  // namespace

std::string report_json(const RunReport& r, bool include_timing) {
  Json doc;
  doc["method"] = to_string(r.method);
  doc["dataset"] = r.dataset;
  doc["params"] = params_json(r.params);
  doc["selection"] = r.selection ? selection_params_json(*r.selection) : Json(nullptr);
  doc["train_rows"] = r.train_rows;
  doc["test_rows"] = r.test_rows;
  doc["mip_rows"] = r.mip_rows;
  doc["train_accuracy"] = r.train_accuracy;
  doc["test_accuracy"] = r.test_accuracy;
  doc["cart_train_accuracy"] = r.cart_train_accuracy;
  doc["cart_test_accuracy"] = r.cart_test_accuracy;
  doc["mip_train_accuracy"] = r.mip_train_accuracy;
  if (include_timing) doc["solve_seconds"] = r.solve_seconds;
  doc["status"] = r.status;
  doc["objective"] = number_or_null(r.objective);
  doc["best_bound"] = number_or_null(r.best_bound);
  doc["gap"] = number_or_null(r.gap);
  doc["incumbent_is_warm_start"] = r.incumbent_is_warm_start;
  doc["kept_warm_start_tree"] = r.kept_warm_start_tree;
  doc["selection_fraction"] =
      r.selection_fraction ? Json(*r.selection_fraction) : Json(nullptr);
  Json objectives = Json::array();
  for (const double v : r.objective_trace) objectives.push_back(number_or_null(v));
  doc["objective_trace"] = std::move(objectives);
  doc["accuracy_trace"] = r.accuracy_trace;
  if (!r.folds.empty()) {
    Json folds = Json::array();
    for (const auto& f : r.folds) {
      folds.push_back(Json{{"point", grid_json(f.point)},
                           {"fold", f.fold},
                           {"validation_accuracy", f.validation_accuracy}});
    }
    doc["folds"] = std::move(folds);
  }
  if (r.chosen) doc["chosen"] = grid_json(*r.chosen);
  doc["tree"] = Json::parse(tree_to_json(r.tree));
  if (!r.scaler.minimum.empty()) doc["scaler"] = scaler_json(r.scaler);
  doc["label_names"] = r.label_names;
  doc["features"] = features_json(r.features);
  return doc.dump(2) + "\n";
}

std::string reports_csv(const std::vector<RunReport>& reports, bool include_timing) {
  std::ostringstream out;
  out << "method,dataset,depth,epsilon,alpha1,alpha2,beta1,beta2,train_rows,test_rows,mip_rows,"
         "train_accuracy,test_accuracy,cart_train_accuracy,cart_test_accuracy,status,objective,"
         "gap,selection_fraction";
  if (include_timing) out << ",solve_seconds";
  out << '\n';
  const auto num = [](double v) {
    if (!std::isfinite(v)) return std::string();
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.17g", v);
    return std::string(buffer);
  };
  for (const auto& r : reports) {
    out << to_string(r.method) << ',' << csv_cell(r.dataset) << ',' << r.params.depth << ','
        << num(r.params.epsilon) << ',' << num(r.params.alpha1) << ',' << num(r.params.alpha2)
        << ',' << (r.selection ? num(r.selection->beta1) : "") << ','
        << (r.selection ? num(r.selection->beta2) : "") << ',' << r.train_rows << ','
        << r.test_rows << ',' << r.mip_rows << ',' << num(r.train_accuracy) << ','
        << num(r.test_accuracy) << ',' << num(r.cart_train_accuracy) << ','
        << num(r.cart_test_accuracy) << ',' << csv_cell(r.status) << ',' << num(r.objective)
        << ',' << num(r.gap) << ','
        << (r.selection_fraction ? num(*r.selection_fraction) : "");
    if (include_timing) out << ',' << num(r.solve_seconds);
    out << '\n';
  }
  return out.str();
}

std::string benchmark_text(const std::vector<RunReport>& reports,
                           const std::vector<std::string>& names) {
  const auto rows = benchmark_cells(reports, names);
  std::vector<std::size_t> widths(rows.front().size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], width(row[c]));
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::string pad(widths[c] - width(row[c]), ' ');
      if (c == 0) {
        out << row[c] << pad;
      } else {
        out << "  " << pad << row[c];
      }
    }
    out << '\n';
  }
  return out.str();
}

std::string benchmark_csv(const std::vector<RunReport>& reports,
                          const std::vector<std::string>& names) {
  std::ostringstream out;
  for (const auto& row : benchmark_cells(reports, names)) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv_cell(row[c]);
    out << '\n';
  }
  return out.str();
}

TrainedModel trained_model(const RunReport& report, const std::string& label_column) {
  return TrainedModel{report.tree, report.scaler, report.label_names, report.features,
                      label_column};
}

std::string model_json(const TrainedModel& m) {
  Json doc;
  doc["tree"] = Json::parse(tree_to_json(m.tree));
  doc["scaler"] = scaler_json(m.scaler);
  doc["label_column"] = m.label_column;
  doc["label_names"] = m.label_names;
  doc["features"] = features_json(m.features);
  return doc.dump(2) + "\n";
}

TrainedModel model_from_json(const std::string& text) {
  try {
    const auto doc = Json::parse(text);
    TrainedModel m;
    m.tree = tree_from_json(doc.at("tree").dump());
    m.scaler.minimum = doc.at("scaler").at("minimum").get<std::vector<double>>();
    m.scaler.range = doc.at("scaler").at("range").get<std::vector<double>>();
    m.label_column = doc.at("label_column").get<std::string>();
    m.label_names = doc.at("label_names").get<std::vector<std::string>>();
    m.features = features_from_json(doc.at("features"));
    if (m.features.size() != m.tree.dims() || m.scaler.minimum.size() != m.tree.dims()) {
      throw Error(ErrorCode::Parse, "model parts disagree on the column count");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("model JSON: ") + e.what());
  }
}

Prediction predict_csv(const TrainedModel& m, const std::string& csv_text) {
  const Dataset raw = parse_csv_with_schema(csv_text, m.features, m.label_names, m.label_column);
  const Dataset data = m.scaler.apply(raw);
  Prediction out;
  std::size_t hits = 0;
  bool labelled = data.rows > 0;
  for (std::size_t i = 0; i < data.rows; ++i) {
    const int y = m.tree.label(route(m.tree, data.row(i)));
    const auto k = static_cast<std::size_t>(y - 1);
    out.labels.push_back(k < m.label_names.size() ? m.label_names[k] : std::to_string(y));
    if (data.labels[i] == 0) labelled = false;
    hits += data.labels[i] == y;
  }
  if (labelled) out.accuracy = static_cast<double>(hits) / static_cast<double>(data.rows);
  return out;
}

std::string selection_json(const Dataset& data, const DataSelection& selection) {
  const auto branch_name = [](SelectionBranch b) {
    switch (b) {
      case SelectionBranch::DropInterior: return "drop_interior";
      case SelectionBranch::Heavy: return "heavy";
      case SelectionBranch::Hyperplane: return "hyperplane";
      case SelectionBranch::None: break;
    }
    return "none";
  };
  const auto origin = [&](std::size_t row) {
    return data.origin.empty() ? row : data.origin[row];
  };
  Json doc;
  doc["rows"] = data.rows;
  doc["selected"] = selection.rows.size();
  doc["fraction"] = selection.fraction(data.rows);
  Json missed = Json::array();
  for (const auto i : selection.misclassified) missed.push_back(origin(i));
  doc["misclassified"] = std::move(missed);
  Json clusters = Json::array();
  for (std::size_t k = 0; k < selection.clusters.size(); ++k) {
    const auto& c = selection.clusters[k];
    const auto rows_of = [&](const std::vector<std::size_t>& positions) {
      Json out = Json::array();
      for (const auto p : positions) out.push_back(origin(c.members[p]));
      return out;
    };
    clusters.push_back(Json{{"leaf", selection.cluster_leaf[k]},
                            {"size", c.members.size()},
                            {"branch", branch_name(c.branch)},
                            {"interior", rows_of(c.interior)},
                            {"heavy", rows_of(c.heavy)},
                            {"selected", rows_of(c.selected)}});
  }
  doc["clusters"] = std::move(clusters);
  return doc.dump(2) + "\n";
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace odtmip
