// Acceptance gate: one PASS/FAIL line per criterion. Every tolerance and
// instance size lives in this file.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "odtmip/cuts.hpp"
#include "odtmip/formulation.hpp"
#include "odtmip/milp/backend.hpp"
#include "odtmip/milp/bnb.hpp"
#include "odtmip/pipeline.hpp"
#include "odtmip/selection.hpp"
#include "oracles.hpp"

using namespace odtmip;

namespace {

constexpr double kObjectiveTol = 1e-6;
constexpr std::uint64_t kSeed = 20240611;
constexpr int kTinyInstances = 20;
constexpr double kTinySeconds = 60.0;
constexpr double kIrisSeconds = 900.0;
constexpr double kScaleBudgetSeconds = 1800.0;
constexpr double kScaleFraction = 0.05;

struct Outcome {
  bool pass = false;
  std::string detail;
  std::string record;  // compared byte-for-byte across runs
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string pct(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.2f%%", v * 100.0);
  return buf;
}

std::string secs(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.1f s", v);
  return buf;
}

std::vector<Dataset> tiny_instances() {
  std::mt19937_64 rng(kSeed);
  std::vector<Dataset> out;
  for (int k = 0; k < kTinyInstances; ++k) {
    const auto n = 4 + static_cast<std::size_t>(rng() % 5);
    out.push_back(oracle::random_instance(rng, n, 2));
  }
  return out;
}

Svm1OdtParams tiny_params() {
  Svm1OdtParams p;
  p.depth = 1;
  p.alpha1 = 1e-4;
  p.alpha2 = 1e-4;
  p.add_cuts = false;
  return p;
}

milp::Solution solve(const Dataset& data, const Svm1OdtParams& p, BuiltModel* keep = nullptr) {
  auto built = build_model(data, p);
  auto s = milp::solve_bnb(built.model);
  if (keep) *keep = std::move(built);
  return s;
}

Outcome tiny_optimality() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  std::size_t matched = 0;
  std::ostringstream rec, detail;
  for (const auto& data : tiny_instances()) {
    BuiltModel built;
    const auto s = solve(data, tiny_params(), &built);
    const auto mip = std::lround(objective_terms(s.values, built.map).misclassified);
    const auto brute = oracle::min_errors_depth1(data);
    const auto tree_errors = misclassified_count(extract_tree(s.values, built.map, data), data);
    matched += static_cast<std::size_t>(mip) == brute;
    rec << mip << '/' << brute << '/' << tree_errors << ' ';
  }
  const double elapsed = seconds_since(t0);
  o.pass = matched == kTinyInstances && elapsed < kTinySeconds;
  detail << matched << "/" << kTinyInstances << " instances match (mip/brute/extracted: "
         << rec.str() << "), " << secs(elapsed);
  o.detail = detail.str();
  o.record = rec.str();
  return o;
}

Outcome integer_vs_relaxed_u() {
  Outcome o;
  double worst = 0.0;
  std::ostringstream rec;
  for (const auto& data : tiny_instances()) {
    auto p = tiny_params();
    const auto a = solve(data, p);
    p.relax_u = true;
    const auto b = solve(data, p);
    worst = std::max(worst, std::abs(a.objective - b.objective));
    rec << num(a.objective) << ' ' << num(b.objective) << ';';
  }
  o.pass = worst <= kObjectiveTol;
  o.detail = "max |integer - relaxed| = " + num(worst);
  o.record = rec.str();
  return o;
}

Outcome rescaling_equivalence() {
  Outcome o;
  std::mt19937_64 rng(kSeed + 3);
  double worst = 0.0;
  std::size_t prediction_mismatches = 0;
  std::ostringstream rec;
  for (int k = 0; k < 10; ++k) {
    const auto data = oracle::random_instance(rng, 4 + static_cast<std::size_t>(rng() % 4), 2);
    for (const double M : {2.0, 10.0}) {
      Svm1OdtParams raw;
      raw.depth = 1;
      raw.add_cuts = false;
      raw.big_m = M;
      raw.rescale_to_unit_M = false;
      auto scaled = rescale_to_unit_M(raw);
      scaled.rescale_to_unit_M = false;
      BuiltModel ba, bb;
      const auto a = solve(data, raw, &ba);
      const auto b = solve(data, scaled, &bb);
      worst = std::max(worst, std::abs(a.objective - b.objective));
      const auto pa = predict(extract_tree(a.values, ba.map, data), data);
      const auto pb = predict(extract_tree(b.values, bb.map, data), data);
      prediction_mismatches += pa != pb;
      rec << num(a.objective) << ' ' << num(b.objective) << ';';
    }
  }
  o.pass = worst <= kObjectiveTol && prediction_mismatches == 0;
  o.detail = "max objective difference " + num(worst) + ", " +
             std::to_string(prediction_mismatches) + " of 20 prediction mismatches";
  o.record = rec.str();
  return o;
}

Outcome cut_validity() {
  Outcome o;
  std::mt19937_64 rng(kSeed + 4);
  std::size_t violations = 0;
  std::size_t checked = 0;
  for (int k = 0; k < 500; ++k) {
    const int D = 1 + static_cast<int>(rng() % 2);
    const int Y = 2 + static_cast<int>(rng() % 3);
    const auto n = static_cast<std::size_t>(Y) + rng() % (31 - static_cast<std::size_t>(Y));
    const auto data = oracle::random_instance(rng, n, Y);
    Svm1OdtParams p;
    p.depth = D;
    p.add_cuts = false;
    const auto built = build_model(data, p);
    CutFamilyConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(k);
    const auto partition = class_partition(data);
    auto cuts = pigeonhole_cuts(partition, built.map, cfg);
    for (auto& c : class_size_cuts(partition, built.map, cfg)) cuts.push_back(std::move(c));
    checked += cuts.size();
    const auto tree = oracle::random_tree(rng, D, data.dims, Y);
    violations +=
        verify_cuts_against(tree, data, built.map, built.model.num_variables(), cuts).size();
  }
  double worst = 0.0;
  std::ostringstream rec;
  for (const auto& data : tiny_instances()) {
    auto p = tiny_params();
    const auto off = solve(data, p);
    p.add_cuts = true;
    const auto on = solve(data, p);
    worst = std::max(worst, std::abs(off.objective - on.objective));
    rec << num(off.objective) << ' ' << num(on.objective) << ';';
  }
  o.pass = violations == 0 && worst <= kObjectiveTol;
  o.detail = std::to_string(violations) + " violations over " + std::to_string(checked) +
             " cuts; cuts on vs off max difference " + num(worst);
  o.record = std::to_string(checked) + ' ' + std::to_string(violations) + ' ' + rec.str();
  return o;
}

Outcome hull_oracle() {
  Outcome o;
  std::mt19937_64 rng(kSeed + 5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t mismatched_clusters = 0;
  double worst = 0.0;
  std::ostringstream rec;
  for (int k = 0; k < 50; ++k) {
    const auto n = 3 + static_cast<std::size_t>(rng() % 10);
    std::vector<std::array<double, 2>> pts;
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (std::size_t i = 0; i < n; ++i) {
      pts.push_back({u(rng), u(rng)});
      // Some clusters get an exact midpoint or duplicate.
      if (i + 1 == n && k % 4 == 0) pts.back() = {(pts[0][0] + pts[1][0]) / 2, (pts[0][1] + pts[1][1]) / 2};
      if (i + 1 == n && k % 4 == 1) pts.back() = pts[0];
      rows.push_back({pts.back()[0], pts.back()[1]});
      labels.push_back(i == 0 ? 2 : 1);
    }
    const auto data = make_dataset(rows, labels, 2);
    std::vector<std::size_t> cluster(n);
    for (std::size_t i = 0; i < n; ++i) cluster[i] = i;
    double sum = 0.0;
    bool same = true;
    for (std::size_t j = 0; j < n; ++j) {
      const double b = selection_lp_point(data, cluster, j, 0.0).b;
      sum += b;
      same &= (b > 1.0 - 1e-9) == oracle::in_hull_of_others(pts, j);
      rec << (b > 1.0 - 1e-9);
    }
    rec << ' ';
    mismatched_clusters += !same;
    worst = std::max(worst, std::abs(sum - selection_lp_monolithic(data, cluster, 0.0)));
  }
  o.pass = mismatched_clusters == 0 && worst <= kObjectiveTol;
  o.detail = std::to_string(mismatched_clusters) +
             " of 50 clusters disagree with the hull oracle; decomposed vs monolithic max "
             "difference " + num(worst);
  o.record = rec.str();
  return o;
}

Dataset points(const std::vector<std::array<double, 2>>& pts) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    rows.push_back({pts[i][0], pts[i][1]});
    labels.push_back(i == 0 ? 2 : 1);
  }
  return make_dataset(rows, labels, 2);
}

std::string join(const std::vector<std::size_t>& v) {
  std::string s = "{";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + "}";
}

Outcome selection_branches() {
  Outcome o;
  std::ostringstream detail;
  bool ok = true;
  const auto check = [&](const char* name, const Dataset& data, const SelectionParams& p,
                         const std::vector<Branch>& planes, SelectionBranch want_branch,
                         const std::vector<std::size_t>& want) {
    std::vector<std::size_t> cluster(data.rows);
    for (std::size_t i = 0; i < data.rows; ++i) cluster[i] = i;
    const auto r = select_cluster(data, cluster, p, planes);
    const bool good = r.branch == want_branch && r.selected == want;
    ok &= good;
    detail << name << (good ? " ok " : " got ") << join(r.selected) << "; ";
    o.record += join(r.selected);
  };

  // Square plus center, beta1 = 0.9: interior share 0.2 >= 0.1, keep the corners.
  check("drop-interior", points({{0, 0}, {1, 0}, {0, 1}, {1, 1}, {0.5, 0.5}}), SelectionParams{},
        {}, SelectionBranch::DropInterior, {0, 1, 2, 3});

  // Two edge midpoints of a triangle: interior 40%, heavy {A, B, D} 60% > beta2 = 0.5.
  SelectionParams heavy;
  heavy.beta1 = 0.5;
  heavy.beta2 = 0.5;
  check("heavy", points({{0, 0}, {2, 0}, {1, 0}, {0, 2}, {0, 1}}), heavy, {},
        SelectionBranch::Heavy, {0, 1, 3});

  // Ten points in convex position, no heavy set, beta2 |N| = 3.
  std::vector<std::array<double, 2>> ring;
  for (int k = 0; k < 10; ++k) {
    ring.push_back({std::cos(2 * M_PI * k / 10), std::sin(2 * M_PI * k / 10)});
  }
  SelectionParams top;
  top.beta1 = 0.85;
  top.beta2 = 0.3;
  Branch plane;
  plane.h = {1.0, 0.3};
  plane.g = 0.1;
  check("hyperplane", points(ring), top, {plane}, SelectionBranch::Hyperplane, {2, 3, 8});

  o.pass = ok;
  o.detail = detail.str();
  return o;
}

Outcome iterative_monotone() {
  Outcome o;
  std::mt19937_64 rng(kSeed + 7);
  const auto data = oracle::random_instance(rng, 12, 2);
  RunConfig config;
  config.method = Method::Iterative;
  config.params.depth = 1;
  config.params.alpha1 = 0.0;
  config.params.alpha2 = 0.0;
  config.rounds = 3;
  config.time_limit_seconds = 600.0;
  config.backend = "builtin";
  const auto r = iterative_train(data, data, config);
  bool monotone = true;
  std::string trace;
  for (std::size_t k = 0; k < r.accuracy_trace.size(); ++k) {
    if (k > 0 && r.accuracy_trace[k] < r.accuracy_trace[k - 1]) monotone = false;
    trace += (k ? " " : "") + num(r.accuracy_trace[k]);
  }
  o.pass = monotone && r.accuracy_trace.size() == 4;
  o.detail = "accuracy trace [" + trace + "], status " + r.status;
  o.record = trace + " " + r.status;
  return o;
}

Outcome iris_echo() {
  Outcome o;
  if (!milp::BackendRegistry::global().contains("external")) {
    o.detail = "external backend unavailable";
    return o;
  }
  RunConfig config;
  config.data_path = ODTMIP_DATA_DIR "/iris.csv";
  config.method = Method::S1O;
  config.params.depth = 2;
  config.backend = "external";
  config.time_limit_seconds = kIrisSeconds;
  const auto r = run(config);
  o.pass = r.test_accuracy >= r.cart_test_accuracy && r.train_accuracy >= r.cart_train_accuracy;
  o.detail = "test " + num(r.test_accuracy) + " vs CART " + num(r.cart_test_accuracy) +
             ", train " + num(r.train_accuracy) + " vs CART " + num(r.cart_train_accuracy) +
             ", status " + r.status + ", gap " + num(r.gap);
  return o;
}

Outcome scalability() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(kSeed + 9);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 50000; ++i) {
    const double c = i % 2 ? 5.0 : 0.0;
    rows.push_back({c + z(rng), c + z(rng), c + z(rng)});
    labels.push_back(i % 2 + 1);
  }
  const auto raw = make_dataset(rows, labels);
  RunConfig config;
  config.method = Method::S1ODS;
  config.params.depth = 1;
  config.backend = milp::BackendRegistry::global().contains("external") ? "external" : "builtin";
  config.time_limit_seconds = 600.0;
  config.selection.threads = 0;
  const auto prepared = prepare(raw, config);
  const auto r = run(prepared.train, prepared.test, config);
  const double elapsed = seconds_since(t0);
  const double fraction = r.selection_fraction.value_or(1.0);
  o.pass = fraction <= kScaleFraction && r.train_accuracy >= r.cart_train_accuracy &&
           elapsed < kScaleBudgetSeconds;
  o.detail = "selected " + pct(fraction) + " of " + std::to_string(prepared.train.rows) +
             " rows, train " + num(r.train_accuracy) + " vs CART " +
             num(r.cart_train_accuracy) + ", " + config.backend + ", " +
             secs(elapsed);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::FILE* file = argc > 1 ? std::fopen(argv[1], "w") : nullptr;
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> deterministic{
      {"tiny-instance optimality vs brute force", tiny_optimality},
      {"integer-u vs relaxed-u", integer_vs_relaxed_u},
      {"rescaling equivalence", rescaling_equivalence},
      {"cut validity", cut_validity},
      {"data selection vs hull oracle", hull_oracle},
      {"selection branch logic", selection_branches},
      {"iterative accuracy non-decreasing", iterative_monotone},
  };

  int passed = 0;
  int index = 0;
  std::vector<std::string> first;
  const auto report = [&](const char* name, const Outcome& o) {
    ++index;
    passed += o.pass;
    for (std::FILE* out : {stdout, file}) {
      if (out == nullptr) continue;
      std::fprintf(out, "[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", index, name,
                   o.detail.c_str());
      std::fflush(out);
    }
  };
  for (const auto& c : deterministic) {
    const auto o = c.run();
    first.push_back(o.record);
    report(c.name, o);
  }
  report("iris, depth 2, external backend", iris_echo());
  report("50k-point selection smoke", scalability());

  Outcome det;
  det.pass = true;
  for (std::size_t k = 0; k < deterministic.size(); ++k) {
    if (deterministic[k].run().record != first[k]) {
      det.pass = false;
      det.detail += std::string(deterministic[k].name) + " differs; ";
    }
  }
  if (det.pass) det.detail = "criteria 1-7 reproduce byte-identical records";
  report("determinism across runs", det);

  std::printf("%d/%d criteria passed\n", passed, index);
  if (file != nullptr) {
    std::fprintf(file, "%d/%d criteria passed\n", passed, index);
    std::fclose(file);
  }
  return 0;
}
