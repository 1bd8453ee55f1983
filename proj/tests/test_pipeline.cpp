#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "json.hpp"
#include "odtmip/error.hpp"
#include "odtmip/pipeline.hpp"
#include "odtmip/report.hpp"

using namespace odtmip;

namespace {

Dataset separable(std::size_t per_class, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const double x = u(rng);
    const double y = u(rng);
    const int label = i % 2 + 1;
    // Class 2 lies in [0.6, 1.6]^2, class 1 in [-0.6, 0.4]^2.
    const double shift = label == 2 ? 0.6 : -0.6;
    rows.push_back({x + shift, y + shift});
    labels.push_back(label);
  }
  return make_dataset(rows, labels);
}

RunConfig quick_config(Method m) {
  RunConfig c;
  c.method = m;
  c.params.depth = 1;
  c.time_limit_seconds = 20.0;
  c.folds = 2;
  return c;
}

}  // namespace

TEST(Methods, NamesRoundTrip) {
  for (const auto m : {Method::Cart, Method::S1O, Method::S1ODS, Method::Iterative}) {
    EXPECT_EQ(parse_method(to_string(m)), m);
  }
  EXPECT_THROW(parse_method("nope"), Error);
}

TEST(DefaultGrid, EighteenDistinctPoints) {
  const auto g = default_grid();
  EXPECT_EQ(g.size(), 18u);
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = i + 1; j < g.size(); ++j) EXPECT_FALSE(g[i] == g[j]);
  }
}

TEST(RunConfigTest, Validation) {
  auto c = quick_config(Method::S1O);
  EXPECT_NO_THROW(c.validate());
  c.time_limit_seconds = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = quick_config(Method::S1O);
  c.folds = 0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(SolveTree, SmallSeparableSetIsSolvedExactly) {
  const auto raw = make_dataset({{0.1, 0.1}, {0.2, 0.3}, {0.3, 0.1}, {0.7, 0.9}, {0.8, 0.7},
                                 {0.9, 0.8}},
                                {1, 1, 1, 2, 2, 2});
  auto config = quick_config(Method::S1O);
  config.params.add_cuts = false;
  ObliqueTree warm(1, 2);
  const auto out = solve_tree(raw, warm, config.params, config);
  EXPECT_EQ(out.status, "Optimal");
  EXPECT_DOUBLE_EQ(accuracy(out.tree, raw), 1.0);
  EXPECT_DOUBLE_EQ(out.mip_accuracy, 1.0);
  EXPECT_FALSE(out.kept_warm);
}

TEST(SolveTree, TinyTimeLimitKeepsWarmStart) {
  const auto data = separable(40, 3);
  auto config = quick_config(Method::S1O);
  config.params.depth = 2;
  config.time_limit_seconds = 0.05;
  const auto warm = cart_tree(data, 2);
  const auto out = solve_tree(data, warm, config.params, config);
  EXPECT_EQ(out.status, "TimeLimit");
  EXPECT_GE(accuracy(out.tree, data), accuracy(warm, data));
}

TEST(Run, CartAndS1oOnSeparableData) {
  const auto raw = separable(10, 5);
  auto config = quick_config(Method::Cart);
  const auto prepared = prepare(raw, config);
  const auto cart = run(prepared.train, prepared.test, config);
  EXPECT_EQ(cart.status, "n/a");
  EXPECT_EQ(cart.train_accuracy, cart.cart_train_accuracy);
  config.method = Method::S1O;
  const auto s1o = run(prepared.train, prepared.test, config);
  EXPECT_GE(s1o.train_accuracy, s1o.cart_train_accuracy);
  EXPECT_EQ(s1o.mip_rows, prepared.train.rows);
  EXPECT_EQ(s1o.train_rows + s1o.test_rows, raw.rows);
}

TEST(Run, DataSelectionReportsFraction) {
  const auto raw = separable(40, 7);
  auto config = quick_config(Method::S1ODS);
  const auto prepared = prepare(raw, config);
  const auto r = run(prepared.train, prepared.test, config);
  ASSERT_TRUE(r.selection_fraction.has_value());
  EXPECT_GT(*r.selection_fraction, 0.0);
  EXPECT_LE(*r.selection_fraction, 1.0);
  EXPECT_LE(r.mip_rows, prepared.train.rows);
  EXPECT_GE(r.train_accuracy, r.cart_train_accuracy);
}

TEST(Run, IterativeTracesEveryRound) {
  const auto raw = separable(25, 9);
  auto config = quick_config(Method::Iterative);
  config.rounds = 2;
  config.time_limit_seconds = 5.0;
  const auto prepared = prepare(raw, config);
  const auto r = run(prepared.train, prepared.test, config);
  EXPECT_EQ(r.accuracy_trace.size(), 3u);
}

TEST(CrossValidate, SingletonGridAndDeterminism) {
  const auto raw = separable(8, 11);
  auto config = quick_config(Method::S1O);
  config.time_limit_seconds = 5.0;
  config.grid = {GridPoint{}};
  const auto prepared = prepare(raw, config);
  const auto a = cross_validate(prepared.train, prepared.test, config);
  EXPECT_EQ(a.status, "Optimal");
  ASSERT_TRUE(a.chosen.has_value());
  EXPECT_TRUE(*a.chosen == GridPoint{});
  EXPECT_EQ(a.folds.size(), 2u);
  const auto b = cross_validate(prepared.train, prepared.test, config);
  EXPECT_EQ(report_json(a, false), report_json(b, false));
}

TEST(Report, JsonWithoutTimingIsDeterministic) {
  const auto raw = separable(8, 13);
  auto config = quick_config(Method::S1O);
  const auto prepared = prepare(raw, config);
  const auto a = run(prepared.train, prepared.test, config);
  EXPECT_EQ(a.status, "Optimal");
  const auto b = run(prepared.train, prepared.test, config);
  const auto ja = report_json(a, false);
  EXPECT_EQ(ja, report_json(b, false));
  const auto parsed = nlohmann::json::parse(ja);
  EXPECT_FALSE(parsed.contains("solve_seconds"));
  EXPECT_TRUE(parsed.contains("tree"));
  EXPECT_TRUE(nlohmann::json::parse(report_json(a)).contains("solve_seconds"));
}

TEST(Report, BenchmarkTableShape) {
  const auto raw = separable(8, 17);
  std::vector<RunConfig> configs{quick_config(Method::Cart), quick_config(Method::S1O)};
  const auto reports = benchmark(raw, configs);
  ASSERT_EQ(reports.size(), 2u);
  EXPECT_EQ(reports[0].method, Method::Cart);
  const auto csv = benchmark_csv(reports, {"a", "b"});
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "field,a,b");
  std::size_t lines = 1;
  bool missing_seen = false;
  while (std::getline(in, line)) {
    ++lines;
    missing_seen |= line.find("—") != std::string::npos;
  }
  EXPECT_GT(lines, 5u);
  EXPECT_TRUE(missing_seen);
  const auto text = benchmark_text(reports);
  EXPECT_NE(text.find("s1o"), std::string::npos);
  EXPECT_EQ(reports_csv(reports, false).find("solve_seconds"), std::string::npos);
}

TEST(Report, PredictRoundTripThroughModelJson) {
  const std::string csv = "a,b,class\n0.1,0.2,lo\n0.2,0.1,lo\n0.9,0.8,hi\n0.8,0.9,hi\n";
  const auto data = parse_csv(csv, CsvOptions{});
  auto config = quick_config(Method::Cart);
  const auto normalized = normalize(data);
  auto r = run(normalized, normalized, config);
  r.scaler = MinMaxScaler::fit(data);
  const auto model = model_from_json(model_json(trained_model(r, "class")));
  const auto p = predict_csv(model, csv);
  EXPECT_EQ(p.labels, (std::vector<std::string>{"lo", "lo", "hi", "hi"}));
  ASSERT_TRUE(p.accuracy.has_value());
  EXPECT_DOUBLE_EQ(*p.accuracy, 1.0);
  const auto unlabeled = predict_csv(model, "b,a\n0.85,0.85\n");
  EXPECT_EQ(unlabeled.labels, (std::vector<std::string>{"hi"}));
  EXPECT_FALSE(unlabeled.accuracy.has_value());
}
