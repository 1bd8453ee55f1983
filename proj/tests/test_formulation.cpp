#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "odtmip/cart.hpp"
#include "odtmip/error.hpp"
#include "odtmip/formulation.hpp"
#include "odtmip/milp/bnb.hpp"
#include "oracles.hpp"

using namespace odtmip;
using milp::SolveStatus;

namespace {

std::map<std::string, std::size_t> family_counts(const milp::Model& m) {
  std::map<std::string, std::size_t> out;
  for (const auto& row : m.constraints()) ++out[row.name.substr(0, row.name.find('['))];
  return out;
}

struct Solved {
  BuiltModel built;
  milp::Solution solution;
};

Solved solve(const Dataset& data, const Svm1OdtParams& params) {
  Solved s{build_model(data, params), {}};
  s.solution = milp::solve_bnb(s.built.model);
  return s;
}

Svm1OdtParams tiny_params() {
  Svm1OdtParams p;
  p.depth = 1;
  p.add_cuts = false;
  return p;
}

}  // namespace

TEST(BuildModel, VariableCountForFourPoints) {
  const auto data = make_dataset({{0, 0}, {1, 0}, {0, 1}, {1, 1}}, {1, 2, 1, 2});
  const auto built = build_model(data, tiny_params());
  EXPECT_EQ(built.model.num_variables(), 43u);
  EXPECT_EQ(built.map.c.size(), 4u);
  EXPECT_EQ(built.map.e.size(), 8u);
  EXPECT_EQ(built.map.w.size(), 8u);
  EXPECT_EQ(built.map.yhat.size(), 4u);
  EXPECT_EQ(built.map.u.size(), 2u);
  EXPECT_EQ(built.map.h_plus.size() + built.map.h_minus.size(), 4u);
  EXPECT_EQ(built.map.g.size(), 1u);
  EXPECT_EQ(built.map.p_plus.size() + built.map.p_minus.size(), 8u);
  EXPECT_EQ(built.map.m.size(), 4u);
}

TEST(BuildModel, ConstraintFamiliesMatchClosedForm) {
  std::mt19937_64 rng(1);
  for (int D = 1; D <= 3; ++D) {
    const std::size_t n = 3 + static_cast<std::size_t>(D);
    const auto data = oracle::random_instance(rng, n, 2);
    auto p = tiny_params();
    p.depth = D;
    const auto built = build_model(data, p);
    const auto counts = family_counts(built.model);
    const std::size_t leaves = std::size_t{1} << D;
    const std::size_t branches = leaves - 1;
    const std::size_t per_side = static_cast<std::size_t>(D) * leaves / 2;
    EXPECT_EQ(counts.at("label_lo"), n);
    EXPECT_EQ(counts.at("label_hi"), n);
    EXPECT_EQ(counts.at("yhat"), n);
    for (const char* f : {"mc_lo1", "mc_lo2", "mc_hi1", "mc_hi2"}) {
      EXPECT_EQ(counts.at(f), n * leaves);
    }
    EXPECT_EQ(counts.at("split"), n * branches);
    for (const char* f : {"bigm_left", "bigm_right", "margin_left", "margin_right"}) {
      EXPECT_EQ(counts.at(f), n * per_side);
    }
    EXPECT_EQ(counts.at("assign"), n);
    EXPECT_EQ(built.model.count_tagged(milp::ConstraintTag::UserCut), 0u);
    EXPECT_EQ(built.model.num_variables(),
              n * (2 + 2 * leaves + 3 * branches) + leaves + branches * (2 * data.dims + 1));
  }
}

TEST(BuildModel, Errors) {
  const auto data = make_dataset({{0.0}, {1.0}}, {1, 2});
  auto p = tiny_params();
  p.epsilon = 2.0;
  p.rescale_to_unit_M = false;
  EXPECT_THROW(build_model(data, p), Error);
  CsvOptions opt;
  opt.categorical_columns = {"c"};
  const auto cat = parse_csv("c,x,class\na,0,1\nb,1,2\n", opt);
  try {
    build_model(cat, tiny_params());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Categorical);
  }
}

TEST(BuildModel, SinglePointHasZeroObjective) {
  const auto data = make_dataset({{0.3, 0.7}}, {1}, 2);
  const auto s = solve(data, tiny_params());
  ASSERT_EQ(s.solution.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.solution.objective, 0.0, 1e-9);
  EXPECT_NEAR(s.solution.values[s.built.map.c[0].pos()], 0.0, 1e-9);
}

TEST(BuildModel, TwoSeparablePoints) {
  const auto data = make_dataset({{0.0, 0.5}, {1.0, 0.5}}, {1, 2});
  auto p = tiny_params();
  p.alpha1 = 1e-4;
  p.alpha2 = 1e-4;
  const auto s = solve(data, p);
  ASSERT_EQ(s.solution.status, SolveStatus::Optimal);
  const auto terms = objective_terms(s.solution.values, s.built.map);
  EXPECT_NEAR(terms.misclassified, 0.0, 1e-9);
  const auto tree = extract_tree(s.solution.values, s.built.map, data);
  EXPECT_DOUBLE_EQ(accuracy(tree, data), 1.0);
}

TEST(Rescale, Examples) {
  Svm1OdtParams p;
  const auto same = rescale_to_unit_M(p);
  EXPECT_EQ(same.alpha1, 1000.0);
  EXPECT_EQ(same.alpha2, 0.1);
  EXPECT_EQ(same.big_m, 1.0);
  EXPECT_EQ(same.epsilon, 0.01);
  p.big_m = 2.0;
  const auto r = rescale_to_unit_M(p);
  EXPECT_EQ(r.alpha1, 2000.0);
  EXPECT_DOUBLE_EQ(r.alpha2, 0.2);
  EXPECT_EQ(r.big_m, 1.0);
  EXPECT_EQ(r.epsilon, 0.005);
}

TEST(SolvedProperties, IntegerAndRelaxedLabelsAgree) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    const auto n = 3 + static_cast<std::size_t>(rng() % 6);
    const int Y = 2 + static_cast<int>(rng() % 2);
    const auto data = oracle::random_instance(rng, n, Y);
    auto p = tiny_params();
    const auto a = solve(data, p);
    p.relax_u = true;
    const auto b = solve(data, p);
    ASSERT_EQ(a.solution.status, SolveStatus::Optimal);
    ASSERT_EQ(b.solution.status, SolveStatus::Optimal);
    EXPECT_NEAR(a.solution.objective, b.solution.objective, 1e-6) << "trial " << trial;
  }
}

TEST(SolvedProperties, OptimaSatisfyModelIdentities) {
  std::mt19937_64 rng(103);
  for (int trial = 0; trial < 10; ++trial) {
    const auto n = 4 + static_cast<std::size_t>(rng() % 4);
    const auto data = oracle::random_instance(rng, n, 2);
    const auto s = solve(data, tiny_params());
    ASSERT_EQ(s.solution.status, SolveStatus::Optimal);
    const auto& v = s.solution.values;
    const auto& map = s.built.map;
    // w = u e exactly.
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t l = map.first_leaf(); l < 2 * map.first_leaf(); ++l) {
        EXPECT_NEAR(v[map.w_(i, l).pos()], v[map.u_(l).pos()] * v[map.e_(i, l).pos()], 1e-6);
      }
    }
    // The objective is the sum of its three parts.
    const auto t = objective_terms(v, map);
    EXPECT_NEAR(s.solution.objective,
                t.misclassified + map.params.alpha1 * t.margin + map.params.alpha2 * t.l1, 1e-6);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_LE(v[map.p_plus_(i, 1).pos()] * v[map.p_minus_(i, 1).pos()], 1e-6);
    }
    // The extracted tree reproduces the count of misclassified points.
    const auto tree = extract_tree(v, map, data);
    EXPECT_EQ(static_cast<double>(misclassified_count(tree, data)),
              std::round(t.misclassified));
  }
}

TEST(SolvedProperties, RescalingPreservesObjectiveAndPredictions) {
  std::mt19937_64 rng(107);
  for (int trial = 0; trial < 5; ++trial) {
    const auto data = oracle::random_instance(rng, 5, 2);
    for (const double M : {2.0, 10.0}) {
      Svm1OdtParams raw = tiny_params();
      raw.big_m = M;
      raw.epsilon = 0.01;
      raw.rescale_to_unit_M = false;
      Svm1OdtParams scaled = rescale_to_unit_M(raw);
      scaled.rescale_to_unit_M = false;
      const auto a = solve(data, raw);
      const auto b = solve(data, scaled);
      ASSERT_EQ(a.solution.status, SolveStatus::Optimal);
      ASSERT_EQ(b.solution.status, SolveStatus::Optimal);
      EXPECT_NEAR(a.solution.objective, b.solution.objective, 1e-6);
      const auto ta = extract_tree(a.solution.values, a.built.map, data);
      const auto tb = extract_tree(b.solution.values, b.built.map, data);
      EXPECT_EQ(predict(ta, data), predict(tb, data));
    }
  }
}

TEST(EmbedWarmStart, AnyTreeIsFeasible) {
  std::mt19937_64 rng(109);
  for (int trial = 0; trial < 100; ++trial) {
    const int D = 1 + trial % 3;
    const int Y = 2 + trial % 3;
    const auto data = oracle::random_instance(rng, 6 + trial % 10, Y);
    auto p = tiny_params();
    p.depth = D;
    p.add_cuts = true;
    p.seed = static_cast<std::uint64_t>(trial);
    const auto built = build_model(data, p);
    auto tree = oracle::random_tree(rng, D, 2, Y);
    if (trial % 7 == 0) {
      for (auto& h : tree.branch(1).h) h *= 100.0;
      tree.branch(1).g *= 100.0;
    }
    const auto v = embed_warm_start(tree, data, built.map, built.model.num_variables());
    ASSERT_TRUE(milp::check_feasible(built.model, v).empty()) << "trial " << trial;
    const auto t = objective_terms(v, built.map);
    EXPECT_EQ(static_cast<double>(misclassified_count(tree, data)), t.misclassified);
  }
}

TEST(EmbedWarmStart, PerfectCartTreeHasNoErrors) {
  const auto data = make_dataset({{0.1, 0.2}, {0.2, 0.9}, {0.8, 0.3}, {0.9, 0.7}}, {1, 1, 2, 2});
  const auto tree = axis_to_oblique(train_cart(data, CartParams{1, 2}), 1);
  const auto built = build_model(data, tiny_params());
  const auto v = embed_warm_start(tree, data, built.map, built.model.num_variables());
  const auto t = objective_terms(v, built.map);
  EXPECT_EQ(t.misclassified, 0.0);
  EXPECT_NEAR(built.model.evaluate_objective(v),
              built.map.params.alpha1 * t.margin + built.map.params.alpha2 * t.l1, 1e-12);
}

TEST(EmbedWarmStart, ZeroTreePaysEpsilonMargins) {
  const auto data = make_dataset({{0.1, 0.2}, {0.8, 0.3}, {0.5, 0.5}}, {1, 2, 1});
  auto p = tiny_params();
  p.depth = 2;
  const auto built = build_model(data, p);
  ObliqueTree tree(2, 2);
  const auto v = embed_warm_start(tree, data, built.map, built.model.num_variables());
  EXPECT_TRUE(milp::check_feasible(built.model, v).empty());
  for (std::size_t i = 0; i < data.rows; ++i) {
    EXPECT_EQ(v[built.map.e_(i, 4).pos()], 1.0);
    EXPECT_DOUBLE_EQ(v[built.map.m_(i, 1).pos()], p.epsilon);
    EXPECT_DOUBLE_EQ(v[built.map.m_(i, 2).pos()], p.epsilon);
    EXPECT_EQ(v[built.map.m_(i, 3).pos()], 0.0);
  }
}

TEST(ExtractTree, WarmStartRoundTripPredictsIdentically) {
  std::mt19937_64 rng(113);
  for (int trial = 0; trial < 30; ++trial) {
    const auto data = oracle::random_instance(rng, 12, 3);
    auto p = tiny_params();
    p.depth = 2;
    const auto built = build_model(data, p);
    const auto tree = axis_to_oblique(train_cart(data, CartParams{2, 2}), 2);
    const auto v = embed_warm_start(tree, data, built.map, built.model.num_variables());
    const auto back = extract_tree(v, built.map, data);
    EXPECT_EQ(predict(back, data), predict(tree, data)) << "trial " << trial;
  }
}

TEST(ExtractTree, EmptyLeafRoundsAndFractionalLeafFails) {
  const auto data = make_dataset({{0.1, 0.1}, {0.2, 0.2}}, {1, 2}, 3);
  auto p = tiny_params();
  p.relax_u = true;
  const auto built = build_model(data, p);
  ObliqueTree tree(1, 2);  // everything left, leaf 3 empty
  auto v = embed_warm_start(tree, data, built.map, built.model.num_variables());
  v[built.map.u_(3).pos()] = 1.73;
  EXPECT_EQ(extract_tree(v, built.map, data).label(3), 2);
  v[built.map.u_(3).pos()] = 2.5;
  EXPECT_EQ(extract_tree(v, built.map, data).label(3), 3);
  v[built.map.u_(2).pos()] = 1.5;
  try {
    extract_tree(v, built.map, data);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SolverFailure);
  }
}

TEST(Categorical, AcceptedValueRoutesLeft) {
  CsvOptions opt;
  opt.categorical_columns = {"c"};
  const auto data = parse_csv("c,x,class\na,0.2,1\nb,0.4,2\na,0.9,1\n", opt);
  auto p = tiny_params();
  p.categorical_mode = true;
  auto built = build_model(data, p);
  add_categorical(built.model, built.map, data);
  ObliqueTree tree(1, 2);
  tree.branch(1).categorical = CategoricalRule{0, {0}};
  tree.set_label(3, 2);
  auto v = embed_warm_start(tree, data, built.map, built.model.num_variables());
  ASSERT_TRUE(milp::check_feasible(built.model, v).empty());
  EXPECT_EQ(objective_terms(v, built.map).misclassified, 0.0);
  // Every assignment that sends an "a" row right is cut off.
  for (std::size_t i : {std::size_t{0}, std::size_t{2}}) {
    auto bad = v;
    bad[built.map.e_(i, 2).pos()] = 0.0;
    bad[built.map.e_(i, 3).pos()] = 1.0;
    EXPECT_FALSE(milp::check_feasible(built.model, bad).empty());
  }
}

TEST(Categorical, InactiveRulesLeaveNumericRoutingFree) {
  CsvOptions opt;
  opt.categorical_columns = {"c"};
  const auto data = parse_csv("c,x,class\na,0.2,1\nb,0.4,2\na,0.9,2\n", opt);
  auto p = tiny_params();
  p.categorical_mode = true;
  auto built = build_model(data, p);
  add_categorical(built.model, built.map, data);
  ObliqueTree tree(1, 2);
  tree.branch(1).h = {0.0, 1.0};
  tree.branch(1).g = 0.3;
  tree.set_label(3, 2);
  const auto v = embed_warm_start(tree, data, built.map, built.model.num_variables());
  EXPECT_TRUE(milp::check_feasible(built.model, v).empty());
  EXPECT_EQ(v[built.map.h_cat_(1, 0).pos()], 0.0);
}

TEST(Categorical, SolverFindsCategoricalSplit) {
  CsvOptions opt;
  opt.categorical_columns = {"c"};
  const auto data =
      parse_csv("c,x,class\na,0.5,1\nb,0.5,2\nc,0.5,1\nb,0.5,2\na,0.5,1\n", opt);
  auto p = tiny_params();
  p.categorical_mode = true;
  auto built = build_model(data, p);
  add_categorical(built.model, built.map, data);
  const auto s = milp::solve_bnb(built.model);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  const auto tree = extract_tree(s.values, built.map, data);
  EXPECT_DOUBLE_EQ(accuracy(tree, data), 1.0);
  ASSERT_TRUE(tree.branch(1).categorical.has_value());
}

TEST(Categorical, Errors) {
  const auto data = make_dataset({{0.0}, {1.0}}, {1, 2});
  auto built = build_model(data, tiny_params());
  EXPECT_THROW(add_categorical(built.model, built.map, data), Error);
  CsvOptions opt;
  opt.categorical_columns = {"c"};
  auto cat = parse_csv("c,class\na,1\nb,2\n", opt);
  auto p = tiny_params();
  p.categorical_mode = true;
  auto cb = build_model(cat, p);
  cat.points[0] = 5.0;
  try {
    add_categorical(cb.model, cb.map, cat);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Categorical);
  }
}
