#include <gtest/gtest.h>

#include <random>

#include "odtmip/cart.hpp"
#include "odtmip/cuts.hpp"
#include "odtmip/milp/bnb.hpp"
#include "oracles.hpp"

using namespace odtmip;

namespace {

Dataset with_sizes(const std::vector<std::size_t>& sizes) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    for (std::size_t i = 0; i < sizes[k]; ++i) {
      rows.push_back({static_cast<double>(rows.size()) / 20.0});
      labels.push_back(static_cast<int>(k) + 1);
    }
  }
  return make_dataset(rows, labels);
}

VariableIndexMap plain_map(const Dataset& data, int depth) {
  Svm1OdtParams p;
  p.depth = depth;
  p.add_cuts = false;
  return build_model(data, p).map;
}

}  // namespace

TEST(ClassSizeCuts, OverflowWithThreeClassesOneSplit) {
  const auto data = with_sizes({2, 3, 5});
  const auto cuts = class_size_cuts(class_partition(data), plain_map(data, 1));
  std::size_t overflow = 0;
  for (const auto& c : cuts) {
    if (c.name == "class_overflow") {
      ++overflow;
      EXPECT_EQ(c.rhs, 2.0);
      EXPECT_EQ(c.terms.size(), data.rows);
    }
  }
  EXPECT_EQ(overflow, 1u);
}

TEST(ClassSizeCuts, TwoClassesDepthTwoOnlyCapacity) {
  const auto data = with_sizes({4, 6});
  const auto cuts = class_size_cuts(class_partition(data), plain_map(data, 2));
  ASSERT_EQ(cuts.size(), 4u);
  for (const auto& c : cuts) {
    EXPECT_EQ(c.name.rfind("leaf_capacity", 0), 0u);
    EXPECT_EQ(c.rhs, -6.0);
    EXPECT_EQ(c.tag, milp::ConstraintTag::UserCut);
  }
}

TEST(PigeonholeCuts, SkipVacuousAndRespectCap) {
  const auto data = with_sizes({3, 3, 3});
  const auto map = plain_map(data, 1);
  CutFamilyConfig cfg;
  const auto cuts = pigeonhole_cuts(class_partition(data), map, cfg);
  EXPECT_FALSE(cuts.empty());
  for (const auto& c : cuts) EXPECT_LT(-c.rhs, 3.0);
  cfg.cap = 1;
  EXPECT_LE(pigeonhole_cuts(class_partition(data), map, cfg).size(), 1u);
}

TEST(Cuts, EveryTreeSatisfiesEveryCut) {
  std::mt19937_64 rng(201);
  for (int trial = 0; trial < 500; ++trial) {
    const int D = 1 + trial % 2;
    const int Y = 2 + trial % 4;
    const auto data = oracle::random_instance(rng, 8 + trial % 7, Y);
    Svm1OdtParams p;
    p.depth = D;
    p.add_cuts = false;
    const auto built = build_model(data, p);
    CutFamilyConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(trial);
    auto cuts = pigeonhole_cuts(class_partition(data), built.map, cfg);
    for (auto& c : class_size_cuts(class_partition(data), built.map, cfg)) cuts.push_back(c);
    const auto tree = oracle::random_tree(rng, D, data.dims, Y);
    ASSERT_TRUE(verify_cuts_against(tree, data, built.map, built.model.num_variables(), cuts)
                    .empty())
        << "trial " << trial;
  }
}

TEST(Cuts, IrisCartTreeSatisfiesEveryCut) {
  const auto data = normalize(load_csv(ODTMIP_DATA_DIR "/iris.csv", CsvOptions{}));
  for (int D = 1; D <= 2; ++D) {
    Svm1OdtParams p;
    p.depth = D;
    const auto built = build_model(data, p);
    std::vector<milp::Constraint> cuts;
    for (const auto& row : built.model.constraints()) {
      if (row.tag == milp::ConstraintTag::UserCut) cuts.push_back(row);
    }
    EXPECT_FALSE(cuts.empty());
    const auto tree = axis_to_oblique(train_cart(data, CartParams{D, 2}), D);
    EXPECT_TRUE(verify_cuts_against(tree, data, built.map, built.model.num_variables(), cuts)
                    .empty());
  }
}

TEST(Cuts, DoNotChangeTheOptimum) {
  std::mt19937_64 rng(211);
  for (int trial = 0; trial < 6; ++trial) {
    const auto data = oracle::random_instance(rng, 5, 3);
    Svm1OdtParams p;
    p.depth = 1;
    p.add_cuts = false;
    const auto off = milp::solve_bnb(build_model(data, p).model);
    p.add_cuts = true;
    const auto on_model = build_model(data, p);
    EXPECT_GT(on_model.model.count_tagged(milp::ConstraintTag::UserCut), 0u);
    const auto on = milp::solve_bnb(on_model.model);
    ASSERT_EQ(off.status, milp::SolveStatus::Optimal);
    ASSERT_EQ(on.status, milp::SolveStatus::Optimal);
    EXPECT_NEAR(off.objective, on.objective, 1e-6) << "trial " << trial;
  }
}
