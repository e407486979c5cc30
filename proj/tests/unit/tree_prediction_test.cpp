#include <gtest/gtest.h>

#include "oracles/kld_case.hpp"
#include "trpmbm/branch_density.hpp"
#include "trpmbm/discrete_branch.hpp"

using namespace trpmbm;

TEST(TreePrediction, SurvivingEndTimeRedistribution) {
  Eigen::MatrixXd probability(1, 1);
  probability << 0.99;
  DiscreteTransitionModel model(probability, {Eigen::MatrixXd::Ones(1, 1)});
  BranchDensity<DiscreteBranch> branch;
  branch.components.push_back({1, 1.0, DiscreteBranch{GenealogyVar{1}, 1, {1.0}}});
  auto p = predict_branch(model, branch, 1);
  EXPECT_NEAR(p.surviving.beta(2), 0.99, 1e-15);
  EXPECT_NEAR(p.surviving.beta(1), 0.01, 1e-15);
  EXPECT_NEAR(p.surviving.beta_sum(), 1.0, 1e-15);
  EXPECT_TRUE(p.spawned.empty());
  EXPECT_EQ(p.surviving.find(1)->density.genealogy, GenealogyVar({1, 0}));
  EXPECT_EQ(p.surviving.find(2)->density.genealogy, GenealogyVar({1, 1}));
}

TEST(TreePrediction, SpawnExistenceFactor) {
  Eigen::MatrixXd probability(2, 1);
  probability << 0.99, 0.01;
  DiscreteTransitionModel model(probability, {Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1)});
  BranchDensity<DiscreteBranch> branch;
  branch.components.push_back({1, 0.5, DiscreteBranch{GenealogyVar{1, 0}, 1, {1.0}}});
  branch.components.push_back({2, 0.5, DiscreteBranch{GenealogyVar{1, 1}, 1, {1.0}}});
  auto p = predict_branch(model, branch, 2);
  ASSERT_EQ(p.spawned.size(), 1u);
  EXPECT_NEAR(0.8 * p.spawned[0].existence_factor, 0.004, 1e-15);
  EXPECT_EQ(p.spawned[0].density.start_time, 3);
  EXPECT_EQ(p.spawned[0].density.components.front().density.genealogy, GenealogyVar({1, 1, 2}));
}

TEST(TreePrediction, FrozenBranchDoesNotSpawn) {
  Eigen::MatrixXd probability(2, 1);
  probability << 0.99, 0.5;
  DiscreteTransitionModel model(probability, {Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1)});
  BranchDensity<DiscreteBranch> branch;
  branch.components.push_back({1, 1.0, DiscreteBranch{GenealogyVar{1, 0}, 1, {1.0}}});
  auto p = predict_branch(model, branch, 2);
  EXPECT_TRUE(p.spawned.empty());
  EXPECT_EQ(p.surviving.components.size(), 1u);
  EXPECT_EQ(p.surviving.components.front().density.genealogy, GenealogyVar({1, 0, 0}));
}

TEST(TreePrediction, MatchesExhaustiveOracle) {
  for (int trial = 0; trial < 6; ++trial) {
    const auto c = oracle::make_kld_case(100 + static_cast<std::uint64_t>(trial), 2 + trial % 2, trial % 3 == 2);
    double mass = 0;
    const double deviation = oracle::max_kld_deviation(c, &mass);
    EXPECT_NEAR(mass, 1.0, 1e-12) << trial;
    EXPECT_LE(deviation, 1e-10) << trial;
  }
}
