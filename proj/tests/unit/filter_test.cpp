#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "trpmbm/errors.hpp"
#include "trpmbm/filter.hpp"
#include "trpmbm/sampler.hpp"

using namespace trpmbm;

namespace {

Eigen::Vector4d state(double px, double vx, double py, double vy) { return {px, vx, py, vy}; }

/// Component whose states all equal x, unit covariance.
GaussianBranch component(GenealogyVar g, const Eigen::Vector4d& x) {
  const int n = branch_length(g);
  return GaussianBranch(std::move(g), x.replicate(n, 1), Eigen::MatrixXd::Identity(4 * n, 4 * n), 4);
}

/// Posterior at `time` holding one tree started at 1 with a single main-branch hypothesis.
PMBMPosterior single_branch(int time, double existence, std::vector<EndTimeComponent<GaussianBranch>> components) {
  PMBMPosterior post;
  post.time = time;
  GaussianBranchDensity d{1, std::move(components)};
  post.trees.push_back({1, {BranchSlot{BranchId{1}, {LocalHypothesis{0.0, existence, std::move(d), {}}}}}});
  post.globals = {GlobalHypothesis{0.0, {0}}};
  return post;
}

double gaussian_2d(const Eigen::Vector2d& residual, const Eigen::Matrix2d& cov) {
  return std::exp(-0.5 * residual.dot(cov.inverse() * residual)) / (2 * std::numbers::pi * std::sqrt(cov.determinant()));
}

double total_weight(const PMBMPosterior& post) {
  double sum = 0;
  for (const auto& g : post.globals) sum += std::exp(g.log_weight);
  return sum;
}

}  // namespace

TEST(PPPPredict, SurvivalAndBirth) {
  const auto c = default_scenario();
  PMBMPosterior post;
  post.time = 3;
  post.ppp.push_back({0.0, 2, GaussianBranch(GenealogyVar{1, 1}, Eigen::VectorXd::Zero(8), Eigen::MatrixXd::Identity(8, 8), 4)});
  TreeFilter f(c, post);
  f.predict();
  ASSERT_EQ(f.posterior().ppp.size(), 2u);
  EXPECT_NEAR(f.posterior().ppp[0].weight(), 0.99, 1e-15);
  EXPECT_EQ(f.posterior().ppp[0].density.genealogy, (GenealogyVar{1, 1, 1}));
  EXPECT_NEAR(f.posterior().ppp[1].weight(), 0.08, 1e-15);
  EXPECT_EQ(f.posterior().ppp[1].start_time, 4);
}

TEST(PPPPredict, MultiBernoulliBirthKeepsPPPEmpty) {
  auto c = default_scenario();
  c.birth_type = BirthType::kMultiBernoulli;
  TreeFilter f(c);
  f.predict();
  EXPECT_TRUE(f.posterior().ppp.empty());
  ASSERT_EQ(f.posterior().trees.size(), 1u);
  EXPECT_DOUBLE_EQ(f.posterior().trees[0].slots[0].hypotheses[0].existence, 0.08);
  EXPECT_EQ(f.posterior().globals[0].selection, std::vector<int>{0});
}

TEST(TreePredict, SpawnedExistenceAndSurvivalSplit) {
  const auto c = default_scenario();
  auto post = single_branch(2, 0.8, {{1, 0.5, component({1, 0}, state(0, 1, 0, 0))}, {2, 0.5, component({1, 1}, state(1, 1, 0, 0))}});
  TreeFilter f(c, post);
  f.predict();
  const auto& tree = f.posterior().trees[0];
  ASSERT_EQ(tree.slots.size(), 3u);
  const auto& main = tree.slots[0].hypotheses[0];
  EXPECT_DOUBLE_EQ(main.existence, 0.8);
  EXPECT_DOUBLE_EQ(main.density.beta(3), 0.99 * 0.5);
  EXPECT_NEAR(main.density.beta(2), 0.01 * 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(main.density.beta(1), 0.5);
  EXPECT_EQ(tree.slots[1].id, (BranchId{1, 1, 2}));
  EXPECT_EQ(tree.slots[2].id, (BranchId{1, 1, 3}));
  EXPECT_NEAR(tree.slots[1].hypotheses[0].existence, 0.004, 1e-15);
  EXPECT_EQ(tree.slots[1].hypotheses[0].density.start_time, 3);
  EXPECT_EQ(f.posterior().globals[0].selection, (std::vector<int>{0, 0, 0}));
}

TEST(TreePredict, FullSurvivalShiftsMass) {
  const auto c = default_scenario();
  TreeFilter f(c, single_branch(1, 1.0, {{1, 1.0, component({1}, state(0, 1, 0, 0))}}));
  f.predict();
  const auto& d = f.posterior().trees[0].slots[0].hypotheses[0].density;
  EXPECT_DOUBLE_EQ(d.beta(2), 0.99);
  EXPECT_NEAR(d.beta(1), 0.01, 1e-15);
}

TEST(TreePredict, SingleModeNeverAddsSlots) {
  auto c = default_scenario();
  c.modes = 1;
  TreeFilter f(c, single_branch(1, 1.0, {{1, 1.0, component({1}, state(0, 1, 0, 0))}}));
  for (int k = 0; k < 5; ++k) {
    f.predict();
    EXPECT_EQ(f.posterior().trees[0].slots.size(), 1u);
  }
}

TEST(TreePredict, FrozenBranchDoesNotSpawn) {
  const auto c = default_scenario();
  // Dead at time 1, predicted from time 2: no mass at time 2, so no spawning.
  TreeFilter f(c, single_branch(2, 1.0, {{1, 1.0, component({1, 0}, state(0, 1, 0, 0))}}));
  f.predict();
  EXPECT_EQ(f.posterior().trees[0].slots.size(), 1u);
}

TEST(Update, MissedDetection) {
  const auto c = default_scenario();
  TreeFilter f(c, single_branch(1, 0.5, {{1, 1.0, component({1}, state(0, 1, 0, 0))}}));
  f.update({});
  const auto& post = f.posterior();
  ASSERT_EQ(post.globals.size(), 1u);
  const auto& hyp = post.trees[0].slots[0].hypotheses[0];
  EXPECT_NEAR(std::exp(hyp.log_weight), 0.55, 1e-15);
  EXPECT_NEAR(hyp.existence, 0.05 / 0.55, 1e-15);
  EXPECT_NEAR(hyp.density.beta(1), 1.0, 1e-15);
}

TEST(Update, MissedDetectionReweightsEndTimes) {
  const auto c = default_scenario();
  TreeFilter f(c, single_branch(2, 1.0, {{1, 0.5, component({1, 0}, state(0, 1, 0, 0))}, {2, 0.5, component({1, 1}, state(1, 1, 0, 0))}}));
  f.update({});
  const auto& hyp = f.posterior().trees[0].slots[0].hypotheses[0];
  EXPECT_NEAR(hyp.density.beta(2), 0.05 / 0.55, 1e-15);
  EXPECT_NEAR(hyp.existence, 1.0, 1e-15);
  EXPECT_NEAR(std::exp(hyp.log_weight), 1 - 0.45, 1e-15);
}

TEST(Update, DetectionAndWeightIdentity) {
  const auto c = default_scenario();
  const double r = 0.7;
  TreeFilter f(c, single_branch(1, r, {{1, 1.0, component({1}, state(10, 1, 20, 0))}}));
  const Eigen::Vector2d z(11, 19);
  f.update({z});
  const auto& post = f.posterior();
  // Branch update vs new tree.
  ASSERT_EQ(post.globals.size(), 2u);
  const auto& slot = post.trees[0].slots[0];
  ASSERT_EQ(slot.hypotheses.size(), 2u);
  const auto& missed = slot.hypotheses[0];
  const auto& detected = slot.hypotheses[1];
  EXPECT_DOUBLE_EQ(detected.existence, 1.0);
  EXPECT_DOUBLE_EQ(detected.density.beta(1), 1.0);
  ASSERT_EQ(detected.history.size(), 1u);
  EXPECT_EQ(detected.history[0], (Association{1, 0}));
  const Eigen::Matrix2d s = Eigen::Matrix2d::Identity() + c.measurement.noise;
  const double l = gaussian_2d(z - Eigen::Vector2d(10, 20), s);
  EXPECT_NEAR(std::exp(missed.log_weight) + std::exp(detected.log_weight), (1 - r * 0.9) + r * 0.9 * l, 1e-12);
  EXPECT_NEAR(total_weight(post), 1.0, 1e-12);
}

TEST(Update, NewTreeExistence) {
  const auto c = default_scenario();
  PMBMPosterior post;
  post.time = 1;
  const double w = 0.3;
  post.ppp.push_back({std::log(w), 1, component({1}, state(100, 0, 100, 0))});
  TreeFilter f(c, post);
  const Eigen::Vector2d z(101, 99);
  f.update({z});
  ASSERT_EQ(f.posterior().trees.size(), 1u);
  const auto& hyp = f.posterior().trees[0].slots[0].hypotheses[0];
  const double p = w * 0.9 * gaussian_2d(z - Eigen::Vector2d(100, 100), Eigen::Matrix2d::Identity() + c.measurement.noise);
  const double clutter = 10.0 / (600.0 * 400.0);
  EXPECT_NEAR(hyp.existence, p / (clutter + p), 1e-12);
  EXPECT_NEAR(std::exp(hyp.log_weight), clutter + p, 1e-15);
  EXPECT_NEAR(f.posterior().ppp[0].weight(), w * 0.1, 1e-15);
  ASSERT_EQ(f.posterior().globals.size(), 1u);
  EXPECT_EQ(f.posterior().globals[0].selection, std::vector<int>{0});
}

TEST(Update, NewTreeTakesLatestStartOnTies) {
  const auto c = default_scenario();
  PMBMPosterior post;
  post.time = 2;
  post.ppp.push_back({std::log(0.2), 1, GaussianBranch(GenealogyVar{1, 1}, Eigen::VectorXd::Zero(8), Eigen::MatrixXd::Identity(8, 8), 4)});
  post.ppp.push_back({std::log(0.2), 2, component({1}, state(0, 0, 0, 0))});
  TreeFilter f(c, post);
  f.update({Eigen::Vector2d(0.5, 0.5)});
  EXPECT_EQ(f.posterior().trees[0].start_time, 2);
}

TEST(Update, NoMeasurementsOneChildPerParent) {
  const auto c = default_scenario();
  auto post = single_branch(1, 0.5, {{1, 1.0, component({1}, state(0, 1, 0, 0))}});
  post.trees.push_back(post.trees[0]);
  post.trees[1].slots[0].hypotheses.push_back(post.trees[1].slots[0].hypotheses[0]);
  post.trees[1].slots[0].hypotheses[1].existence = 0.9;
  post.globals = {{std::log(0.6), {0, 0}}, {std::log(0.4), {0, 1}}};
  TreeFilter f(c, post);
  f.update({});
  EXPECT_EQ(f.posterior().globals.size(), 2u);
  EXPECT_NEAR(total_weight(f.posterior()), 1.0, 1e-12);
}

TEST(Estimate, ThresholdAndMostLikelyEndTime) {
  const auto c = default_scenario();
  auto post = single_branch(2, 0.39, {{2, 1.0, component({1, 1}, state(0, 1, 0, 0))}});
  EXPECT_TRUE(TreeFilter(c, post).estimate().empty());

  auto live = single_branch(2, 0.9, {});
  auto& d = live.trees[0].slots[0].hypotheses[0].density;
  d.components.push_back({1, 0.3, component({1, 0}, state(5, 1, 5, 1))});
  d.components.push_back({2, 0.7, GaussianBranch(GenealogyVar{1, 1}, Eigen::VectorXd::LinSpaced(8, 1, 8), Eigen::MatrixXd::Identity(8, 8), 4)});
  const auto est = TreeFilter(c, live).estimate();
  ASSERT_EQ(est.size(), 1u);
  ASSERT_EQ(est[0].branches.size(), 1u);
  EXPECT_EQ(est[0].branches[0].genealogy, (GenealogyVar{1, 1}));
  EXPECT_EQ(est[0].branches[0].states.cols(), 2);
  EXPECT_DOUBLE_EQ(est[0].branches[0].states(0, 1), 5.0);
  EXPECT_TRUE(validate_tree(est[0]).valid());

  EXPECT_TRUE(TreeFilter(c).estimate().empty());
}

TEST(Step, EmptyStaysEmpty) {
  auto c = default_scenario();
  c.birth[0].weight = 0.0;
  TreeFilter f(c);
  for (int k = 0; k < 5; ++k) f.step({});
  EXPECT_TRUE(f.posterior().ppp.empty());
  EXPECT_TRUE(f.posterior().trees.empty());
  EXPECT_TRUE(f.estimate().empty());
}

TEST(Step, NoiselessTargetIsRecovered) {
  auto c = default_scenario();
  c.modes = 1;
  c.horizon = 15;
  c.motion[0].probability = 1.0;
  c.measurement.detection_probability = 0.999;
  c.measurement.clutter_rate = 0.0;
  c.measurement.noise = 1e-8 * Eigen::Matrix2d::Identity();
  c.birth[0].weight = 0.5;
  c.birth[0].mean = state(300, 3, 170, 1);
  c.birth[0].covariance = Eigen::Vector4d(100, 1, 100, 1).asDiagonal();
  Eigen::Vector4d x = state(305, 3, 168, 1);
  std::vector<Eigen::Vector4d> truth;
  TreeFilter f(c);
  for (int k = 1; k <= c.horizon; ++k) {
    truth.push_back(x);
    f.step({c.measurement.observation * x});
    x = c.motion[0].transition * x;
  }
  const auto est = f.estimate();
  ASSERT_EQ(est.size(), 1u);
  ASSERT_EQ(est[0].branches.size(), 1u);
  const auto& states = est[0].branches[0].states;
  ASSERT_EQ(states.cols(), c.horizon);
  for (int k = 0; k < c.horizon; ++k) {
    EXPECT_NEAR(states(0, k), truth[static_cast<std::size_t>(k)](0), 1e-3);
    EXPECT_NEAR(states(2, k), truth[static_cast<std::size_t>(k)](2), 1e-3);
  }
}

TEST(Step, InvariantsHoldOnSimulatedRun) {
  auto c = default_scenario();
  c.horizon = 60;
  const auto truth = sample_ground_truth(c, 4);
  const auto z = sample_measurement_sequence(truth, c, 4);
  for (auto birth : {BirthType::kPoisson, BirthType::kMultiBernoulli}) {
    c.birth_type = birth;
    TreeFilter f(c);
    std::vector<int> counts;
    for (int k = 1; k <= c.horizon; ++k) {
      f.step(z[static_cast<std::size_t>(k - 1)]);
      counts.push_back(static_cast<int>(z[static_cast<std::size_t>(k - 1)].size()));
      const auto issues = check_posterior(f.posterior(), counts);
      ASSERT_TRUE(issues.empty()) << "step " << k << ": " << issues.front();
      ASSERT_LE(f.posterior().globals.size(), 100u);
    }
  }
}

TEST(Step, SpawningModesWithZeroProbabilityReduceToSingleMode) {
  auto c = default_scenario();
  c.horizon = 40;
  const auto truth = sample_ground_truth(c, 2);
  const auto z = sample_measurement_sequence(truth, c, 2);
  auto single = c;
  single.modes = 1;
  auto zero = c;
  zero.motion[1].probability = zero.motion[2].probability = 0.0;
  TreeFilter a(single), b(zero);
  for (const auto& zk : z) {
    a.step(zk);
    b.step(zk);
    ASSERT_EQ(a.posterior().globals.size(), b.posterior().globals.size());
    for (std::size_t i = 0; i < a.posterior().globals.size(); ++i) {
      EXPECT_EQ(a.posterior().globals[i].log_weight, b.posterior().globals[i].log_weight);
      EXPECT_EQ(a.posterior().globals[i].selection, b.posterior().globals[i].selection);
    }
  }
  EXPECT_EQ(posterior_to_json(a.posterior()), posterior_to_json(b.posterior()));
}

TEST(Posterior, JsonSnapshot) {
  const auto c = default_scenario();
  TreeFilter f(c, single_branch(1, 0.7, {{1, 1.0, component({1}, state(10, 1, 20, 0))}}));
  f.update({Eigen::Vector2d(11, 19)});
  const auto text = posterior_to_json(f.posterior());
  EXPECT_NE(text.find("\"globals\""), std::string::npos);
  EXPECT_NE(text.find("\"history\""), std::string::npos);
}
