#include <gtest/gtest.h>

#include <limits>
#include <random>
#include <set>

#include "oracles/assignment_oracle.hpp"
#include "trpmbm/assignment.hpp"

using namespace trpmbm;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols, double forbid_fraction) {
  std::uniform_real_distribution<double> uniform(-5.0, 5.0);
  std::bernoulli_distribution forbid(forbid_fraction);
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = forbid(rng) ? kInf : uniform(rng);
  return m;
}

}  // namespace

TEST(Hungarian, SmallExamples) {
  Eigen::MatrixXd a(2, 2);
  a << 1, 2, 2, 1;
  auto s = hungarian(a);
  EXPECT_EQ(s.columns, (std::vector<int>{0, 1}));
  EXPECT_EQ(s.cost, 2.0);
  EXPECT_EQ(hungarian(Eigen::MatrixXd::Constant(1, 1, 7.0)).cost, 7.0);
}

TEST(Hungarian, TiesPreferLowColumn) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(1, 3);
  EXPECT_EQ(hungarian(a).columns, std::vector<int>{0});
}

TEST(Hungarian, InfeasibleNamesRow) {
  Eigen::MatrixXd a(2, 2);
  a << 1, kInf, kInf, kInf;
  try {
    hungarian(a);
    FAIL();
  } catch (const InfeasibleError& e) {
    EXPECT_EQ(e.blocked_row(), 1);
  }
  Eigen::MatrixXd b(2, 2);
  b << 1, kInf, 2, kInf;
  EXPECT_THROW(hungarian(b), InfeasibleError);
}

TEST(Hungarian, RejectsTallMatrices) { EXPECT_THROW(hungarian(Eigen::MatrixXd::Zero(3, 2)), DimensionError); }

TEST(Hungarian, EmptyMatrix) { EXPECT_TRUE(hungarian(Eigen::MatrixXd(0, 4)).columns.empty()); }

TEST(Hungarian, MatchesEnumerationOnRandom) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    auto m = random_matrix(rng, 6, 8, trial % 2 ? 0.3 : 0.0);
    const auto all = oracle::enumerate_assignments(m);
    if (all.empty()) {
      EXPECT_THROW(hungarian(m), InfeasibleError);
      continue;
    }
    EXPECT_NEAR(hungarian(m).cost, all.front().cost, 1e-12);
  }
}

TEST(Murty, SmallExamples) {
  Eigen::MatrixXd a(2, 2);
  a << 1, 2, 2, 1;
  auto best = murty_kbest(a, 2);
  ASSERT_EQ(best.size(), 2u);
  EXPECT_EQ(best[0].cost, 2.0);
  EXPECT_EQ(best[1].cost, 4.0);
  EXPECT_EQ(murty_kbest(a, 10).size(), 2u);
  EXPECT_EQ(murty_kbest(a, 1).front(), hungarian(a));
  EXPECT_THROW(murty_kbest(a, 0), ConstraintError);
}

TEST(Murty, MatchesSortedEnumeration) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 60; ++trial) {
    const int rows = 1 + trial % 5;
    auto m = random_matrix(rng, rows, rows + 2, trial % 3 == 0 ? 0.25 : 0.0);
    const auto all = oracle::enumerate_assignments(m);
    const auto best = murty_kbest(m, 10);
    ASSERT_EQ(best.size(), std::min<std::size_t>(10, all.size()));
    std::set<std::vector<int>> seen;
    for (std::size_t i = 0; i < best.size(); ++i) {
      EXPECT_NEAR(best[i].cost, all[i].cost, 1e-12);
      EXPECT_EQ(best[i].columns, all[i].columns);
      EXPECT_TRUE(seen.insert(best[i].columns).second);
    }
  }
}

TEST(Murty, IntegerTiesStillCorrectCosts) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> small(0, 2);
  for (int trial = 0; trial < 40; ++trial) {
    Eigen::MatrixXd m(4, 6);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 6; ++c) m(r, c) = small(rng);
    const auto all = oracle::enumerate_assignments(m);
    const auto best = murty_kbest(m, 15);
    std::set<std::vector<int>> seen;
    for (std::size_t i = 0; i < best.size(); ++i) {
      EXPECT_EQ(best[i].cost, all[i].cost);
      if (i > 0) EXPECT_LE(best[i - 1].cost, best[i].cost);
      double recomputed = 0;
      for (int r = 0; r < 4; ++r) recomputed += m(r, best[i].columns[static_cast<std::size_t>(r)]);
      EXPECT_EQ(recomputed, best[i].cost);
      EXPECT_TRUE(seen.insert(best[i].columns).second);
    }
  }
}

TEST(Murty, RowShiftInvariance) {
  std::mt19937_64 rng(4);
  auto m = random_matrix(rng, 4, 6, 0.0);
  auto shifted = m;
  shifted.row(2).array() += 3.5;
  const auto a = murty_kbest(m, 12);
  const auto b = murty_kbest(shifted, 12);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].columns, b[i].columns);
    EXPECT_NEAR(b[i].cost - a[i].cost, 3.5, 1e-12);
  }
}

TEST(Murty, FloatScalar) {
  Eigen::MatrixXf a(2, 3);
  a << 1, 2, 3, 3, 1, 2;
  auto best = murty_kbest(a, 3);
  ASSERT_EQ(best.size(), 3u);
  EXPECT_FLOAT_EQ(best[0].cost, 2.0f);
}
