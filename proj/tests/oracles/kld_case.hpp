#pragma once

// Random finite-space Bernoulli trees and the comparison between the library's branch-wise
// prediction and the exhaustive oracle.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "oracles/tree_prediction_oracle.hpp"
#include "trpmbm/branch_density.hpp"
#include "trpmbm/discrete_branch.hpp"

namespace trpmbm::oracle {

struct KldCase {
  DiscreteTransitionModel model;
  std::vector<PriorBranchSlot> prior;
  int generations;  // of the prior tree; the tree starts at time 1
};

inline std::vector<double> random_pmf(std::mt19937_64& rng, std::size_t n) {
  std::gamma_distribution<double> gamma(1.0, 1.0);
  std::vector<double> p(n);
  double total = 0;
  for (auto& v : p) total += (v = gamma(rng) + 1e-3);
  for (auto& v : p) v /= total;
  return p;
}

/// Two spawning-capable modes on `alphabet` states. The prior tree has two generations with
/// the main branch (ending at time 1 or 2) and, unless `single_branch`, the branch spawned
/// with mode 2 at time 2.
inline KldCase make_kld_case(std::uint64_t seed, int alphabet, bool single_branch) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  Eigen::MatrixXd probability(2, alphabet);
  for (int m = 0; m < 2; ++m)
    for (int x = 0; x < alphabet; ++x) probability(m, x) = unit(rng);
  std::vector<Eigen::MatrixXd> kernels;
  for (int m = 0; m < 2; ++m) {
    Eigen::MatrixXd k(alphabet, alphabet);
    for (int x = 0; x < alphabet; ++x) {
      const auto row = random_pmf(rng, static_cast<std::size_t>(alphabet));
      for (int y = 0; y < alphabet; ++y) k(x, y) = row[static_cast<std::size_t>(y)];
    }
    kernels.push_back(k);
  }
  KldCase c{DiscreteTransitionModel(probability, kernels), {}, 2};
  const auto a = static_cast<std::size_t>(alphabet);

  PriorBranchSlot main{BranchId{1}, unit(rng), {}};
  main.density.start_time = 1;
  const double beta_dead = unit(rng);
  main.density.components.push_back({1, beta_dead, DiscreteBranch{GenealogyVar{1, 0}, alphabet, random_pmf(rng, a)}});
  main.density.components.push_back({2, 1.0 - beta_dead, DiscreteBranch{GenealogyVar{1, 1}, alphabet, random_pmf(rng, a * a)}});
  c.prior.push_back(main);

  if (!single_branch) {
    PriorBranchSlot spawned{BranchId{1, 2}, unit(rng), {}};
    spawned.density.start_time = 2;
    spawned.density.components.push_back({2, 1.0, DiscreteBranch{GenealogyVar{1, 2}, alphabet, random_pmf(rng, a)}});
    c.prior.push_back(spawned);
  }
  return c;
}

struct PredictedSlot {
  BranchId id;
  double existence;
  BranchDensity<DiscreteBranch> density;
};

/// Branch-wise prediction of every prior slot with the library routine.
inline std::vector<PredictedSlot> predict_slots(const KldCase& c) {
  std::vector<PredictedSlot> out;
  for (const auto& slot : c.prior) {
    auto prediction = predict_branch(c.model, slot.density, c.generations);
    out.push_back({slot.id, slot.existence, prediction.surviving});
    for (auto& s : prediction.spawned) {
      const auto& parent = s.density.components.front().density.genealogy;
      out.push_back({unique_id(parent), slot.existence * s.existence_factor, s.density});
    }
  }
  return out;
}

/// Largest absolute difference between exact predicted branch marginals and
/// existence * beta * pmf of the branch-wise prediction, over every branch value.
inline double max_kld_deviation(const KldCase& c, double* total_mass = nullptr) {
  const auto exact = exact_tree_prediction(c.model, c.prior, c.generations);
  if (total_mass) *total_mass = exact.total_mass;
  const auto predicted = predict_slots(c);
  double worst = 0;
  for (std::size_t v = 0; v < exact.values.size(); ++v) {
    const auto& value = exact.values[v];
    double approx = 0;
    for (const auto& slot : predicted) {
      if (slot.id != unique_id(value.genealogy)) continue;
      for (const auto& comp : slot.density.components) {
        if (comp.density.genealogy == value.genealogy) {
          approx = slot.existence * comp.beta * comp.density.pmf[sequence_index(value.states, c.model.states())];
        }
      }
    }
    worst = std::max(worst, std::abs(approx - exact.marginal[v]));
  }
  return worst;
}

}  // namespace trpmbm::oracle
