#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "trpmbm/branch_density.hpp"
#include "trpmbm/models.hpp"
#include "trpmbm/scenario.hpp"
#include "trpmbm/tree.hpp"

namespace trpmbm {

using GaussianBranchDensity = BranchDensity<GaussianBranch>;
using GaussianPPPComponent = PPPComponent<double>;
using MeasurementSet = std::vector<Eigen::VectorXd>;

/// (time step, index within that step's measurement set).
struct Association {
  int time;
  int measurement;

  friend bool operator==(const Association&, const Association&) = default;
  friend auto operator<=>(const Association&, const Association&) = default;
};

struct LocalHypothesis {
  double log_weight = 0.0;
  double existence = 0.0;
  GaussianBranchDensity density;
  std::vector<Association> history;
};

/// One potential branch of a Bernoulli tree with its local hypotheses.
struct BranchSlot {
  BranchId id;
  std::vector<LocalHypothesis> hypotheses;
};

struct BernoulliTree {
  int start_time = 1;
  std::vector<BranchSlot> slots;
};

/// Selected local hypothesis per slot, slots flattened in tree order. -1 means the branch does
/// not exist under this hypothesis (equivalent to a zero-existence local hypothesis).
struct GlobalHypothesis {
  double log_weight = 0.0;
  std::vector<int> selection;
};

struct PMBMPosterior {
  int time = 0;
  std::vector<GaussianPPPComponent> ppp;
  std::vector<BernoulliTree> trees;
  std::vector<GlobalHypothesis> globals{GlobalHypothesis{}};

  std::size_t num_slots() const;
  /// Flat index of the first slot of each tree, plus the total at the end.
  std::vector<std::size_t> slot_offsets() const;
};

/// Poisson birth gives the TrPMBM filter, a Bernoulli tree per birth component the TrMBM
/// filter. A scenario with a single mode turns either into its trajectory (non-spawning) form.
class TreeFilter {
 public:
  explicit TreeFilter(ScenarioConfig config);
  /// Starts from a given posterior instead of the empty one.
  TreeFilter(ScenarioConfig config, PMBMPosterior initial);

  const PMBMPosterior& posterior() const noexcept { return posterior_; }
  const ScenarioConfig& config() const noexcept { return config_; }

  /// predict -> L-scan -> update -> global hypotheses -> pruning, for time step posterior().time + 1.
  void step(const MeasurementSet& measurements);

  void predict();
  void apply_lscan();
  void update(const MeasurementSet& measurements);
  void prune();

  /// Trees under the most likely global hypothesis with branches of existence above the
  /// estimate threshold, each at its most likely end time.
  std::vector<TreeTrajectory> estimate() const;

 private:
  ScenarioConfig config_;
  GaussianTreeModel model_;
  PMBMPosterior posterior_;
};

/// Violated structural invariants of a posterior, one message each; empty means consistent.
/// `measurements_per_step[t-1]` is the size of the measurement set at step t.
std::vector<std::string> check_posterior(const PMBMPosterior& posterior, const std::vector<int>& measurements_per_step,
                                         double tolerance = 1e-9);

/// Debugging snapshot: trees, slots, local hypotheses and global hypotheses as JSON.
std::string posterior_to_json(const PMBMPosterior& posterior);

}  // namespace trpmbm
