#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "trpmbm/tree.hpp"

namespace trpmbm {

struct TrajMetricParams {
  double p = 2.0;
  double c = 10.0;      // cutoff, meters
  double gamma = 1.0;   // track switch penalty
};

/// total^p = localisation^p + missed^p + false_targets^p + switches^p.
struct MetricBreakdown {
  double total = 0.0;
  double localisation = 0.0;
  double missed = 0.0;
  double false_targets = 0.0;
  double switches = 0.0;
};

/// A 2-D trajectory alive on the contiguous steps start_time .. start_time + cols - 1.
struct Track {
  std::string label;
  int start_time = 1;
  Eigen::Matrix2Xd positions;

  int end_time() const noexcept { return start_time + static_cast<int>(positions.cols()) - 1; }
};

/// LP metric between two sets of trajectories restricted to steps 1..k, normalised by k.
/// Matched pairs cost min(d, c)^p per step, an unmatched alive track c^p/2 per step and each
/// unit change of an assignment weight between consecutive steps gamma^p/2.
/// Throws RangeError for k < 1, ConstraintError for bad parameters or a track starting before
/// step 1 or holding no positions.
MetricBreakdown trajectory_metric(std::span<const Track> estimate, std::span<const Track> truth,
                                  const TrajMetricParams& params, int k);

/// One track per branch, labeled "<tree index>:<branch id>", positions from state rows
/// `x_row` and `y_row`.
std::vector<Track> branches_as_tracks(std::span<const TreeTrajectory> trees, int x_row = 0, int y_row = 2);

}  // namespace trpmbm
