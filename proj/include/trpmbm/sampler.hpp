#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "trpmbm/scenario.hpp"
#include "trpmbm/tree.hpp"

namespace trpmbm {

using MeasurementSet = std::vector<Eigen::VectorXd>;

/// Draw from N(mean, cov) with the Cholesky factor of `cov`.
Eigen::VectorXd sample_gaussian(std::mt19937_64& rng, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov);

/// Ground truth over steps 1..horizon: Poisson births, survival with mode 1, independent
/// spawning with modes >= 2. Spawn offsets use the true parent state. Each tree covers its
/// start time up to the step after its last alive state (capped at the horizon).
std::vector<TreeTrajectory> sample_ground_truth(const ScenarioConfig& config, std::uint64_t seed);

/// Detections of the targets alive at step k plus uniform clutter. Order: target
/// detections in tree/branch order, then clutter.
MeasurementSet sample_measurements(const std::vector<TreeTrajectory>& truth, const ScenarioConfig& config, int k,
                                   std::uint64_t seed);

/// Measurements for steps 1..horizon; element k-1 holds step k.
std::vector<MeasurementSet> sample_measurement_sequence(const std::vector<TreeTrajectory>& truth,
                                                        const ScenarioConfig& config, std::uint64_t seed);

/// CSV with header `k,z1,z2,...`, one row per measurement.
void write_measurements_csv(const std::filesystem::path& path, const std::vector<MeasurementSet>& measurements);
std::vector<MeasurementSet> read_measurements_csv(const std::filesystem::path& path, int horizon);

}  // namespace trpmbm
