#pragma once

#include <vector>

#include <Eigen/Dense>

#include "trpmbm/gaussian_branch.hpp"

namespace trpmbm {

using GaussianBranch = GaussianBranchComponent<double>;

/// Speed below which the perpendicular direction is taken as +y.
inline constexpr double kMinimumSpeed = 1e-6;

/// (-vy, 0, vx, 0) / speed for a state laid out as (px, vx, py, vy).
Eigen::Vector4d perp_unit(const Eigen::Ref<const Eigen::VectorXd>& state);

/// One motion mode: mode 1 is survival, modes >= 2 spawn. The offset is
/// `offset + perpendicular_offset * perp_unit(x)`.
struct MotionMode {
  Eigen::MatrixXd transition;
  Eigen::VectorXd offset;
  double perpendicular_offset = 0.0;
  Eigen::MatrixXd noise;
  double probability = 0.0;

  Eigen::VectorXd offset_at(const Eigen::Ref<const Eigen::VectorXd>& state) const;
  /// Mean of the next state given `state`.
  Eigen::VectorXd mean_at(const Eigen::Ref<const Eigen::VectorXd>& state) const;
};

struct Region {
  double x_min = 0, x_max = 600, y_min = 0, y_max = 400;

  double area() const { return (x_max - x_min) * (y_max - y_min); }
  bool contains(const Eigen::Ref<const Eigen::VectorXd>& z) const {
    return z(0) >= x_min && z(0) <= x_max && z(1) >= y_min && z(1) <= y_max;
  }
};

struct MeasurementModel {
  Eigen::MatrixXd observation;
  Eigen::MatrixXd noise;
  double detection_probability = 0.9;
  double clutter_rate = 10.0;
  Region region;

  /// Clutter intensity lambda_C(z) = rate / area, taken as constant.
  double clutter_intensity() const { return clutter_rate / region.area(); }
};

struct BirthComponent {
  double weight;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// Linear/Gaussian tree dynamics with constant mode probabilities, in the form the branch
/// prediction expects. Spawning offsets use the perpendicular direction at the predicted
/// (surviving) mean of the parent's last state.
class GaussianTreeModel {
 public:
  explicit GaussianTreeModel(std::vector<MotionMode> modes) : modes_(std::move(modes)) {}

  int modes() const { return static_cast<int>(modes_.size()); }
  const MotionMode& mode(int m) const { return modes_[static_cast<std::size_t>(m - 1)]; }

  double survival_probability(const GaussianBranch&) const { return modes_.front().probability; }
  double spawn_probability(const GaussianBranch&, int m) const { return mode(m).probability; }

  GaussianBranch survive(const GaussianBranch& c) const;
  GaussianBranch terminate(const GaussianBranch& c) const { return carry(c); }
  GaussianBranch carry(const GaussianBranch& c) const;
  GaussianBranch spawn(const GaussianBranch& c, int m) const;

 private:
  std::vector<MotionMode> modes_;
};

}  // namespace trpmbm
