#include "trpmbm/models.hpp"

#include <cmath>

#include "trpmbm/errors.hpp"

namespace trpmbm {

Eigen::Vector4d perp_unit(const Eigen::Ref<const Eigen::VectorXd>& state) {
  if (state.size() != 4) throw DimensionError("perpendicular direction needs a (px, vx, py, vy) state");
  const double vx = state(1);
  const double vy = state(3);
  const double speed = std::hypot(vx, vy);
  if (speed < kMinimumSpeed) return {0.0, 0.0, 1.0, 0.0};
  return Eigen::Vector4d(-vy, 0.0, vx, 0.0) / speed;
}

Eigen::VectorXd MotionMode::offset_at(const Eigen::Ref<const Eigen::VectorXd>& state) const {
  if (perpendicular_offset == 0.0) return offset;
  return offset + perpendicular_offset * perp_unit(state);
}

Eigen::VectorXd MotionMode::mean_at(const Eigen::Ref<const Eigen::VectorXd>& state) const {
  return transition * state + offset_at(state);
}

GaussianBranch GaussianTreeModel::survive(const GaussianBranch& c) const {
  const auto& m = modes_.front();
  return predict_augment_survive(c, m.transition, m.offset_at(c.last_mean()), m.noise);
}

GaussianBranch GaussianTreeModel::carry(const GaussianBranch& c) const {
  GaussianBranch out = c;
  out.genealogy = c.genealogy.appended(0);
  return out;
}

GaussianBranch GaussianTreeModel::spawn(const GaussianBranch& c, int m) const {
  const auto& survival = modes_.front();
  const Eigen::VectorXd predicted = survival.mean_at(c.last_mean());
  const auto& spawning = mode(m);
  return spawn_component(c, spawning.transition, spawning.offset_at(predicted), spawning.noise, m);
}

}  // namespace trpmbm
