#pragma once

#include <algorithm>
#include <concepts>
#include <numeric>
#include <utility>
#include <vector>

#include "trpmbm/errors.hpp"
#include "trpmbm/genealogy.hpp"

namespace trpmbm {

/// Density of the branch's states given that it ends at `end_time`, weighted by the
/// probability `beta` of that end time.
template <typename Density>
struct EndTimeComponent {
  int end_time;
  double beta;
  Density density;
};

/// Single-branch density: a mixture over end times. Only end times with beta > 0 are
/// stored, in ascending order.
template <typename Density>
struct BranchDensity {
  int start_time = 1;
  std::vector<EndTimeComponent<Density>> components;

  const EndTimeComponent<Density>* find(int end_time) const {
    auto it = std::find_if(components.begin(), components.end(),
                           [end_time](const auto& c) { return c.end_time == end_time; });
    return it == components.end() ? nullptr : &*it;
  }
  EndTimeComponent<Density>* find(int end_time) {
    return const_cast<EndTimeComponent<Density>*>(std::as_const(*this).find(end_time));
  }

  double beta(int end_time) const {
    const auto* c = find(end_time);
    return c ? c->beta : 0.0;
  }

  double beta_sum() const {
    return std::accumulate(components.begin(), components.end(), 0.0,
                           [](double acc, const auto& c) { return acc + c.beta; });
  }

  /// Drops zero-weight end times and rescales the rest to sum to one.
  void normalize() {
    std::erase_if(components, [](const auto& c) { return !(c.beta > 0.0); });
    const double total = beta_sum();
    if (!(total > 0.0)) throw NumericalError("branch end-time distribution has no mass");
    for (auto& c : components) c.beta /= total;
  }

  /// End time with the largest beta; ties go to the latest end time.
  const EndTimeComponent<Density>& most_likely() const {
    if (components.empty()) throw NumericalError("empty branch density");
    const EndTimeComponent<Density>* best = &components.front();
    for (const auto& c : components) {
      if (c.beta >= best->beta) best = &c;
    }
    return *best;
  }
};

/// Branch transition model used by the tree prediction. `survive` conditions on survival and
/// appends the next state; `terminate` conditions on death at the current step; `carry`
/// appends the dead mark to a branch that had already ended. Probabilities are the
/// expectations of p^S_m under the branch's last-state marginal.
template <typename Model, typename Density>
concept BranchTransitionModel = requires(const Model& model, const Density& d, int mode) {
  { model.modes() } -> std::convertible_to<int>;
  { model.survival_probability(d) } -> std::convertible_to<double>;
  { model.survive(d) } -> std::convertible_to<Density>;
  { model.terminate(d) } -> std::convertible_to<Density>;
  { model.carry(d) } -> std::convertible_to<Density>;
  { model.spawn_probability(d, mode) } -> std::convertible_to<double>;
  { model.spawn(d, mode) } -> std::convertible_to<Density>;
};

template <typename Density>
struct SpawnedBranch {
  int mode;
  /// Factor multiplying the parent's existence: <p^S_m, last-state marginal> * beta(k-1).
  double existence_factor;
  BranchDensity<Density> density;
};

template <typename Density>
struct BranchPrediction {
  BranchDensity<Density> surviving;
  std::vector<SpawnedBranch<Density>> spawned;
};

/// Predicts one branch from `previous_time` to `previous_time + 1`: the surviving branch keeps
/// its existence and gets a new end-time distribution; each spawning mode yields a
/// single-state branch starting at the new time. Modes with zero probability are omitted.
template <typename Density, BranchTransitionModel<Density> Model>
BranchPrediction<Density> predict_branch(const Model& model, const BranchDensity<Density>& branch, int previous_time) {
  const int now = previous_time + 1;
  BranchPrediction<Density> out;
  out.surviving.start_time = branch.start_time;
  for (const auto& c : branch.components) {
    if (c.end_time < previous_time) {
      out.surviving.components.push_back({c.end_time, c.beta, model.carry(c.density)});
      continue;
    }
    if (c.end_time != previous_time) throw ConstraintError("branch end time after the prediction time");
    const double p_survive = model.survival_probability(c.density);
    if (p_survive < 1.0) {
      out.surviving.components.push_back({c.end_time, (1.0 - p_survive) * c.beta, model.terminate(c.density)});
    }
    if (p_survive > 0.0) {
      out.surviving.components.push_back({now, p_survive * c.beta, model.survive(c.density)});
    }
    for (int mode = 2; mode <= model.modes(); ++mode) {
      const double p_spawn = model.spawn_probability(c.density, mode);
      if (!(p_spawn > 0.0)) continue;
      BranchDensity<Density> child;
      child.start_time = now;
      child.components.push_back({now, 1.0, model.spawn(c.density, mode)});
      out.spawned.push_back({mode, p_spawn * c.beta, std::move(child)});
    }
  }
  std::erase_if(out.surviving.components, [](const auto& c) { return !(c.beta > 0.0); });
  return out;
}

}  // namespace trpmbm
