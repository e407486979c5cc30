#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "trpmbm/errors.hpp"
#include "trpmbm/genealogy.hpp"

namespace trpmbm {

/// Branch density over a finite single-target state space {0, ..., states-1}: a pmf over
/// state sequences of length l(genealogy). Sequence (x1, ..., xl) is stored at index
/// x1 * S^(l-1) + ... + xl, so the last state is the fastest-moving digit.
struct DiscreteBranch {
  GenealogyVar genealogy;
  int states = 0;
  std::vector<double> pmf;

  int length() const { return branch_length(genealogy); }
  /// Marginal pmf of the last state.
  Eigen::VectorXd last_marginal() const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(states);
    for (std::size_t i = 0; i < pmf.size(); ++i) out(static_cast<Eigen::Index>(i % static_cast<std::size_t>(states))) += pmf[i];
    return out;
  }
};

/// Finite-state transition model with state-dependent mode probabilities. Mode m (1-based)
/// has probability `mode_probability(m-1, x)` and kernel `kernels[m-1](x, y)`.
class DiscreteTransitionModel {
 public:
  DiscreteTransitionModel(Eigen::MatrixXd mode_probability, std::vector<Eigen::MatrixXd> kernels)
      : mode_probability_(std::move(mode_probability)), kernels_(std::move(kernels)) {
    if (kernels_.empty() || static_cast<Eigen::Index>(kernels_.size()) != mode_probability_.rows()) {
      throw DimensionError("one kernel and one probability row per mode");
    }
    for (const auto& k : kernels_) {
      if (k.rows() != mode_probability_.cols() || k.cols() != mode_probability_.cols()) {
        throw DimensionError("kernel size must equal the number of states");
      }
    }
  }

  int modes() const { return static_cast<int>(kernels_.size()); }
  int states() const { return static_cast<int>(mode_probability_.cols()); }
  double mode_probability(int mode, int x) const { return mode_probability_(mode - 1, x); }
  double kernel(int mode, int x, int y) const { return kernels_[static_cast<std::size_t>(mode - 1)](x, y); }

  double survival_probability(const DiscreteBranch& d) const { return expected_mode_probability(d, 1); }
  double spawn_probability(const DiscreteBranch& d, int mode) const { return expected_mode_probability(d, mode); }

  DiscreteBranch survive(const DiscreteBranch& d) const {
    DiscreteBranch out{d.genealogy.appended(1), d.states, {}};
    const auto s = static_cast<std::size_t>(states());
    out.pmf.assign(d.pmf.size() * s, 0.0);
    for (std::size_t i = 0; i < d.pmf.size(); ++i) {
      const int last = static_cast<int>(i % s);
      for (std::size_t y = 0; y < s; ++y) {
        out.pmf[i * s + y] = d.pmf[i] * mode_probability(1, last) * kernel(1, last, static_cast<int>(y));
      }
    }
    normalize(out.pmf);
    return out;
  }

  DiscreteBranch terminate(const DiscreteBranch& d) const {
    DiscreteBranch out{d.genealogy.appended(0), d.states, d.pmf};
    const auto s = static_cast<std::size_t>(states());
    for (std::size_t i = 0; i < out.pmf.size(); ++i) out.pmf[i] *= 1.0 - mode_probability(1, static_cast<int>(i % s));
    normalize(out.pmf);
    return out;
  }

  DiscreteBranch carry(const DiscreteBranch& d) const { return {d.genealogy.appended(0), d.states, d.pmf}; }

  DiscreteBranch spawn(const DiscreteBranch& d, int mode) const {
    DiscreteBranch out{d.genealogy.appended(mode), d.states, std::vector<double>(static_cast<std::size_t>(states()), 0.0)};
    const Eigen::VectorXd last = d.last_marginal();
    for (int x = 0; x < states(); ++x) {
      for (int y = 0; y < states(); ++y) {
        out.pmf[static_cast<std::size_t>(y)] += last(x) * mode_probability(mode, x) * kernel(mode, x, y);
      }
    }
    normalize(out.pmf);
    return out;
  }

 private:
  double expected_mode_probability(const DiscreteBranch& d, int mode) const {
    return d.last_marginal().dot(mode_probability_.row(mode - 1).transpose());
  }

  static void normalize(std::vector<double>& pmf) {
    double total = 0;
    for (double p : pmf) total += p;
    if (!(total > 0)) throw NumericalError("discrete branch density has no mass");
    for (double& p : pmf) p /= total;
  }

  Eigen::MatrixXd mode_probability_;
  std::vector<Eigen::MatrixXd> kernels_;
};

}  // namespace trpmbm
