#pragma once

#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "trpmbm/errors.hpp"
#include "trpmbm/genealogy.hpp"

namespace trpmbm {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Parameter aliases that do not take part in deduction, so Eigen expressions bind at call sites.
template <typename Scalar>
using VectorArg = const VectorX<std::type_identity_t<Scalar>>&;
template <typename Scalar>
using MatrixArg = const MatrixX<std::type_identity_t<Scalar>>&;

/// Jitter added once to a non positive-definite innovation covariance before giving up.
inline constexpr double kInnovationJitter = 1e-9;

/// Branch states that left the L-scan window. Immutable and shared between hypotheses:
/// every copy of a component references the same chain and appending creates a new head.
template <typename Scalar>
class FrozenStates {
 public:
  struct Block {
    VectorX<Scalar> mean;
    MatrixX<Scalar> cov;
    std::shared_ptr<const Block> previous;
    int states_before = 0;
  };

  int num_states() const noexcept { return head_ ? head_->states_before + block_states(*head_) : 0; }
  bool empty() const noexcept { return !head_; }
  int state_dim() const noexcept { return state_dim_; }

  FrozenStates appended(VectorX<Scalar> mean, MatrixX<Scalar> cov, int state_dim) const {
    FrozenStates next;
    next.state_dim_ = state_dim;
    auto block = std::make_shared<Block>();
    block->mean = std::move(mean);
    block->cov = std::move(cov);
    block->previous = head_;
    block->states_before = num_states();
    next.head_ = std::move(block);
    return next;
  }

  /// Blocks from oldest to newest.
  std::vector<const Block*> blocks() const {
    std::vector<const Block*> out;
    for (const Block* b = head_.get(); b != nullptr; b = b->previous.get()) out.push_back(b);
    return {out.rbegin(), out.rend()};
  }

 private:
  int block_states(const Block& b) const noexcept { return static_cast<int>(b.mean.size()) / state_dim_; }

  std::shared_ptr<const Block> head_;
  int state_dim_ = 0;
};

/// Gaussian density on a single-branch space: genealogy plus a joint Gaussian over the
/// branch's state sequence. States older than the L-scan window live in `frozen` and are
/// independent of the live window (`mean`, `cov`), which always holds the newest states.
template <typename Scalar>
struct GaussianBranchComponent {
  GenealogyVar genealogy;
  int state_dim = 0;
  VectorX<Scalar> mean;
  MatrixX<Scalar> cov;
  FrozenStates<Scalar> frozen;

  GaussianBranchComponent() = default;
  GaussianBranchComponent(GenealogyVar g, VectorX<Scalar> m, MatrixX<Scalar> p, int nx)
      : genealogy(std::move(g)), state_dim(nx), mean(std::move(m)), cov(std::move(p)) {
    if (state_dim <= 0 || mean.size() % state_dim != 0 || mean.size() == 0) {
      throw DimensionError("branch mean length must be a positive multiple of the state dimension");
    }
    if (cov.rows() != mean.size() || cov.cols() != mean.size()) throw DimensionError("branch covariance size mismatch");
    if (live_states() != branch_length(genealogy)) {
      throw DimensionError("branch holds " + std::to_string(live_states()) + " states but genealogy " +
                           genealogy.to_string() + " implies " + std::to_string(branch_length(genealogy)));
    }
  }

  int live_states() const noexcept { return static_cast<int>(mean.size()) / state_dim; }
  int num_states() const noexcept { return frozen.num_states() + live_states(); }

  auto last_mean() const { return mean.tail(state_dim); }
  auto last_cov() const { return cov.bottomRightCorner(state_dim, state_dim); }

  /// Mean of the whole state sequence, oldest state first.
  VectorX<Scalar> full_mean() const {
    VectorX<Scalar> out(static_cast<Eigen::Index>(num_states()) * state_dim);
    Eigen::Index offset = 0;
    for (const auto* block : frozen.blocks()) {
      out.segment(offset, block->mean.size()) = block->mean;
      offset += block->mean.size();
    }
    out.tail(mean.size()) = mean;
    return out;
  }

  /// Covariance of the whole state sequence; frozen blocks are uncorrelated with the rest.
  MatrixX<Scalar> full_covariance() const {
    const Eigen::Index n = static_cast<Eigen::Index>(num_states()) * state_dim;
    MatrixX<Scalar> out = MatrixX<Scalar>::Zero(n, n);
    Eigen::Index offset = 0;
    for (const auto* block : frozen.blocks()) {
      out.block(offset, offset, block->cov.rows(), block->cov.cols()) = block->cov;
      offset += block->cov.rows();
    }
    out.bottomRightCorner(cov.rows(), cov.cols()) = cov;
    return out;
  }
};

template <typename Derived>
void resymmetrize(Eigen::MatrixBase<Derived>& p) {
  p = (0.5 * (p + p.transpose())).eval();
}

namespace detail {

template <typename Scalar>
void require_square(const MatrixX<Scalar>& m, Eigen::Index n, const char* name) {
  if (m.rows() != n || m.cols() != n) {
    throw DimensionError(std::string(name) + " must be " + std::to_string(n) + "x" + std::to_string(n));
  }
}

template <typename Scalar>
void check_motion(const GaussianBranchComponent<Scalar>& c, MatrixArg<Scalar> f, VectorArg<Scalar> d,
                  MatrixArg<Scalar> q) {
  require_square(f, c.state_dim, "transition matrix");
  require_square(q, c.state_dim, "process noise");
  if (d.size() != c.state_dim) throw DimensionError("motion offset has wrong length");
}

template <typename Scalar>
void check_measurement(const GaussianBranchComponent<Scalar>& c, VectorArg<Scalar> z, MatrixArg<Scalar> h,
                       MatrixArg<Scalar> r) {
  if (h.cols() != c.state_dim) throw DimensionError("measurement matrix column count must equal state dimension");
  if (z.size() != h.rows()) throw DimensionError("measurement length must equal measurement matrix rows");
  require_square(r, h.rows(), "measurement noise");
}

}  // namespace detail

/// Innovation of the last branch state against a measurement, with a Cholesky factor of S.
template <typename Scalar>
struct Innovation {
  VectorX<Scalar> residual;
  MatrixX<Scalar> cov;
  Eigen::LLT<MatrixX<Scalar>> chol;

  Scalar squared_mahalanobis() const { return chol.matrixL().solve(residual).squaredNorm(); }

  Scalar log_density() const {
    const Scalar log_det = 2 * chol.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const auto n = static_cast<Scalar>(residual.size());
    return -Scalar(0.5) * (n * std::log(2 * std::numbers::pi_v<Scalar>) + log_det + squared_mahalanobis());
  }
};

/// z - H x_last and S = H P_last H' + R. A non-PD S gets `kInnovationJitter` once, then fails.
template <typename Scalar>
Innovation<Scalar> innovation(const GaussianBranchComponent<Scalar>& c, VectorArg<Scalar> z,
                              MatrixArg<Scalar> h, MatrixArg<Scalar> r) {
  detail::check_measurement(c, z, h, r);
  Innovation<Scalar> out;
  out.residual = z - h * c.last_mean();
  out.cov = h * c.last_cov() * h.transpose() + r;
  resymmetrize(out.cov);
  out.chol.compute(out.cov);
  if (out.chol.info() != Eigen::Success) {
    out.cov.diagonal().array() += Scalar(kInnovationJitter);
    out.chol.compute(out.cov);
    if (out.chol.info() != Eigen::Success) throw NumericalError("innovation covariance is not positive definite");
  }
  return out;
}

/// Appends the next state x_{l+1} = F1 x_l + d1 + w, w ~ N(0, Q1), and mark 1 to the genealogy.
template <typename Scalar>
GaussianBranchComponent<Scalar> predict_augment_survive(const GaussianBranchComponent<Scalar>& c,
                                                        MatrixArg<Scalar> f, VectorArg<Scalar> d,
                                                        MatrixArg<Scalar> q) {
  detail::check_motion(c, f, d, q);
  const Eigen::Index n = c.mean.size();
  const Eigen::Index nx = c.state_dim;
  GaussianBranchComponent<Scalar> out;
  out.genealogy = c.genealogy.appended(1);
  out.state_dim = c.state_dim;
  out.frozen = c.frozen;
  out.mean.resize(n + nx);
  out.mean.head(n) = c.mean;
  out.mean.tail(nx) = f * c.last_mean() + d;

  // F_bar P = F * (last block row of P)
  const MatrixX<Scalar> fp = f * c.cov.bottomRows(nx);
  out.cov.resize(n + nx, n + nx);
  out.cov.topLeftCorner(n, n) = c.cov;
  out.cov.bottomLeftCorner(nx, n) = fp;
  out.cov.topRightCorner(n, nx) = fp.transpose();
  out.cov.bottomRightCorner(nx, nx) = fp.rightCols(nx) * f.transpose() + q;
  resymmetrize(out.cov);
  return out;
}

/// Single-state branch spawned with mode m: N(F_m x_last + d_m, F_m P_last F_m' + Q_m),
/// genealogy (w, m).
template <typename Scalar>
GaussianBranchComponent<Scalar> spawn_component(const GaussianBranchComponent<Scalar>& c, MatrixArg<Scalar> f,
                                                VectorArg<Scalar> d, MatrixArg<Scalar> q, int mode) {
  detail::check_motion(c, f, d, q);
  if (mode < 2) throw ConstraintError("spawning mode must be >= 2");
  GaussianBranchComponent<Scalar> out;
  out.genealogy = c.genealogy.appended(mode);
  out.state_dim = c.state_dim;
  out.mean = f * c.last_mean() + d;
  out.cov = f * c.last_cov() * f.transpose() + q;
  resymmetrize(out.cov);
  return out;
}

template <typename Scalar>
struct GaussianUpdate {
  GaussianBranchComponent<Scalar> component;
  Scalar log_likelihood;

  Scalar likelihood() const { return std::exp(log_likelihood); }
};

/// Kalman update of the whole live window through the lifted observation [0, ..., 0, 1] (x) H.
/// Also returns log N(z; H x_last, H P_last H' + R).
template <typename Scalar>
GaussianUpdate<Scalar> update_last_state(const GaussianBranchComponent<Scalar>& c, VectorArg<Scalar> z,
                                         MatrixArg<Scalar> h, MatrixArg<Scalar> r) {
  if (!c.genealogy.alive_at_end()) throw ConstraintError("cannot update a branch that is not alive");
  const auto inn = innovation(c, z, h, r);
  const Eigen::Index nx = c.state_dim;
  // Cross covariance between the live window and the predicted measurement.
  const MatrixX<Scalar> cross = c.cov.rightCols(nx) * h.transpose();
  const MatrixX<Scalar> gain = inn.chol.solve(cross.transpose()).transpose();

  GaussianUpdate<Scalar> out{c, inn.log_density()};
  out.component.mean += gain * inn.residual;
  out.component.cov -= gain * cross.transpose();
  resymmetrize(out.component.cov);
  return out;
}

template <typename Scalar>
Scalar log_predictive_likelihood(const GaussianBranchComponent<Scalar>& c, VectorArg<Scalar> z,
                                 MatrixArg<Scalar> h, MatrixArg<Scalar> r) {
  return innovation(c, z, h, r).log_density();
}

/// Ellipsoidal gate: squared Mahalanobis distance of the innovation <= threshold.
template <typename Scalar>
bool gate(VectorArg<Scalar> z, const GaussianBranchComponent<Scalar>& c, MatrixArg<Scalar> h,
          MatrixArg<Scalar> r, Scalar threshold) {
  return innovation(c, z, h, r).squared_mahalanobis() <= threshold;
}

/// L-scan: states older than the newest L are made independent of the newer ones and frozen.
/// The marginal of the newest L states is untouched.
template <typename Scalar>
GaussianBranchComponent<Scalar> l_scan_truncate(const GaussianBranchComponent<Scalar>& c, int window) {
  if (window < 1) throw ConstraintError("L-scan window must be >= 1");
  const int excess = c.live_states() - window;
  if (excess <= 0) return c;
  const Eigen::Index old = static_cast<Eigen::Index>(excess) * c.state_dim;
  const Eigen::Index keep = c.mean.size() - old;
  GaussianBranchComponent<Scalar> out;
  out.genealogy = c.genealogy;
  out.state_dim = c.state_dim;
  out.frozen = c.frozen.appended(c.mean.head(old), c.cov.topLeftCorner(old, old), c.state_dim);
  out.mean = c.mean.tail(keep);
  out.cov = c.cov.bottomRightCorner(keep, keep);
  return out;
}

/// Weighted PPP term for undetected trees: alive, never-spawned single branch.
template <typename Scalar>
struct PPPComponent {
  Scalar log_weight;
  int start_time;
  GaussianBranchComponent<Scalar> density;

  Scalar weight() const { return std::exp(log_weight); }
};

}  // namespace trpmbm
