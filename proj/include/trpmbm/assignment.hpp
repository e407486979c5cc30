#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "trpmbm/errors.hpp"

namespace trpmbm {

/// One-to-one row -> column assignment; `columns[r]` is the column of row r.
template <typename Scalar>
struct Assignment {
  std::vector<int> columns;
  Scalar cost = 0;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

namespace detail {

template <typename Scalar>
bool finite_cost(Scalar v) {
  return std::isfinite(v);
}

/// Sentinel for +inf entries: larger than any sum of finite entries, small enough that
/// adding it to any potential never overflows.
template <typename Derived>
typename Derived::Scalar infinity_sentinel(const Eigen::MatrixBase<Derived>& cost) {
  using Scalar = typename Derived::Scalar;
  Scalar span = 0;
  for (Eigen::Index r = 0; r < cost.rows(); ++r) {
    for (Eigen::Index c = 0; c < cost.cols(); ++c) {
      if (finite_cost(cost(r, c))) span = std::max(span, std::abs(cost(r, c)));
    }
  }
  return (span + 1) * Scalar(4) * static_cast<Scalar>(cost.rows() + cost.cols() + 1);
}

/// Assignment problem padded to a square one with implicit zero-cost dummy rows, together
/// with dual potentials and a matching. Reduced costs stay nonnegative and matched pairs
/// tight; raising entries and unmatching one row keeps that true, so a single augmentation
/// restores optimality.
template <typename Scalar>
struct WarmAssignment {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> a;  // real rows only
  std::vector<Scalar> u, v;  // 1-based, u also covers the dummy rows
  std::vector<int> p;        // column (1-based) -> row (1-based), 0 when free

  explicit WarmAssignment(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> costs)
      : a(std::move(costs)),
        u(static_cast<std::size_t>(a.cols() + 1), 0),
        v(static_cast<std::size_t>(a.cols() + 1), 0),
        p(static_cast<std::size_t>(a.cols() + 1), 0) {}

  /// Shortest augmenting path from the free row `row` (0-based).
  void augment(int row) {
    const int n = static_cast<int>(a.rows());
    const int m = static_cast<int>(a.cols());
    const Scalar inf = std::numeric_limits<Scalar>::infinity();
    thread_local std::vector<Scalar> minv;
    thread_local std::vector<int> way;
    thread_local std::vector<char> used;
    minv.assign(static_cast<std::size_t>(m + 1), inf);
    way.assign(static_cast<std::size_t>(m + 1), 0);
    used.assign(static_cast<std::size_t>(m + 1), 0);
    p[0] = row + 1;
    int j0 = 0;
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = p[static_cast<std::size_t>(j0)];
      const Scalar ui = u[static_cast<std::size_t>(i0)];
      const Scalar* costs = i0 <= n ? a.data() + static_cast<std::ptrdiff_t>(i0 - 1) * m : nullptr;
      Scalar delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const Scalar cur = (costs ? costs[j - 1] : Scalar(0)) - ui - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
};

/// Optimal matching of `cost` padded with zero-cost rows to a square matrix, infinities
/// replaced by `big`.
template <typename Derived>
WarmAssignment<typename Derived::Scalar> solve_padded(const Eigen::MatrixBase<Derived>& cost,
                                                     typename Derived::Scalar big) {
  using Scalar = typename Derived::Scalar;
  WarmAssignment<Scalar> w(cost.unaryExpr([big](Scalar x) { return finite_cost(x) ? x : big; }));
  for (int r = 0; r < cost.rows(); ++r) w.augment(r);
  // Free columns still have zero potential, so dummy rows take them with zero reduced cost.
  int dummy = static_cast<int>(cost.rows());
  for (std::size_t j = 1; j < w.p.size(); ++j)
    if (w.p[j] == 0) w.p[j] = ++dummy;
  return w;
}

/// Columns of the first `rows` rows of a matching.
template <typename Scalar>
std::vector<int> matched_columns(const WarmAssignment<Scalar>& w, Eigen::Index rows) {
  std::vector<int> columns(static_cast<std::size_t>(rows), -1);
  for (std::size_t j = 1; j < w.p.size(); ++j) {
    const int i = w.p[j];
    if (i >= 1 && i <= rows) columns[static_cast<std::size_t>(i - 1)] = static_cast<int>(j) - 1;
  }
  return columns;
}

}  // namespace detail

/// Minimum-cost assignment of every row to a distinct column. Entries equal to +inf are
/// forbidden. Requires rows <= columns. Throws InfeasibleError naming the first row that
/// cannot be assigned.
template <typename Derived>
Assignment<typename Derived::Scalar> hungarian(const Eigen::MatrixBase<Derived>& cost) {
  using Scalar = typename Derived::Scalar;
  if (cost.rows() > cost.cols()) throw DimensionError("assignment needs rows <= columns");
  Assignment<Scalar> out;
  if (cost.rows() == 0) return out;
  for (Eigen::Index r = 0; r < cost.rows(); ++r) {
    bool any = false;
    for (Eigen::Index c = 0; c < cost.cols() && !any; ++c) any = detail::finite_cost(cost(r, c));
    if (!any) throw InfeasibleError("row " + std::to_string(r) + " has no finite entry", static_cast<int>(r));
  }
  out.columns = detail::matched_columns(detail::solve_padded(cost, detail::infinity_sentinel(cost)), cost.rows());
  for (std::size_t r = 0; r < out.columns.size(); ++r) {
    const Scalar v = cost(static_cast<Eigen::Index>(r), out.columns[r]);
    if (!detail::finite_cost(v)) {
      throw InfeasibleError("row " + std::to_string(r) + " cannot be assigned to a free column", static_cast<int>(r));
    }
    out.cost += v;
  }
  return out;
}

/// The K cheapest assignments in nondecreasing cost. Equal costs are ordered by the
/// lexicographically smaller column vector. Subproblems are warm started from the parent's
/// dual solution.
template <typename Derived>
std::vector<Assignment<typename Derived::Scalar>> murty_kbest(const Eigen::MatrixBase<Derived>& cost, int k) {
  using Scalar = typename Derived::Scalar;
  using Warm = detail::WarmAssignment<Scalar>;
  if (k < 1) throw ConstraintError("K must be >= 1");
  if (cost.rows() > cost.cols()) throw DimensionError("assignment needs rows <= columns");
  const int rows = static_cast<int>(cost.rows());
  const int cols = static_cast<int>(cost.cols());
  std::vector<Assignment<Scalar>> out;
  if (rows == 0) {
    out.push_back({});
    return out;
  }
  for (int r = 0; r < rows; ++r) {
    bool any = false;
    for (int c = 0; c < cols && !any; ++c) any = detail::finite_cost(cost(r, c));
    if (!any) throw InfeasibleError("row " + std::to_string(r) + " has no finite entry", r);
  }
  const Scalar big = detail::infinity_sentinel(cost);

  // A subproblem fixes the first `fixed` rows to the solution's columns; forbidden and
  // forcing entries are raised to the sentinel in `state.a`.
  struct Node {
    Assignment<Scalar> solution;
    Warm state;
    int fixed = 0;
  };
  // Reads the real rows' assignment; false when it needs a forbidden entry.
  auto extract = [&](const Warm& state, Assignment<Scalar>& solution) {
    solution.columns = detail::matched_columns(state, rows);
    solution.cost = 0;
    for (int r = 0; r < rows; ++r) {
      const int c = solution.columns[static_cast<std::size_t>(r)];
      if (c < 0 || !(state.a(r, c) < big)) return false;
      solution.cost += cost(r, c);
    }
    return true;
  };
  auto worse = [](const Node& a, const Node& b) {
    if (a.solution.cost != b.solution.cost) return a.solution.cost > b.solution.cost;
    return a.solution.columns > b.solution.columns;
  };
  std::priority_queue<Node, std::vector<Node>, decltype(worse)> queue(worse);

  Node root{{}, detail::solve_padded(cost, big), 0};
  if (!extract(root.state, root.solution)) {
    for (int r = 0; r < rows; ++r) {
      const int c = root.solution.columns[static_cast<std::size_t>(r)];
      if (c < 0 || !detail::finite_cost(cost(r, c))) {
        throw InfeasibleError("row " + std::to_string(r) + " cannot be assigned to a free column", r);
      }
    }
  }
  queue.push(std::move(root));

  while (!queue.empty() && static_cast<int>(out.size()) < k) {
    Node node = queue.top();
    queue.pop();
    out.push_back(node.solution);
    if (static_cast<int>(out.size()) == k) break;

    Warm partition = std::move(node.state);
    for (int r = node.fixed; r < rows; ++r) {
      const int col = node.solution.columns[static_cast<std::size_t>(r)];
      Node child{{}, partition, r};
      child.state.a(r, col) = big;
      child.state.p[static_cast<std::size_t>(col + 1)] = 0;
      child.state.augment(r);
      if (extract(child.state, child.solution)) queue.push(std::move(child));
      // Force row r to its column for the remaining partitions.
      for (int c = 0; c < cols; ++c)
        if (c != col) partition.a(r, c) = big;
    }
  }
  return out;
}

}  // namespace trpmbm
