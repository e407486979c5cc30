#include "trpmbm/traj_metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "trpmbm/errors.hpp"
#include "trpmbm/lp.hpp"

namespace trpmbm {

namespace {

// A truth/estimate pair that comes within the cutoff at least once. Pairs that never do are
// never worth matching: leaving both unmatched costs the same per step and no switches.
struct Pair {
  int truth;
  int est;
  std::map<int, double> close;  // step -> distance, only steps with distance < c
};

// Partial objective of one connected group of pairs, before normalisation.
struct Partial {
  double localisation = 0.0;
  double matched = 0.0;  // total matching weight on pairs within the cutoff
  double switches = 0.0;
};

struct Alive {
  int first;
  int last;  // first > last when not alive within 1..k
};

int find(std::vector<int>& parent, int x) {
  while (parent[static_cast<std::size_t>(x)] != x) {
    parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    x = parent[static_cast<std::size_t>(x)];
  }
  return x;
}

// Steps (ascending) at which any pair has a nonzero matching gain. Between two such steps the
// assignment may stay constant at no cost, so the others drop out.
std::vector<int> active_steps(std::span<const Pair* const> pairs) {
  std::vector<int> steps;
  for (const Pair* p : pairs)
    for (const auto& [s, d] : p->close) steps.push_back(s);
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
  return steps;
}

// One track on one side: the assignment per step is "unmatched" or one of the pairs, and the
// weight change between two states is a tree distance, so a shortest path is optimal.
Partial solve_star(std::span<const Pair* const> pairs, const TrajMetricParams& params) {
  const std::vector<int> steps = active_steps(pairs);
  const int m = static_cast<int>(pairs.size());
  const double cp = std::pow(params.c, params.p);
  const double lambda = std::pow(params.gamma, params.p) / 2.0;
  auto gain = [&](std::size_t s, int state) {
    if (state == 0) return 0.0;
    const auto& close = pairs[static_cast<std::size_t>(state - 1)]->close;
    const auto it = close.find(steps[s]);
    return it == close.end() ? 0.0 : std::pow(it->second, params.p) - cp;
  };
  auto move = [&](int from, int to) { return from == to ? 0.0 : (from == 0 || to == 0 ? lambda : 2.0 * lambda); };

  const std::size_t states = static_cast<std::size_t>(m + 1);
  std::vector<double> cost(states), next(states);
  std::vector<std::vector<int>> back(steps.size(), std::vector<int>(states, 0));
  for (int j = 0; j <= m; ++j) cost[static_cast<std::size_t>(j)] = gain(0, j);
  for (std::size_t s = 1; s < steps.size(); ++s) {
    for (int j = 0; j <= m; ++j) {
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i <= m; ++i) {
        const double v = cost[static_cast<std::size_t>(i)] + move(i, j);
        if (v < best) {
          best = v;
          back[s][static_cast<std::size_t>(j)] = i;
        }
      }
      next[static_cast<std::size_t>(j)] = best + gain(s, j);
    }
    std::swap(cost, next);
  }
  int state = static_cast<int>(std::min_element(cost.begin(), cost.end()) - cost.begin());
  Partial out;
  for (std::size_t s = steps.size(); s-- > 0;) {
    if (state > 0) {
      const auto& close = pairs[static_cast<std::size_t>(state - 1)]->close;
      if (const auto it = close.find(steps[s]); it != close.end()) {
        out.localisation += std::pow(it->second, params.p);
        out.matched += 1.0;
      }
    }
    if (s > 0) {
      const int prev = back[s][static_cast<std::size_t>(state)];
      out.switches += move(prev, state);
      state = prev;
    }
  }
  return out;
}

// General group. Without the per-step capacity of the estimates each truth would follow its
// own shortest path through {unmatched, its estimates}, which is integral. The LP is solved by
// column generation over such paths: a restricted master LP prices the capacities and the
// path searches add columns until none has negative reduced cost.
Partial solve_general(std::span<const Pair* const> pairs, const TrajMetricParams& params) {
  const std::vector<int> steps = active_steps(pairs);
  const int S = static_cast<int>(steps.size());
  const double cp = std::pow(params.c, params.p);
  const double lambda = std::pow(params.gamma, params.p) / 2.0;

  std::vector<int> truths, ests;
  for (const Pair* p : pairs) {
    truths.push_back(p->truth);
    ests.push_back(p->est);
  }
  std::sort(truths.begin(), truths.end());
  truths.erase(std::unique(truths.begin(), truths.end()), truths.end());
  std::sort(ests.begin(), ests.end());
  ests.erase(std::unique(ests.begin(), ests.end()), ests.end());
  const int T = static_cast<int>(truths.size());
  auto local = [](const std::vector<int>& v, int x) {
    return static_cast<int>(std::lower_bound(v.begin(), v.end(), x) - v.begin());
  };

  // Per truth: the estimates it may be matched to, with distance per step (-1 when not close).
  struct Option {
    int est;
    std::vector<double> dist;
  };
  std::vector<std::vector<Option>> options(static_cast<std::size_t>(T));
  for (const Pair* p : pairs) {
    Option o{local(ests, p->est), std::vector<double>(static_cast<std::size_t>(S), -1.0)};
    for (int s = 0; s < S; ++s)
      if (const auto it = p->close.find(steps[static_cast<std::size_t>(s)]); it != p->close.end())
        o.dist[static_cast<std::size_t>(s)] = it->second;
    options[static_cast<std::size_t>(local(truths, p->truth))].push_back(std::move(o));
  }
  auto gain = [&](const Option& o, int s) {
    const double d = o.dist[static_cast<std::size_t>(s)];
    return d < 0 ? 0.0 : std::pow(d, params.p) - cp;
  };
  auto move = [&](int from, int to) { return from == to ? 0.0 : (from < 0 || to < 0 ? lambda : 2.0 * lambda); };

  struct Column {
    int truth;
    std::vector<int> state;  // option index per step, -1 unmatched
    double cost;
  };
  std::vector<Column> pool;
  std::map<std::pair<int, int>, double> price;  // (est, step) -> capacity dual, <= 0

  // Cheapest path of truth i under the current prices; returns its priced cost.
  auto search = [&](int i, Column& out) {
    const auto& opts = options[static_cast<std::size_t>(i)];
    const int m = static_cast<int>(opts.size());
    auto stage = [&](int s, int j) {
      if (j < 0) return 0.0;
      const Option& o = opts[static_cast<std::size_t>(j)];
      const auto it = price.find({o.est, s});
      return gain(o, s) - (it == price.end() ? 0.0 : it->second);
    };
    std::vector<std::vector<int>> back(static_cast<std::size_t>(S), std::vector<int>(static_cast<std::size_t>(m + 1), -1));
    std::vector<double> cost(static_cast<std::size_t>(m + 1)), next(static_cast<std::size_t>(m + 1));
    for (int j = -1; j < m; ++j) cost[static_cast<std::size_t>(j + 1)] = stage(0, j);
    for (int s = 1; s < S; ++s) {
      for (int j = -1; j < m; ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (int q = -1; q < m; ++q) {
          const double v = cost[static_cast<std::size_t>(q + 1)] + move(q, j);
          if (v < best) {
            best = v;
            back[static_cast<std::size_t>(s)][static_cast<std::size_t>(j + 1)] = q;
          }
        }
        next[static_cast<std::size_t>(j + 1)] = best + stage(s, j);
      }
      std::swap(cost, next);
    }
    const auto arg = std::min_element(cost.begin(), cost.end());
    int state = static_cast<int>(arg - cost.begin()) - 1;
    out.truth = i;
    out.state.assign(static_cast<std::size_t>(S), -1);
    out.cost = 0.0;
    for (int s = S - 1; s >= 0; --s) {
      out.state[static_cast<std::size_t>(s)] = state;
      if (state >= 0) out.cost += gain(opts[static_cast<std::size_t>(state)], s);
      if (s > 0) {
        const int prev = back[static_cast<std::size_t>(s)][static_cast<std::size_t>(state + 1)];
        out.cost += move(prev, state);
        state = prev;
      }
    }
    return *arg;
  };

  for (int i = 0; i < T; ++i) {
    Column col;
    if (search(i, col) < 0) pool.push_back(std::move(col));
  }

  Eigen::VectorXd x;
  for (int iteration = 0;; ++iteration) {
    if (pool.empty()) break;
    if (iteration > 10000) throw NumericalError("trajectory metric LP did not converge");
    // Capacity rows only for (estimate, step) cells some column uses; others cannot bind.
    std::map<std::pair<int, int>, int> rows;
    for (const Column& col : pool)
      for (int s = 0; s < S; ++s)
        if (const int j = col.state[static_cast<std::size_t>(s)]; j >= 0)
          rows.emplace(std::pair{options[static_cast<std::size_t>(col.truth)][static_cast<std::size_t>(j)].est, s}, 0);
    int r = T;
    for (auto& [cell, row] : rows) row = r++;
    const int n = static_cast<int>(pool.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(r, n);
    Eigen::VectorXd c(n);
    for (int q = 0; q < n; ++q) {
      const Column& col = pool[static_cast<std::size_t>(q)];
      a(col.truth, q) = 1.0;
      c(q) = col.cost;
      for (int s = 0; s < S; ++s)
        if (const int j = col.state[static_cast<std::size_t>(s)]; j >= 0)
          a(rows.at({options[static_cast<std::size_t>(col.truth)][static_cast<std::size_t>(j)].est, s}), q) = 1.0;
    }
    const LPSolution sol = solve_lp(a, Eigen::VectorXd::Ones(r), c);
    x = sol.x;
    price.clear();
    for (const auto& [cell, row] : rows) price[cell] = sol.duals(row);

    const double tol = 1e-9 * std::max(1.0, std::abs(sol.objective));
    bool added = false;
    for (int i = 0; i < T; ++i) {
      Column col;
      const double reduced = search(i, col) - sol.duals(i);
      if (reduced >= -tol) continue;
      const bool known = std::any_of(pool.begin(), pool.end(), [&](const Column& p) {
        return p.truth == col.truth && p.state == col.state;
      });
      if (!known) {
        pool.push_back(std::move(col));
        added = true;
      }
    }
    if (!added) break;
  }

  // Assignment weights per (truth, option, step).
  Partial out;
  for (int i = 0; i < T; ++i) {
    const auto& opts = options[static_cast<std::size_t>(i)];
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(opts.size()), S);
    for (std::size_t q = 0; q < pool.size(); ++q) {
      if (pool[q].truth != i) continue;
      for (int s = 0; s < S; ++s)
        if (const int j = pool[q].state[static_cast<std::size_t>(s)]; j >= 0) w(j, s) += x(static_cast<Eigen::Index>(q));
    }
    for (int j = 0; j < w.rows(); ++j) {
      for (int s = 0; s < S; ++s) {
        const double d = opts[static_cast<std::size_t>(j)].dist[static_cast<std::size_t>(s)];
        if (d >= 0) {
          out.localisation += std::pow(d, params.p) * w(j, s);
          out.matched += w(j, s);
        }
        if (s > 0) out.switches += lambda * std::abs(w(j, s) - w(j, s - 1));
      }
    }
  }
  return out;
}

Alive alive_range(const Track& t, int k) {
  if (t.positions.cols() == 0) throw ConstraintError("track '" + t.label + "' holds no positions");
  if (t.start_time < 1) {
    throw ConstraintError("track '" + t.label + "' starts at step " + std::to_string(t.start_time) +
                          ", before step 1");
  }
  if (!t.positions.allFinite()) throw ConstraintError("track '" + t.label + "' has non-finite positions");
  return {t.start_time, std::min(t.end_time(), k)};
}

}  // namespace

MetricBreakdown trajectory_metric(std::span<const Track> estimate, std::span<const Track> truth,
                                  const TrajMetricParams& params, int k) {
  if (k < 1) throw RangeError("metric time step must be >= 1, got " + std::to_string(k));
  if (!(params.p > 0) || !(params.c > 0) || !(params.gamma > 0))
    throw ConstraintError("metric parameters p, c and gamma must be positive");

  const int nt = static_cast<int>(truth.size());
  const int ne = static_cast<int>(estimate.size());
  std::vector<Alive> ta, ea;
  double truth_steps = 0.0, est_steps = 0.0;
  for (const Track& t : truth) {
    ta.push_back(alive_range(t, k));
    truth_steps += std::max(0, ta.back().last - ta.back().first + 1);
  }
  for (const Track& t : estimate) {
    ea.push_back(alive_range(t, k));
    est_steps += std::max(0, ea.back().last - ea.back().first + 1);
  }

  std::vector<Pair> pairs;
  for (int i = 0; i < nt; ++i) {
    for (int j = 0; j < ne; ++j) {
      Pair pair{i, j, {}};
      const int from = std::max(ta[static_cast<std::size_t>(i)].first, ea[static_cast<std::size_t>(j)].first);
      const int to = std::min(ta[static_cast<std::size_t>(i)].last, ea[static_cast<std::size_t>(j)].last);
      const Track& x = truth[static_cast<std::size_t>(i)];
      const Track& e = estimate[static_cast<std::size_t>(j)];
      for (int s = from; s <= to; ++s) {
        const double d = (x.positions.col(s - x.start_time) - e.positions.col(s - e.start_time)).norm();
        if (d < params.c) pair.close.emplace(s, d);
      }
      if (!pair.close.empty()) pairs.push_back(std::move(pair));
    }
  }

  std::vector<int> parent(static_cast<std::size_t>(nt + ne));
  std::iota(parent.begin(), parent.end(), 0);
  for (const Pair& p : pairs) parent[static_cast<std::size_t>(find(parent, p.truth))] = find(parent, nt + p.est);
  std::map<int, std::vector<const Pair*>> groups;
  for (const Pair& p : pairs) groups[find(parent, p.truth)].push_back(&p);

  Partial sum;
  for (const auto& [root, group] : groups) {
    std::vector<int> ts, es;
    for (const Pair* p : group) {
      ts.push_back(p->truth);
      es.push_back(p->est);
    }
    std::sort(ts.begin(), ts.end());
    std::sort(es.begin(), es.end());
    const bool star = std::unique(ts.begin(), ts.end()) - ts.begin() == 1 || std::unique(es.begin(), es.end()) - es.begin() == 1;
    const Partial part = star ? solve_star(group, params) : solve_general(group, params);
    sum.localisation += part.localisation;
    sum.matched += part.matched;
    sum.switches += part.switches;
  }

  const double half = std::pow(params.c, params.p) / 2.0;
  const double inv_p = 1.0 / params.p;
  const double loc = std::max(0.0, sum.localisation) / k;
  const double miss = std::max(0.0, half * (truth_steps - sum.matched)) / k;
  const double fals = std::max(0.0, half * (est_steps - sum.matched)) / k;
  const double sw = std::max(0.0, sum.switches) / k;
  MetricBreakdown out;
  out.localisation = std::pow(loc, inv_p);
  out.missed = std::pow(miss, inv_p);
  out.false_targets = std::pow(fals, inv_p);
  out.switches = std::pow(sw, inv_p);
  out.total = std::pow(loc + miss + fals + sw, inv_p);
  return out;
}

std::vector<Track> branches_as_tracks(std::span<const TreeTrajectory> trees, int x_row, int y_row) {
  std::vector<Track> out;
  for (std::size_t i = 0; i < trees.size(); ++i) {
    const TreeTrajectory& tree = trees[i];
    for (const Branch& branch : tree.branches) {
      Track t;
      t.label = std::to_string(i) + ":" + branch.genealogy.id().to_string();
      t.start_time = branch.first_time(tree.start_time);
      t.positions.resize(2, branch.length());
      t.positions.row(0) = branch.states.row(x_row);
      t.positions.row(1) = branch.states.row(y_row);
      out.push_back(std::move(t));
    }
  }
  return out;
}

}  // namespace trpmbm
