#include "trpmbm/filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "trpmbm/assignment.hpp"
#include "trpmbm/errors.hpp"

namespace trpmbm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Floor for log weights of events with zero probability (no clutter, certain detection), so
// that assignment costs stay finite.
const double kLogFloor = std::log(std::numeric_limits<double>::min());

double floored_log(double x) { return std::max(std::log(x), kLogFloor); }

double log_sum_exp(const std::vector<double>& values) {
  if (values.empty()) return -kInf;
  const double top = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(top)) return top;
  double sum = 0;
  for (double v : values) sum += std::exp(v - top);
  return top + std::log(sum);
}

/// Merges identical selections (summing weights), normalizes, and orders by decreasing weight
/// with ties broken by selection.
void canonicalize(std::vector<GlobalHypothesis>& globals) {
  std::sort(globals.begin(), globals.end(), [](const auto& a, const auto& b) { return a.selection < b.selection; });
  std::vector<GlobalHypothesis> merged;
  for (auto& g : globals) {
    if (!merged.empty() && merged.back().selection == g.selection) {
      merged.back().log_weight = log_sum_exp({merged.back().log_weight, g.log_weight});
    } else {
      merged.push_back(std::move(g));
    }
  }
  std::vector<double> weights;
  for (const auto& g : merged) weights.push_back(g.log_weight);
  const double total = log_sum_exp(weights);
  if (!std::isfinite(total)) throw NumericalError("global hypothesis weights have no mass");
  for (auto& g : merged) g.log_weight -= total;
  std::stable_sort(merged.begin(), merged.end(), [](const auto& a, const auto& b) { return a.log_weight > b.log_weight; });
  globals = std::move(merged);
}

EndTimeComponent<GaussianBranch>* alive_component(GaussianBranchDensity& d, int k) { return d.find(k); }
const EndTimeComponent<GaussianBranch>* alive_component(const GaussianBranchDensity& d, int k) { return d.find(k); }

}  // namespace

std::size_t PMBMPosterior::num_slots() const {
  std::size_t n = 0;
  for (const auto& t : trees) n += t.slots.size();
  return n;
}

std::vector<std::size_t> PMBMPosterior::slot_offsets() const {
  std::vector<std::size_t> out{0};
  for (const auto& t : trees) out.push_back(out.back() + t.slots.size());
  return out;
}

TreeFilter::TreeFilter(ScenarioConfig config) : TreeFilter(std::move(config), PMBMPosterior{}) {}

TreeFilter::TreeFilter(ScenarioConfig config, PMBMPosterior initial)
    : config_(std::move(config)), model_(config_.tree_model()), posterior_(std::move(initial)) {
  const auto issues = validate_scenario(config_);
  if (!issues.empty()) throw ConfigError("invalid scenario: " + issues.front());
  if (posterior_.globals.empty()) throw ConstraintError("posterior needs at least one global hypothesis");
}

void TreeFilter::step(const MeasurementSet& measurements) {
  predict();
  apply_lscan();
  update(measurements);
  prune();
}

void TreeFilter::predict() {
  auto& post = posterior_;
  const int previous = post.time;
  const int k = ++post.time;
  const int nx = config_.state_dim();

  const double p_survive = model_.mode(1).probability;
  std::vector<GaussianPPPComponent> ppp;
  if (p_survive > 0) {
    for (const auto& c : post.ppp) ppp.push_back({c.log_weight + std::log(p_survive), c.start_time, model_.survive(c.density)});
  }
  if (config_.birth_type == BirthType::kPoisson) {
    for (const auto& b : config_.birth) {
      if (b.weight > 0) ppp.push_back({std::log(b.weight), k, GaussianBranch(GenealogyVar{1}, b.mean, b.covariance, nx)});
    }
  }
  post.ppp = std::move(ppp);

  // Per tree: surviving slots keep their position and hypothesis indices; spawned slots for
  // mode m follow at j + (m - 1) n, one hypothesis per parent hypothesis that can spawn.
  std::vector<BernoulliTree> trees;
  std::vector<std::vector<std::vector<int>>> spawn_maps;  // tree -> new slot -> parent hyp -> spawned hyp
  std::vector<std::vector<std::size_t>> spawn_parent;     // tree -> new slot -> parent slot
  for (const auto& tree : post.trees) {
    BernoulliTree next{tree.start_time, {}};
    const std::size_t n = tree.slots.size();
    std::vector<std::vector<LocalHypothesis>> spawned(n * static_cast<std::size_t>(model_.modes() - 1));
    std::vector<std::vector<int>> index(spawned.size());
    std::vector<BranchId> ids(spawned.size());
    for (std::size_t j = 0; j < n; ++j) {
      const auto& slot = tree.slots[j];
      BranchSlot out{slot.id, {}};
      for (std::size_t s = 0; s < spawned.size(); s += n) index[s + j].assign(slot.hypotheses.size(), -1);
      for (std::size_t h = 0; h < slot.hypotheses.size(); ++h) {
        const auto& hyp = slot.hypotheses[h];
        auto prediction = predict_branch(model_, hyp.density, previous);
        out.hypotheses.push_back({hyp.log_weight, hyp.existence, std::move(prediction.surviving), hyp.history});
        for (auto& s : prediction.spawned) {
          const double r = hyp.existence * s.existence_factor;
          if (!(r > 0)) continue;
          const std::size_t target = static_cast<std::size_t>(s.mode - 2) * n + j;
          ids[target] = s.density.components.front().density.genealogy.id();
          index[target][h] = static_cast<int>(spawned[target].size());
          spawned[target].push_back({0.0, r, std::move(s.density), {}});
        }
      }
      next.slots.push_back(std::move(out));
    }
    std::vector<std::vector<int>> maps;
    std::vector<std::size_t> parents;
    for (std::size_t s = 0; s < spawned.size(); ++s) {
      if (spawned[s].empty()) continue;
      next.slots.push_back({ids[s], std::move(spawned[s])});
      maps.push_back(std::move(index[s]));
      parents.push_back(s % n);
    }
    trees.push_back(std::move(next));
    spawn_maps.push_back(std::move(maps));
    spawn_parent.push_back(std::move(parents));
  }

  if (config_.birth_type == BirthType::kMultiBernoulli) {
    for (const auto& b : config_.birth) {
      if (!(b.weight > 0)) continue;
      GaussianBranchDensity d;
      d.start_time = k;
      d.components.push_back({k, 1.0, GaussianBranch(GenealogyVar{1}, b.mean, b.covariance, nx)});
      trees.push_back({k, {BranchSlot{BranchId{1}, {LocalHypothesis{0.0, b.weight, std::move(d), {}}}}}});
    }
  }

  const auto old_offsets = post.slot_offsets();
  for (auto& g : post.globals) {
    std::vector<int> selection;
    for (std::size_t t = 0; t < post.trees.size(); ++t) {
      const auto first = g.selection.begin() + static_cast<std::ptrdiff_t>(old_offsets[t]);
      selection.insert(selection.end(), first, g.selection.begin() + static_cast<std::ptrdiff_t>(old_offsets[t + 1]));
      for (std::size_t s = 0; s < spawn_maps[t].size(); ++s) {
        const int parent = *(first + static_cast<std::ptrdiff_t>(spawn_parent[t][s]));
        selection.push_back(parent < 0 ? -1 : spawn_maps[t][s][static_cast<std::size_t>(parent)]);
      }
    }
    selection.resize(selection.size() + (trees.size() - post.trees.size()), 0);
    g.selection = std::move(selection);
  }
  post.trees = std::move(trees);
}

void TreeFilter::apply_lscan() {
  const int window = config_.filter.lscan;
  for (auto& c : posterior_.ppp) c.density = l_scan_truncate(c.density, window);
  for (auto& tree : posterior_.trees)
    for (auto& slot : tree.slots)
      for (auto& hyp : slot.hypotheses)
        for (auto& c : hyp.density.components) c.density = l_scan_truncate(c.density, window);
}

void TreeFilter::update(const MeasurementSet& z) {
  auto& post = posterior_;
  const int k = post.time;
  const auto& mm = config_.measurement;
  const double pd = mm.detection_probability;
  const double log_pd = std::log(pd);
  const double clutter = mm.clutter_intensity();
  const auto m_count = z.size();

  // Local hypotheses of existing slots: missed detection first, then one per gated measurement.
  struct Outcome {
    double missed_log_factor = 0;
    int missed = -1;
    std::vector<int> detected;         // per measurement, -1 when gated out
    std::vector<double> detect_factor;  // per measurement, log weight factor
  };
  std::vector<std::vector<std::vector<Outcome>>> outcomes(post.trees.size());
  for (std::size_t t = 0; t < post.trees.size(); ++t) {
    auto& tree = post.trees[t];
    outcomes[t].resize(tree.slots.size());
    for (std::size_t j = 0; j < tree.slots.size(); ++j) {
      auto& slot = tree.slots[j];
      std::vector<LocalHypothesis> next;
      for (const auto& hyp : slot.hypotheses) {
        Outcome o;
        o.detected.assign(m_count, -1);
        o.detect_factor.assign(m_count, -kInf);
        const auto* alive = alive_component(hyp.density, k);
        const double beta = alive ? alive->beta : 0.0;
        const double q = hyp.existence * beta * pd;
        o.missed_log_factor = floored_log(1.0 - q);
        LocalHypothesis missed{hyp.log_weight + o.missed_log_factor, 0.0, hyp.density, hyp.history};
        if (q < 1.0) missed.existence = std::min(1.0, hyp.existence * (1.0 - beta * pd) / (1.0 - q));
        if (missed.existence > 0) {
          if (beta > 0 && pd > 0) {
            alive_component(missed.density, k)->beta *= 1.0 - pd;
            missed.density.normalize();
          }
          o.missed = static_cast<int>(next.size());
          next.push_back(std::move(missed));
        }
        if (q > 0) {
          for (std::size_t m = 0; m < m_count; ++m) {
            const auto inn = innovation(alive->density, z[m], mm.observation, mm.noise);
            if (inn.squared_mahalanobis() > config_.filter.gate_threshold) continue;
            auto updated = update_last_state(alive->density, z[m], mm.observation, mm.noise);
            o.detect_factor[m] = std::log(hyp.existence * beta) + log_pd + updated.log_likelihood;
            GaussianBranchDensity d;
            d.start_time = hyp.density.start_time;
            d.components.push_back({k, 1.0, std::move(updated.component)});
            auto history = hyp.history;
            history.push_back({k, static_cast<int>(m)});
            o.detected[m] = static_cast<int>(next.size());
            next.push_back({hyp.log_weight + o.detect_factor[m], 1.0, std::move(d), std::move(history)});
          }
        }
        outcomes[t][j].push_back(std::move(o));
      }
      slot.hypotheses = std::move(next);
    }
  }

  // New trees: one per measurement (PPP birth) or plain clutter (multi-Bernoulli birth).
  std::vector<double> new_tree_log_weight(m_count, floored_log(clutter));
  std::vector<BernoulliTree> new_trees(m_count);
  if (config_.birth_type == BirthType::kPoisson && pd > 0) {
    for (std::size_t m = 0; m < m_count; ++m) {
      std::map<int, std::vector<double>> by_start;
      std::vector<double> terms;
      for (const auto& c : post.ppp) {
        const double term = c.log_weight + log_pd + log_predictive_likelihood(c.density, z[m], mm.observation, mm.noise);
        by_start[c.start_time].push_back(term);
        terms.push_back(term);
      }
      const double detected = log_sum_exp(terms);
      if (!std::isfinite(detected)) continue;
      const double total = log_sum_exp({floored_log(clutter), detected});
      new_tree_log_weight[m] = total;
      int best_start = 0;
      double best_mass = -kInf;
      for (const auto& [start, values] : by_start) {
        const double mass = log_sum_exp(values);
        if (mass >= best_mass) best_mass = mass, best_start = start;
      }
      const GaussianPPPComponent* best = nullptr;
      double best_term = -kInf;
      for (std::size_t i = 0; i < post.ppp.size(); ++i) {
        if (post.ppp[i].start_time != best_start) continue;
        if (!best || terms[i] > best_term) best = &post.ppp[i], best_term = terms[i];
      }
      auto updated = update_last_state(best->density, z[m], mm.observation, mm.noise);
      GaussianBranchDensity d;
      d.start_time = best_start;
      d.components.push_back({k, 1.0, std::move(updated.component)});
      new_trees[m].start_time = best_start;
      new_trees[m].slots.push_back(BranchSlot{
          BranchId{1}, {LocalHypothesis{total, std::exp(detected - total), std::move(d), {{k, static_cast<int>(m)}}}}});
    }
  }
  const double log_missed_ppp = std::log1p(-pd);
  if (std::isfinite(log_missed_ppp)) {
    for (auto& c : post.ppp) c.log_weight += log_missed_ppp;
  } else {
    post.ppp.clear();
  }

  // Children of every global hypothesis from the k-best assignments of its cost matrix.
  const auto offsets = post.slot_offsets();
  std::vector<GlobalHypothesis> children;
  for (const auto& g : post.globals) {
    struct Column {
      std::size_t tree, slot;
      int hyp;
    };
    std::vector<Column> live;
    double base = g.log_weight;
    for (std::size_t t = 0; t < post.trees.size(); ++t) {
      for (std::size_t j = 0; j < post.trees[t].slots.size(); ++j) {
        const int h = g.selection[offsets[t] + j];
        if (h < 0) continue;
        const auto& o = outcomes[t][j][static_cast<std::size_t>(h)];
        base += o.missed_log_factor;
        if (std::any_of(o.detected.begin(), o.detected.end(), [](int d) { return d >= 0; })) live.push_back({t, j, h});
      }
    }
    auto outcome = [&](const Column& c) -> const Outcome& { return outcomes[c.tree][c.slot][static_cast<std::size_t>(c.hyp)]; };

    // Measurements gated to no branch always start a new tree (or are clutter).
    std::vector<std::size_t> rows;
    for (std::size_t m = 0; m < m_count; ++m) {
      const bool gated = std::any_of(live.begin(), live.end(), [&](const Column& c) { return outcome(c).detected[m] >= 0; });
      if (gated) {
        rows.push_back(m);
      } else {
        base += new_tree_log_weight[m];
      }
    }
    std::vector<Column> columns;
    for (const auto& c : live) {
      if (std::any_of(rows.begin(), rows.end(), [&](std::size_t m) { return outcome(c).detected[m] >= 0; })) columns.push_back(c);
    }

    auto make_child = [&](const std::vector<int>& assignment, double log_weight) {
      GlobalHypothesis child{log_weight, {}};
      child.selection.reserve(offsets.back() + m_count);
      std::vector<int> assigned_to(offsets.back(), -1);
      std::vector<bool> new_tree(m_count, true);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto col = static_cast<std::size_t>(assignment[r]);
        if (col < columns.size()) {
          assigned_to[offsets[columns[col].tree] + columns[col].slot] = static_cast<int>(rows[r]);
          new_tree[rows[r]] = false;
        }
      }
      for (std::size_t t = 0; t < post.trees.size(); ++t) {
        for (std::size_t j = 0; j < post.trees[t].slots.size(); ++j) {
          const auto flat = offsets[t] + j;
          const int h = g.selection[flat];
          if (h < 0) {
            child.selection.push_back(-1);
            continue;
          }
          const auto& o = outcomes[t][j][static_cast<std::size_t>(h)];
          const int m = assigned_to[flat];
          child.selection.push_back(m < 0 ? o.missed : o.detected[static_cast<std::size_t>(m)]);
        }
      }
      for (std::size_t m = 0; m < m_count; ++m) child.selection.push_back(new_tree[m] && !new_trees[m].slots.empty() ? 0 : -1);
      return child;
    };

    if (rows.empty()) {
      children.push_back(make_child({}, base));
      continue;
    }
    Eigen::MatrixXd cost = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(rows.size()),
                                                     static_cast<Eigen::Index>(columns.size() + rows.size()), kInf);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto m = rows[r];
      for (std::size_t c = 0; c < columns.size(); ++c) {
        const auto& o = outcome(columns[c]);
        if (o.detected[m] >= 0) cost(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = o.missed_log_factor - o.detect_factor[m];
      }
      cost(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(columns.size() + r)) = -new_tree_log_weight[m];
    }
    const int k_best = std::max(1, static_cast<int>(std::ceil(config_.filter.max_global_hypotheses * std::exp(g.log_weight) - 1e-9)));
    for (const auto& a : murty_kbest(cost, k_best)) children.push_back(make_child(a.columns, base - a.cost));
  }

  for (auto& t : new_trees) post.trees.push_back(std::move(t));
  canonicalize(children);
  post.globals = std::move(children);
}

void TreeFilter::prune() {
  auto& post = posterior_;
  const auto& f = config_.filter;
  const int k = post.time;

  std::erase_if(post.ppp, [&](const auto& c) { return c.log_weight < std::log(f.ppp_weight_threshold); });

  for (auto& tree : post.trees) {
    for (auto& slot : tree.slots) {
      for (auto& hyp : slot.hypotheses) {
        auto& comps = hyp.density.components;
        auto alive = std::find_if(comps.begin(), comps.end(), [k](const auto& c) { return c.end_time == k; });
        if (alive != comps.end() && comps.size() > 1 && alive->beta < f.alive_threshold) {
          comps.erase(alive);
          hyp.density.normalize();
        }
      }
    }
  }

  const auto offsets = post.slot_offsets();
  for (auto& g : post.globals) {
    for (std::size_t t = 0; t < post.trees.size(); ++t) {
      for (std::size_t j = 0; j < post.trees[t].slots.size(); ++j) {
        int& h = g.selection[offsets[t] + j];
        if (h >= 0 && post.trees[t].slots[j].hypotheses[static_cast<std::size_t>(h)].existence < f.existence_threshold) h = -1;
      }
    }
  }
  canonicalize(post.globals);
  const double floor = std::log(f.global_weight_threshold);
  auto keep = std::find_if(post.globals.begin() + 1, post.globals.end(), [floor](const auto& g) { return g.log_weight < floor; });
  post.globals.erase(keep, post.globals.end());
  if (post.globals.size() > static_cast<std::size_t>(f.max_global_hypotheses)) {
    post.globals.resize(static_cast<std::size_t>(f.max_global_hypotheses));
  }
  canonicalize(post.globals);

  // Drop local hypotheses no global hypothesis selects, then empty slots and trees.
  std::vector<BernoulliTree> trees;
  std::vector<std::vector<int>> remap(offsets.back());
  std::vector<bool> kept_slot(offsets.back(), false);
  for (std::size_t t = 0; t < post.trees.size(); ++t) {
    BernoulliTree next{post.trees[t].start_time, {}};
    for (std::size_t j = 0; j < post.trees[t].slots.size(); ++j) {
      const auto flat = offsets[t] + j;
      auto& slot = post.trees[t].slots[j];
      std::vector<bool> used(slot.hypotheses.size(), false);
      for (const auto& g : post.globals)
        if (g.selection[flat] >= 0) used[static_cast<std::size_t>(g.selection[flat])] = true;
      BranchSlot kept{slot.id, {}};
      remap[flat].assign(slot.hypotheses.size(), -1);
      for (std::size_t h = 0; h < slot.hypotheses.size(); ++h) {
        if (!used[h]) continue;
        remap[flat][h] = static_cast<int>(kept.hypotheses.size());
        kept.hypotheses.push_back(std::move(slot.hypotheses[h]));
      }
      if (kept.hypotheses.empty()) continue;
      kept_slot[flat] = true;
      next.slots.push_back(std::move(kept));
    }
    if (!next.slots.empty()) trees.push_back(std::move(next));
  }
  for (auto& g : post.globals) {
    std::vector<int> selection;
    for (std::size_t flat = 0; flat < kept_slot.size(); ++flat) {
      if (!kept_slot[flat]) continue;
      const int h = g.selection[flat];
      selection.push_back(h < 0 ? -1 : remap[flat][static_cast<std::size_t>(h)]);
    }
    g.selection = std::move(selection);
  }
  post.trees = std::move(trees);
  canonicalize(post.globals);
}

std::vector<TreeTrajectory> TreeFilter::estimate() const {
  const auto& post = posterior_;
  std::vector<TreeTrajectory> out;
  if (post.globals.empty()) return out;
  const auto best = std::max_element(post.globals.begin(), post.globals.end(),
                                     [](const auto& a, const auto& b) { return a.log_weight < b.log_weight; });
  const auto offsets = post.slot_offsets();
  for (std::size_t t = 0; t < post.trees.size(); ++t) {
    TreeTrajectory tree{post.trees[t].start_time, {}};
    for (std::size_t j = 0; j < post.trees[t].slots.size(); ++j) {
      const int h = best->selection[offsets[t] + j];
      if (h < 0) continue;
      const auto& hyp = post.trees[t].slots[j].hypotheses[static_cast<std::size_t>(h)];
      if (!(hyp.existence > config_.filter.estimate_threshold)) continue;
      const auto& c = hyp.density.most_likely().density;
      const Eigen::VectorXd mean = c.full_mean();
      tree.branches.push_back(
          {c.genealogy, Eigen::Map<const Eigen::MatrixXd>(mean.data(), c.state_dim, c.num_states())});
    }
    if (!tree.branches.empty()) out.push_back(std::move(tree));
  }
  return out;
}

std::vector<std::string> check_posterior(const PMBMPosterior& post, const std::vector<int>& measurements_per_step,
                                         double tolerance) {
  std::vector<std::string> issues;
  auto report = [&issues](std::string s) {
    if (issues.size() < 50) issues.push_back(std::move(s));
  };
  auto check_cov = [&](const Eigen::MatrixXd& p, const std::string& where) {
    if ((p - p.transpose()).cwiseAbs().maxCoeff() > tolerance) report(where + ": covariance not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(p, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-9) report(where + ": covariance not positive semidefinite");
  };
  auto check_component = [&](const GaussianBranch& c, int start, const std::string& where) {
    if (c.genealogy.generations() != post.time - start + 1) report(where + ": genealogy length disagrees with the time step");
    check_cov(c.cov, where);
    for (const auto* block : c.frozen.blocks()) check_cov(block->cov, where + " (frozen)");
  };

  std::vector<double> weights;
  for (const auto& g : post.globals) weights.push_back(g.log_weight);
  if (post.globals.empty()) report("no global hypotheses");
  else if (std::abs(std::exp(log_sum_exp(weights)) - 1.0) > tolerance) report("global weights do not sum to one");

  for (std::size_t i = 0; i < post.ppp.size(); ++i) check_component(post.ppp[i].density, post.ppp[i].start_time, "ppp " + std::to_string(i));

  const auto offsets = post.slot_offsets();
  std::set<BranchId> ids;
  for (std::size_t t = 0; t < post.trees.size(); ++t) {
    ids.clear();
    for (std::size_t j = 0; j < post.trees[t].slots.size(); ++j) {
      const auto& slot = post.trees[t].slots[j];
      const std::string where = "tree " + std::to_string(t) + " slot " + std::to_string(j);
      if (!ids.insert(slot.id).second) report(where + ": duplicate branch id");
      for (std::size_t h = 0; h < slot.hypotheses.size(); ++h) {
        const auto& hyp = slot.hypotheses[h];
        const std::string at = where + " hyp " + std::to_string(h);
        if (!(hyp.existence >= 0.0 && hyp.existence <= 1.0)) report(at + ": existence outside [0, 1]");
        if (std::abs(hyp.density.beta_sum() - 1.0) > tolerance) report(at + ": end-time probabilities do not sum to one");
        for (const auto& c : hyp.density.components) {
          if (c.beta < 0) report(at + ": negative end-time probability");
          if (c.density.genealogy.id() != slot.id) report(at + ": genealogy does not match the slot id");
          check_component(c.density, post.trees[t].start_time, at);
        }
        for (std::size_t a = 0; a < hyp.history.size(); ++a) {
          const auto& e = hyp.history[a];
          if (a > 0 && !(hyp.history[a - 1].time < e.time)) report(at + ": more than one measurement at a step");
          if (e.time < 1 || e.time > static_cast<int>(measurements_per_step.size()) || e.measurement < 0 ||
              e.measurement >= measurements_per_step[static_cast<std::size_t>(e.time - 1)]) {
            report(at + ": association to a nonexistent measurement");
          }
        }
      }
    }
  }

  for (std::size_t gi = 0; gi < post.globals.size(); ++gi) {
    const auto& g = post.globals[gi];
    if (g.selection.size() != offsets.back()) {
      report("global " + std::to_string(gi) + ": selection size mismatch");
      continue;
    }
    std::set<Association> used;
    for (std::size_t t = 0; t < post.trees.size(); ++t) {
      for (std::size_t j = 0; j < post.trees[t].slots.size(); ++j) {
        const int h = g.selection[offsets[t] + j];
        if (h < 0) continue;
        if (h >= static_cast<int>(post.trees[t].slots[j].hypotheses.size())) {
          report("global " + std::to_string(gi) + ": selection out of range");
          continue;
        }
        for (const auto& e : post.trees[t].slots[j].hypotheses[static_cast<std::size_t>(h)].history) {
          if (!used.insert(e).second) {
            report("global " + std::to_string(gi) + ": measurement (" + std::to_string(e.time) + ", " +
                   std::to_string(e.measurement) + ") used twice");
          }
        }
      }
    }
  }
  return issues;
}

}  // namespace trpmbm
