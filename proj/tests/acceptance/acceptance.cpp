// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit when any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "oracles/assignment_oracle.hpp"
#include "oracles/kld_case.hpp"
#include "oracles/metric_oracle.hpp"
#include "trpmbm/assignment.hpp"
#include "trpmbm/errors.hpp"
#include "trpmbm/experiment.hpp"
#include "trpmbm/filter.hpp"
#include "trpmbm/genealogy.hpp"
#include "trpmbm/sampler.hpp"
#include "trpmbm/tree_io.hpp"

using namespace trpmbm;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

std::vector<TreeTrajectory> reference_truth() { return read_trees_file(std::string(TRPMBM_DATA_DIR) + "/reference_truth.txt"); }

Outcome branch_algebra() {
  bool ok = branch_length({1, 1, 1, 0, 0, 0}) == 3 && branch_length({1, 2, 1, 1, 1, 1}) == 5 &&
            branch_length({1, 1, 2, 1, 0}) == 2;
  ok = ok && unique_id({1, 2, 1, 1, 2, 1}) == BranchId({1, 2, 1, 1, 2});
  ok = ok && max_branch_length(6, BranchId{1, 2, 1, 1, 2}) == 2;
  ok = ok && genealogy_for(6, BranchId{1, 2, 1, 1, 2}, 1) == GenealogyVar({1, 2, 1, 1, 2, 0});
  return {ok, "lengths 3,5,2; id (1,2,1,1,2); max length 2; indexed genealogy (1,2,1,1,2,0)"};
}

Outcome kld_oracle() {
  double worst = 0, mass_err = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto c = oracle::make_kld_case(7000 + static_cast<std::uint64_t>(trial), 2 + trial % 3, trial % 2 == 1);
    double mass = 0;
    worst = std::max(worst, oracle::max_kld_deviation(c, &mass));
    mass_err = std::max(mass_err, std::abs(mass - 1.0));
  }
  return {worst <= 1e-10, fmt("max deviation %.3g over 10 cases (tol 1e-10), oracle mass error %.3g", worst, mass_err)};
}

Outcome assignment_oracle() {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> rows_d(1, 7), k_d(1, 15);
  std::uniform_real_distribution<double> cost_d(-10.0, 10.0);
  std::bernoulli_distribution forbid(0.2);
  double worst = 0;
  int mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int rows = rows_d(rng);
    const int cols = std::uniform_int_distribution<int>(rows, 9)(rng);
    const int k = k_d(rng);
    const bool sparse = trial % 4 == 0;
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        m(r, c) = sparse && forbid(rng) ? std::numeric_limits<double>::infinity() : cost_d(rng);
    const auto all = oracle::enumerate_assignments(m);
    if (all.empty()) {
      bool threw = false;
      try {
        hungarian(m);
      } catch (const InfeasibleError&) {
        threw = true;
      }
      mismatches += !threw;
      continue;
    }
    worst = std::max(worst, std::abs(hungarian(m).cost - all.front().cost));
    const auto best = murty_kbest(m, k);
    if (best.size() != std::min<std::size_t>(static_cast<std::size_t>(k), all.size())) {
      ++mismatches;
      continue;
    }
    std::set<std::vector<int>> seen;
    for (std::size_t i = 0; i < best.size(); ++i) {
      worst = std::max(worst, std::abs(best[i].cost - all[i].cost));
      double recomputed = 0;
      for (int r = 0; r < rows; ++r) recomputed += m(r, best[i].columns[static_cast<std::size_t>(r)]);
      worst = std::max(worst, std::abs(recomputed - best[i].cost));
      mismatches += !seen.insert(best[i].columns).second;
    }
  }
  return {worst <= 1e-12 && mismatches == 0,
          fmt("200 matrices up to 7x9, K<=15: max cost error %.3g (tol 1e-12), %g structural mismatches", worst,
              mismatches)};
}

Outcome metric_oracle() {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> count(0, 3), steps(1, 4), pick(0, 2);
  const double ps[] = {1.0, 2.0, 3.0}, cs[] = {4.0, 10.0, 15.0}, gs[] = {0.5, 1.0, 4.0};
  double worst = 0, identity = 0;
  for (int n = 0; n < 100; ++n) {
    const int k = steps(rng);
    const auto truth = oracle::random_tracks(rng, count(rng), k, 12.0);
    const auto est = oracle::random_tracks(rng, count(rng), k, 12.0);
    const TrajMetricParams params{ps[pick(rng)], cs[pick(rng)], gs[pick(rng)]};
    const MetricBreakdown m = trajectory_metric(est, truth, params, k);
    const double brute = oracle::enumerate_metric_objective(est, truth, params, k);
    const double mine = std::pow(m.total, params.p) * k;
    worst = std::max(worst, std::abs(mine - brute));
    const double parts = std::pow(m.localisation, params.p) + std::pow(m.missed, params.p) +
                         std::pow(m.false_targets, params.p) + std::pow(m.switches, params.p);
    identity = std::max(identity, std::abs(std::pow(m.total, params.p) - parts) / std::max(1.0, parts));
  }
  return {worst <= 1e-6 && identity <= 1e-12,
          fmt("100 instances: max objective error %.3g (tol 1e-6), decomposition identity error %.3g", worst,
              identity)};
}

Outcome mode_reduction() {
  const auto truth = reference_truth();
  ScenarioConfig single = default_scenario();
  single.modes = 1;
  ScenarioConfig zero = default_scenario();
  zero.motion[1].probability = zero.motion[2].probability = 0.0;
  int differences = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto z = sample_measurement_sequence(truth, default_scenario(), seed);
    TreeFilter a(single), b(zero);
    for (const auto& zk : z) {
      a.step(zk);
      b.step(zk);
      const auto& ga = a.posterior().globals;
      const auto& gb = b.posterior().globals;
      bool same = ga.size() == gb.size();
      for (std::size_t i = 0; same && i < ga.size(); ++i) same = ga[i].log_weight == gb[i].log_weight;
      same = same && encode_trees(a.estimate()) == encode_trees(b.estimate());
      differences += !same;
    }
  }
  return {differences == 0, fmt("5 runs x 100 steps: %g steps with differing estimates or weights", differences)};
}

Outcome structural_invariants() {
  const auto truth = reference_truth();
  std::size_t issues = 0;
  std::string first;
  for (const BirthType birth : {BirthType::kPoisson, BirthType::kMultiBernoulli}) {
    ScenarioConfig c = default_scenario();
    c.birth_type = birth;
    const auto z = sample_measurement_sequence(truth, c, 1);
    TreeFilter f(c);
    std::vector<int> sizes;
    for (const auto& zk : z) {
      f.step(zk);
      sizes.push_back(static_cast<int>(zk.size()));
      const auto found = check_posterior(f.posterior(), sizes, 1e-9);
      if (!found.empty() && first.empty()) first = found.front();
      issues += found.size();
    }
  }
  return {issues == 0, fmt("Poisson and multi-Bernoulli birth, 100 steps each: %g violations", static_cast<double>(issues)) +
                           (first.empty() ? "" : " (first: " + first + ")")};
}

struct MonteCarlo {
  std::vector<RunReport> reports;
  FilterSpec tr5{FilterKind::kTrPMBM, 5}, mb5{FilterKind::kTrMBM, 5}, tp5{FilterKind::kTPMBM, 5},
      tr1{FilterKind::kTrPMBM, 1};
  double seconds = 0;
};

const MonteCarlo& monte_carlo() {
  static const MonteCarlo mc = [] {
    MonteCarlo m;
    ExperimentOptions o;
    o.filters = {m.tr5, m.mb5, m.tp5, m.tr1};
    o.runs = 20;
    o.seed = 2024;
    o.truth = reference_truth();
    const auto t0 = std::chrono::steady_clock::now();
    m.reports = run_experiment(default_scenario(), o);
    m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return m;
  }();
  return mc;
}

double average(const std::vector<MetricBreakdown>& curve, double MetricBreakdown::*field, int from, int to) {
  double s = 0;
  for (int k = from; k <= to; ++k) s += curve[static_cast<std::size_t>(k - 1)].*field;
  return s / (to - from + 1);
}

Outcome rms_ordering() {
  const MonteCarlo& mc = monte_carlo();
  const auto tr5 = rms_metric(mc.reports, mc.tr5);
  const auto tp5 = rms_metric(mc.reports, mc.tp5);
  const auto tr1 = rms_metric(mc.reports, mc.tr1);
  if (tr5.size() != 100 || tp5.size() != 100 || tr1.size() != 100) return {false, "runs did not cover 100 steps"};
  const double a = average(tr5, &MetricBreakdown::total, 53, 100);
  const double b = average(tp5, &MetricBreakdown::total, 53, 100);
  const double c = average(tr5, &MetricBreakdown::total, 1, 100);
  const double d = average(tr1, &MetricBreakdown::total, 1, 100);
  return {a <= b && c <= d && mc.seconds <= 900,
          fmt("steps 53-100: TrPMBM(L=5) %.4f vs TPMBM(L=5) %.4f; overall: TrPMBM(L=5) %.4f vs TrPMBM(L=1) %.4f", a, b,
              c, d) +
              fmt("; 20 runs in %.0f s", mc.seconds)};
}

Outcome decomposition_gap() {
  const MonteCarlo& mc = monte_carlo();
  const auto tr5 = rms_metric(mc.reports, mc.tr5);
  const auto tr1 = rms_metric(mc.reports, mc.tr1);
  auto delta = [&](double MetricBreakdown::*f) { return average(tr1, f, 1, 100) - average(tr5, f, 1, 100); };
  const double loc = delta(&MetricBreakdown::localisation);
  const double other = std::max({std::abs(delta(&MetricBreakdown::missed)),
                                 std::abs(delta(&MetricBreakdown::false_targets)),
                                 std::abs(delta(&MetricBreakdown::switches))});
  return {loc >= 3.0 * other, fmt("localisation improvement %.4f, largest other change %.4f", loc, other)};
}

Outcome timing_order() {
  const MonteCarlo& mc = monte_carlo();
  std::map<FilterKind, double> sum;
  std::map<FilterKind, int> n;
  for (const auto& r : mc.reports) {
    if (r.filter.lscan != 5 || !r.error.empty()) continue;
    sum[r.filter.kind] += r.seconds;
    ++n[r.filter.kind];
  }
  const double tr = sum[FilterKind::kTrPMBM] / n[FilterKind::kTrPMBM];
  const double mb = sum[FilterKind::kTrMBM] / n[FilterKind::kTrMBM];
  const double tp = sum[FilterKind::kTPMBM] / n[FilterKind::kTPMBM];
  return {tr > mb && mb > tp, fmt("mean seconds per run (L=5): TrPMBM %.3f, TrMBM %.3f, TPMBM %.3f", tr, mb, tp)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget;  // seconds
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "branch algebra", 1, branch_algebra},
      {2, "branch-wise prediction vs exhaustive tree prediction", 10, kld_oracle},
      {3, "Hungarian and Murty vs enumeration", 30, assignment_oracle},
      {4, "trajectory metric vs enumeration", 60, metric_oracle},
      {5, "spawning filter with zero spawn probability equals single-mode filter", 600, mode_reduction},
      {6, "posterior invariants at every step", 600, structural_invariants},
      {7, "RMS error ordering (N_mc=20)", 900, rms_ordering},
      {8, "L=5 vs L=1 gap is localisation", 900, decomposition_gap},
      {9, "relative timing TrPMBM > TrMBM > TPMBM", 900, timing_order},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && secs <= c.budget;
    failed += !pass;
    std::printf("%s [%d] %s: %s (%.2f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                secs <= c.budget ? "" : ", over budget");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
