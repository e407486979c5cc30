#include "trpmbm/sampler.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include "trpmbm/errors.hpp"
#include "trpmbm/rng.hpp"

namespace trpmbm {

Eigen::VectorXd sample_gaussian(std::mt19937_64& rng, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd w(mean.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = normal(rng);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("covariance is not positive definite");
  return mean + llt.matrixL() * w;
}

namespace {

struct LiveBranch {
  std::vector<int> marks;
  std::vector<Eigen::VectorXd> states;
  bool alive = true;
};

struct LiveTree {
  int start_time;
  std::vector<LiveBranch> branches;
};

TreeTrajectory finish_tree(const LiveTree& live, int horizon) {
  int last_alive = live.start_time;
  for (const auto& b : live.branches) {
    int generation = 0;
    for (std::size_t g = 0; g < b.marks.size(); ++g)
      if (b.marks[g] != 0) generation = static_cast<int>(g) + 1;
    last_alive = std::max(last_alive, live.start_time + generation - 1);
  }
  const int end = std::min(horizon, last_alive + 1);
  const auto generations = static_cast<std::size_t>(end - live.start_time + 1);
  TreeTrajectory tree;
  tree.start_time = live.start_time;
  for (const auto& b : live.branches) {
    auto marks = b.marks;
    marks.resize(generations, 0);
    Branch branch{GenealogyVar(marks), Eigen::MatrixXd(b.states.front().size(), static_cast<Eigen::Index>(b.states.size()))};
    for (std::size_t i = 0; i < b.states.size(); ++i) branch.states.col(static_cast<Eigen::Index>(i)) = b.states[i];
    tree.branches.push_back(std::move(branch));
  }
  return tree;
}

}  // namespace

std::vector<TreeTrajectory> sample_ground_truth(const ScenarioConfig& config, std::uint64_t seed) {
  const auto modes = config.active_modes();
  std::vector<double> birth_weights;
  for (const auto& b : config.birth) birth_weights.push_back(b.weight);
  const double birth_rate = config.birth_rate();

  std::vector<LiveTree> trees;
  for (int k = 1; k <= config.horizon; ++k) {
    for (std::size_t t = 0; t < trees.size(); ++t) {
      auto& tree = trees[t];
      auto rng = make_stream(seed, {tag(StreamTag::kTree), static_cast<std::uint64_t>(k), t});
      std::uniform_real_distribution<double> unit;
      const std::size_t existing = tree.branches.size();
      for (std::size_t i = 0; i < existing; ++i) {
        if (!tree.branches[i].alive) {
          tree.branches[i].marks.push_back(0);
          continue;
        }
        const Eigen::VectorXd x = tree.branches[i].states.back();
        for (std::size_t m = 1; m < modes.size(); ++m) {
          if (unit(rng) >= modes[m].probability) continue;
          LiveBranch child;
          child.marks = tree.branches[i].marks;
          child.marks.push_back(static_cast<int>(m) + 1);
          child.states.push_back(sample_gaussian(rng, modes[m].mean_at(x), modes[m].noise));
          tree.branches.push_back(std::move(child));
        }
        auto& branch = tree.branches[i];
        if (unit(rng) < modes.front().probability) {
          branch.marks.push_back(1);
          branch.states.push_back(sample_gaussian(rng, modes.front().mean_at(x), modes.front().noise));
        } else {
          branch.marks.push_back(0);
          branch.alive = false;
        }
      }
    }
    auto rng = make_stream(seed, {tag(StreamTag::kBirth), static_cast<std::uint64_t>(k)});
    const int births = birth_rate > 0 ? std::poisson_distribution<int>(birth_rate)(rng) : 0;
    std::discrete_distribution<std::size_t> pick(birth_weights.begin(), birth_weights.end());
    for (int n = 0; n < births; ++n) {
      const auto& component = config.birth[pick(rng)];
      LiveBranch root;
      root.marks = {1};
      root.states.push_back(sample_gaussian(rng, component.mean, component.covariance));
      trees.push_back(LiveTree{k, {std::move(root)}});
    }
  }
  std::vector<TreeTrajectory> out;
  out.reserve(trees.size());
  for (const auto& t : trees) out.push_back(finish_tree(t, config.horizon));
  return out;
}

MeasurementSet sample_measurements(const std::vector<TreeTrajectory>& truth, const ScenarioConfig& config, int k,
                                   std::uint64_t seed) {
  if (k < 1 || k > config.horizon) throw RangeError("time step " + std::to_string(k) + " outside the horizon");
  const auto& mm = config.measurement;
  MeasurementSet out;
  auto rng = make_stream(seed, {tag(StreamTag::kDetection), static_cast<std::uint64_t>(k)});
  std::uniform_real_distribution<double> unit;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(mm.noise.rows());
  for (const auto& tree : truth) {
    if (k < tree.start_time || k > tree.horizon_end()) continue;
    for (const auto& x : targets_at_time(tree, k)) {
      if (unit(rng) >= mm.detection_probability) continue;
      out.push_back(mm.observation * x + sample_gaussian(rng, zero, mm.noise));
    }
  }
  auto clutter_rng = make_stream(seed, {tag(StreamTag::kClutter), static_cast<std::uint64_t>(k)});
  const int clutter = mm.clutter_rate > 0 ? std::poisson_distribution<int>(mm.clutter_rate)(clutter_rng) : 0;
  std::uniform_real_distribution<double> x(mm.region.x_min, mm.region.x_max);
  std::uniform_real_distribution<double> y(mm.region.y_min, mm.region.y_max);
  for (int n = 0; n < clutter; ++n) {
    Eigen::Vector2d z;
    z(0) = x(clutter_rng);
    z(1) = y(clutter_rng);
    out.emplace_back(z);
  }
  return out;
}

std::vector<MeasurementSet> sample_measurement_sequence(const std::vector<TreeTrajectory>& truth,
                                                        const ScenarioConfig& config, std::uint64_t seed) {
  std::vector<MeasurementSet> out;
  for (int k = 1; k <= config.horizon; ++k) out.push_back(sample_measurements(truth, config, k, seed));
  return out;
}

namespace {

std::string shortest(double v) {
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, v);
  return std::string(buffer, result.ptr);
}

}  // namespace

void write_measurements_csv(const std::filesystem::path& path, const std::vector<MeasurementSet>& measurements) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  Eigen::Index dim = 2;
  for (const auto& step : measurements)
    if (!step.empty()) dim = step.front().size();
  out << "k";
  for (Eigen::Index i = 1; i <= dim; ++i) out << ",z" << i;
  out << "\n";
  for (std::size_t k = 0; k < measurements.size(); ++k) {
    for (const auto& z : measurements[k]) {
      out << k + 1;
      for (Eigen::Index i = 0; i < z.size(); ++i) out << ',' << shortest(z(i));
      out << '\n';
    }
  }
}

std::vector<MeasurementSet> read_measurements_csv(const std::filesystem::path& path, int horizon) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  std::vector<MeasurementSet> out(static_cast<std::size_t>(horizon));
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (number == 1 || line.empty()) continue;
    std::vector<double> fields;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) {
      double v = 0;
      const auto r = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (r.ec != std::errc{} || r.ptr != cell.data() + cell.size()) throw ParseError("bad number '" + cell + "'", number);
      fields.push_back(v);
    }
    if (fields.size() < 2) throw ParseError("expected k and at least one coordinate", number);
    const int k = static_cast<int>(fields.front());
    if (k < 1 || k > horizon) throw ParseError("time step outside the horizon", number);
    out[static_cast<std::size_t>(k - 1)].push_back(Eigen::Map<Eigen::VectorXd>(fields.data() + 1, static_cast<Eigen::Index>(fields.size() - 1)));
  }
  return out;
}

}  // namespace trpmbm
