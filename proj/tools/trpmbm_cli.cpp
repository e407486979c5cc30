#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "trpmbm/errors.hpp"
#include "trpmbm/experiment.hpp"
#include "trpmbm/sampler.hpp"
#include "trpmbm/scenario.hpp"
#include "trpmbm/tree_io.hpp"

using namespace trpmbm;
using nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

int fail(const std::string& type, const std::string& message, int code = 1) {
  std::cerr << json{{"error", {{"type", type}, {"message", message}}}}.dump() << '\n';
  return code;
}

ScenarioConfig scenario_from(const std::string& path) { return path.empty() ? default_scenario() : load_scenario(path); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tree trajectory PMBM filtering experiments"};
  app.require_subcommand(1);

  std::string scenario_path, filters = "trpmbm,trmbm,tpmbm", lscan = "5", out_dir = "results", truth_path;
  int runs = 20, threads = 1;
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "Monte Carlo runs of the filters, RMS metric curves and timings");
  run->add_option("--scenario", scenario_path, "scenario JSON (default: built-in scenario)");
  run->add_option("--filters", filters, "comma list of trpmbm, trmbm, tpmbm")->capture_default_str();
  run->add_option("--lscan", lscan, "comma list of L values, each combined with every filter")->capture_default_str();
  run->add_option("--runs", runs, "Monte Carlo runs")->capture_default_str();
  run->add_option("--seed", seed, "experiment seed (default: the scenario's seed)");
  run->add_option("--out", out_dir, "output directory")->capture_default_str();
  run->add_option("--truth", truth_path, "recorded ground truth trees, shared by all runs");
  run->add_option("--threads", threads, "runs processed in parallel")->capture_default_str();

  std::string truth_out, measurements_out;
  auto* sample = app.add_subcommand("sample", "sample a ground truth and its measurements");
  sample->add_option("--scenario", scenario_path, "scenario JSON (default: built-in scenario)");
  sample->add_option("--seed", seed, "sampling seed (default: the scenario's seed)");
  sample->add_option("--truth", truth_path, "use these trees instead of sampling them");
  sample->add_option("--truth-out", truth_out, "write the trees here");
  sample->add_option("--measurements-out", measurements_out, "write the measurements CSV here");

  auto* show = app.add_subcommand("scenario", "print the effective scenario as JSON");
  show->add_option("--scenario", scenario_path, "scenario JSON (default: built-in scenario)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    const ScenarioConfig scenario = scenario_from(scenario_path);
    if (run->count("--seed") == 0 && sample->count("--seed") == 0) seed = scenario.seed;
    if (*show) {
      std::cout << scenario_to_json(scenario) << '\n';
    } else if (*run) {
      ExperimentOptions options;
      options.runs = runs;
      options.seed = seed;
      options.threads = threads;
      const auto kinds = split(filters);
      const auto ls = split(lscan);
      if (kinds.empty()) throw ConfigError("no filters requested");
      if (ls.empty()) throw ConfigError("no L values requested");
      for (const auto& l : ls) {
        std::size_t used = 0;
        int value = 0;
        try {
          value = std::stoi(l, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != l.size() || value < 1) throw ConfigError("invalid L value '" + l + "'");
        for (const auto& k : kinds) options.filters.push_back({parse_filter_kind(k), value});
      }
      if (!truth_path.empty()) options.truth = read_trees_file(truth_path);
      const auto reports = run_experiment(scenario, options);
      emit_outputs(reports, out_dir);
      json summary = {{"out", out_dir}, {"runs", runs}, {"filters", json::array()}};
      for (const auto& f : options.filters) {
        int failed = 0;
        for (const auto& r : reports) failed += (r.filter == f && !r.error.empty());
        summary["filters"].push_back({{"name", f.name()}, {"failed_runs", failed}});
      }
      std::cout << summary.dump() << '\n';
    } else {
      const auto truth = truth_path.empty() ? sample_ground_truth(scenario, seed) : read_trees_file(truth_path);
      const auto measurements = sample_measurement_sequence(truth, scenario, seed);
      if (!truth_out.empty()) write_trees_file(truth_out, truth);
      if (!measurements_out.empty()) write_measurements_csv(measurements_out, measurements);
      std::size_t branches = 0, detections = 0;
      for (const auto& t : truth) branches += t.branches.size();
      for (const auto& z : measurements) detections += z.size();
      std::cout << json{{"trees", truth.size()}, {"branches", branches}, {"measurements", detections},
                        {"stream_hash", hash_measurements(measurements)}}
                       .dump()
                << '\n';
    }
  } catch (const ConfigError& e) {
    return fail("config", e.what());
  } catch (const ParseError& e) {
    return fail("parse", e.what());
  } catch (const NumericalError& e) {
    return fail("numerical", e.what());
  } catch (const std::exception& e) {
    return fail("runtime", e.what());
  }
  return 0;
}
