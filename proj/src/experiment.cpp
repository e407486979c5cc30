#include "trpmbm/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "trpmbm/errors.hpp"
#include "trpmbm/filter.hpp"
#include "trpmbm/rng.hpp"
#include "trpmbm/sampler.hpp"

namespace trpmbm {

namespace {

std::string num(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_safe(std::string s) {
  std::replace_if(s.begin(), s.end(), [](char c) { return c == ',' || c == '\n' || c == '\r'; }, ';');
  return s;
}

class OutFile {
 public:
  OutFile(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
  }
  ~OutFile() noexcept(false) {
    out_.flush();
    if (!out_ && std::uncaught_exceptions() == 0) throw std::runtime_error("write failed: " + path_.string());
  }
  std::ofstream& operator*() { return out_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

RunReport run_filter(const ScenarioConfig& scenario, const FilterSpec& spec, const std::vector<Track>& truth_tracks,
                     const std::vector<MeasurementSet>& measurements, const TrajMetricParams& metric) {
  RunReport report;
  report.filter = spec;
  report.stream_hash = hash_measurements(measurements);
  const ScenarioConfig config = filter_config(scenario, spec);
  TreeFilter filter(config);
  double global_sum = 0.0;
  std::chrono::steady_clock::duration elapsed{};
  for (std::size_t k = 1; k <= measurements.size(); ++k) {
    try {
      const auto t0 = std::chrono::steady_clock::now();
      filter.step(measurements[k - 1]);
      const auto estimate = filter.estimate();
      elapsed += std::chrono::steady_clock::now() - t0;
      const std::size_t globals = filter.posterior().globals.size();
      global_sum += static_cast<double>(globals);
      report.max_global_hypotheses = std::max(report.max_global_hypotheses, static_cast<int>(globals));
      const auto tracks = branches_as_tracks(estimate);
      report.metric.push_back(trajectory_metric(tracks, truth_tracks, metric, static_cast<int>(k)));
    } catch (const NumericalError& e) {
      report.error = "step " + std::to_string(k) + ": " + e.what();
      break;
    }
  }
  report.seconds = std::chrono::duration<double>(elapsed).count();
  if (!report.metric.empty()) report.mean_global_hypotheses = global_sum / static_cast<double>(report.metric.size());
  return report;
}

}  // namespace

std::string to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::kTrPMBM: return "TrPMBM";
    case FilterKind::kTrMBM: return "TrMBM";
    case FilterKind::kTPMBM: return "TPMBM";
  }
  return "?";
}

FilterKind parse_filter_kind(const std::string& text) {
  std::string lower = text;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "trpmbm") return FilterKind::kTrPMBM;
  if (lower == "trmbm") return FilterKind::kTrMBM;
  if (lower == "tpmbm") return FilterKind::kTPMBM;
  throw ConfigError("unknown filter '" + text + "' (expected trpmbm, trmbm or tpmbm)");
}

std::string FilterSpec::name() const { return to_string(kind) + "(L=" + std::to_string(lscan) + ")"; }

std::string FilterSpec::slug() const {
  std::string s = to_string(kind);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s + "_l" + std::to_string(lscan);
}

ScenarioConfig filter_config(const ScenarioConfig& scenario, const FilterSpec& spec) {
  ScenarioConfig c = scenario;
  c.filter.lscan = spec.lscan;
  if (spec.kind == FilterKind::kTrMBM) c.birth_type = BirthType::kMultiBernoulli;
  if (spec.kind == FilterKind::kTPMBM) c.modes = 1;
  return c;
}

std::uint64_t hash_measurements(const std::vector<std::vector<Eigen::VectorXd>>& measurements) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& set : measurements) {
    const std::uint64_t n = set.size();
    feed(&n, sizeof n);
    for (const auto& z : set) feed(z.data(), static_cast<std::size_t>(z.size()) * sizeof(double));
  }
  return h;
}

std::vector<RunReport> run_experiment(const ScenarioConfig& scenario, const ExperimentOptions& options) {
  if (options.filters.empty()) throw ConfigError("no filters requested");
  if (options.runs < 1) throw ConfigError("runs must be >= 1");
  if (const auto issues = validate_scenario(scenario); !issues.empty()) {
    std::string msg = "invalid scenario:";
    for (const auto& i : issues) msg += "\n  - " + i;
    throw ConfigError(msg);
  }

  const std::size_t nf = options.filters.size();
  std::vector<RunReport> reports(static_cast<std::size_t>(options.runs) * nf);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int r = next++; r < options.runs; r = next++) {
      try {
        const std::uint64_t seed = stream_seed(options.seed, {tag(StreamTag::kRun), static_cast<std::uint64_t>(r)});
        const std::vector<TreeTrajectory> truth = options.truth ? *options.truth : sample_ground_truth(scenario, seed);
        const std::vector<Track> truth_tracks = branches_as_tracks(truth);
        const std::vector<MeasurementSet> measurements = sample_measurement_sequence(truth, scenario, seed);
        for (std::size_t f = 0; f < nf; ++f) {
          RunReport rep = run_filter(scenario, options.filters[f], truth_tracks, measurements, options.metric);
          rep.run = r;
          rep.seed = seed;
          reports[static_cast<std::size_t>(r) * nf + f] = std::move(rep);
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = options.runs;
      }
    }
  };
  const int threads = std::clamp(options.threads, 1, options.runs);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return reports;
}

std::vector<MetricBreakdown> rms_metric(const std::vector<RunReport>& reports, const FilterSpec& filter) {
  std::vector<MetricBreakdown> sum;
  std::vector<int> count;
  for (const RunReport& r : reports) {
    if (!(r.filter == filter) || !r.error.empty()) continue;
    if (sum.size() < r.metric.size()) {
      sum.resize(r.metric.size());
      count.resize(r.metric.size(), 0);
    }
    for (std::size_t k = 0; k < r.metric.size(); ++k) {
      const MetricBreakdown& m = r.metric[k];
      sum[k].total += m.total * m.total;
      sum[k].localisation += m.localisation * m.localisation;
      sum[k].missed += m.missed * m.missed;
      sum[k].false_targets += m.false_targets * m.false_targets;
      sum[k].switches += m.switches * m.switches;
      ++count[k];
    }
  }
  for (std::size_t k = 0; k < sum.size(); ++k) {
    const double n = count[k];
    for (double* v : {&sum[k].total, &sum[k].localisation, &sum[k].missed, &sum[k].false_targets, &sum[k].switches})
      *v = std::sqrt(*v / n);
  }
  return sum;
}

void emit_outputs(const std::vector<RunReport>& reports, const std::filesystem::path& out_dir) {
  if (reports.empty()) throw ConfigError("no run reports to write");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<FilterSpec> filters;
  for (const RunReport& r : reports)
    if (std::find(filters.begin(), filters.end(), r.filter) == filters.end()) filters.push_back(r.filter);
  std::vector<std::vector<MetricBreakdown>> rms;
  std::size_t steps = 0;
  for (const FilterSpec& f : filters) {
    rms.push_back(rms_metric(reports, f));
    steps = std::max(steps, rms.back().size());
  }
  auto cell = [&](std::size_t f, std::size_t k, double MetricBreakdown::*field) {
    return k < rms[f].size() ? num(rms[f][k].*field) : std::string("nan");
  };

  {
    OutFile csv(out_dir / "rms_vs_time.csv");
    OutFile dat(out_dir / "rms_vs_time.dat");
    *csv << "k";
    *dat << "# k";
    for (const FilterSpec& f : filters) {
      *csv << ',' << f.name();
      *dat << ' ' << f.name();
    }
    *csv << '\n';
    *dat << '\n';
    for (std::size_t k = 0; k < steps; ++k) {
      *csv << k + 1;
      *dat << k + 1;
      for (std::size_t f = 0; f < filters.size(); ++f) {
        *csv << ',' << cell(f, k, &MetricBreakdown::total);
        *dat << ' ' << cell(f, k, &MetricBreakdown::total);
      }
      *csv << '\n';
      *dat << '\n';
    }
  }
  {
    OutFile csv(out_dir / "decomposition.csv");
    *csv << "filter,k,localisation,missed,false,switch\n";
    for (std::size_t f = 0; f < filters.size(); ++f) {
      OutFile metric(out_dir / ("metric_" + filters[f].slug() + ".csv"));
      OutFile dat(out_dir / ("decomposition_" + filters[f].slug() + ".dat"));
      *metric << "k,total,loc,miss,false,switch\n";
      *dat << "# k localisation missed false switch\n";
      for (std::size_t k = 0; k < steps; ++k) {
        const std::string loc = cell(f, k, &MetricBreakdown::localisation);
        const std::string miss = cell(f, k, &MetricBreakdown::missed);
        const std::string fals = cell(f, k, &MetricBreakdown::false_targets);
        const std::string sw = cell(f, k, &MetricBreakdown::switches);
        *csv << filters[f].name() << ',' << k + 1 << ',' << loc << ',' << miss << ',' << fals << ',' << sw << '\n';
        *metric << k + 1 << ',' << cell(f, k, &MetricBreakdown::total) << ',' << loc << ',' << miss << ',' << fals
                << ',' << sw << '\n';
        *dat << k + 1 << ' ' << loc << ' ' << miss << ' ' << fals << ' ' << sw << '\n';
      }
    }
  }
  {
    // Table layout: one row per L, one column per filter kind, mean seconds per run.
    std::set<FilterKind> kinds;
    std::set<int> lscans;
    std::map<std::pair<int, FilterKind>, std::pair<double, int>> acc;
    for (const RunReport& r : reports) {
      kinds.insert(r.filter.kind);
      lscans.insert(r.filter.lscan);
      if (!r.error.empty()) continue;
      auto& [s, n] = acc[{r.filter.lscan, r.filter.kind}];
      s += r.seconds;
      ++n;
    }
    OutFile csv(out_dir / "timing.csv");
    *csv << "L";
    for (FilterKind kind : kinds) *csv << ',' << to_string(kind);
    *csv << '\n';
    for (int l : lscans) {
      *csv << l;
      for (FilterKind kind : kinds) {
        *csv << ',';
        if (const auto it = acc.find({l, kind}); it != acc.end() && it->second.second > 0)
          *csv << num(it->second.first / it->second.second);
      }
      *csv << '\n';
    }
  }
  {
    OutFile csv(out_dir / "runs.csv");
    *csv << "filter,L,run,seed,steps,mean_global_hypotheses,max_global_hypotheses,stream_hash,error\n";
    for (const RunReport& r : reports) {
      *csv << to_string(r.filter.kind) << ',' << r.filter.lscan << ',' << r.run << ',' << r.seed << ','
           << r.metric.size() << ',' << num(r.mean_global_hypotheses) << ',' << r.max_global_hypotheses << ','
           << r.stream_hash << ',' << csv_safe(r.error) << '\n';
    }
  }
}

}  // namespace trpmbm
