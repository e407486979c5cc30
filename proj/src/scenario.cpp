#include "trpmbm/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "trpmbm/errors.hpp"

namespace trpmbm {

using nlohmann::json;

double ScenarioConfig::birth_rate() const {
  double total = 0;
  for (const auto& b : birth) total += b.weight;
  return total;
}

MotionMode constant_velocity_mode(double tau, double q, double probability) {
  MotionMode m;
  Eigen::Matrix2d f;
  f << 1, tau, 0, 1;
  Eigen::Matrix2d block;
  block << tau * tau * tau / 3, tau * tau / 2, tau * tau / 2, tau;
  m.transition = Eigen::MatrixXd::Zero(4, 4);
  m.transition.topLeftCorner(2, 2) = f;
  m.transition.bottomRightCorner(2, 2) = f;
  m.noise = Eigen::MatrixXd::Zero(4, 4);
  m.noise.topLeftCorner(2, 2) = q * block;
  m.noise.bottomRightCorner(2, 2) = q * block;
  m.offset = Eigen::VectorXd::Zero(4);
  m.probability = probability;
  return m;
}

std::vector<MotionMode> perpendicular_spawn_modes(double tau, double q, double probability, double distance) {
  const MotionMode cv = constant_velocity_mode(tau, q, probability);
  MotionMode left = cv;
  left.transition << 1, 0, 0, -tau,  //
      0, 0, 0, -1,                   //
      0, tau, 1, 0,                  //
      0, 1, 0, 0;
  left.perpendicular_offset = distance;
  MotionMode right = cv;
  right.transition << 1, 0, 0, tau,  //
      0, 0, 0, 1,                    //
      0, -tau, 1, 0,                 //
      0, -1, 0, 0;
  right.perpendicular_offset = -distance;
  return {left, right};
}

ScenarioConfig default_scenario() {
  ScenarioConfig c;
  c.modes = 3;
  c.motion.push_back(constant_velocity_mode(1.0, 0.01, 0.99));
  for (auto& m : perpendicular_spawn_modes(1.0, 0.01, 0.01, 5.0)) c.motion.push_back(m);
  c.measurement.observation = Eigen::MatrixXd::Zero(2, 4);
  c.measurement.observation(0, 0) = 1;
  c.measurement.observation(1, 2) = 1;
  c.measurement.noise = 4.0 * Eigen::MatrixXd::Identity(2, 2);
  c.measurement.detection_probability = 0.9;
  c.measurement.clutter_rate = 10.0;
  c.measurement.region = Region{0, 600, 0, 400};
  BirthComponent birth;
  birth.weight = 0.08;
  birth.mean = Eigen::Vector4d(300, 3, 170, 1);
  birth.covariance = Eigen::Vector4d(160.0 * 160.0, 1, 100.0 * 100.0, 1).asDiagonal();
  c.birth.push_back(birth);
  return c;
}

namespace {

bool symmetric_positive_definite(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + m.cwiseAbs().maxCoeff())) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  return llt.info() == Eigen::Success;
}

bool probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

std::vector<std::string> validate_scenario(const ScenarioConfig& c) {
  std::vector<std::string> issues;
  auto require = [&issues](bool ok, std::string message) {
    if (!ok) issues.push_back(std::move(message));
  };
  require(c.modes >= 1, "modes must be >= 1");
  require(!c.motion.empty(), "at least one motion mode is required");
  require(c.modes <= static_cast<int>(c.motion.size()), "modes exceeds the number of motion modes given");
  require(c.horizon >= 1, "horizon must be >= 1");
  if (c.motion.empty()) return issues;

  const auto nx = c.motion.front().transition.rows();
  for (std::size_t i = 0; i < c.motion.size(); ++i) {
    const auto& m = c.motion[i];
    const std::string name = "motion mode " + std::to_string(i + 1);
    require(m.transition.rows() == nx && m.transition.cols() == nx, name + ": transition must be " +
                                                                        std::to_string(nx) + "x" + std::to_string(nx));
    require(m.offset.size() == nx, name + ": offset must have " + std::to_string(nx) + " entries");
    require(m.noise.rows() == nx && symmetric_positive_definite(m.noise), name + ": noise must be symmetric positive definite");
    require(probability(m.probability), name + ": probability must be in [0, 1]");
    require(m.perpendicular_offset == 0.0 || nx == 4, name + ": perpendicular offsets need a 4-dimensional state");
  }
  const auto& mm = c.measurement;
  require(mm.observation.cols() == nx && mm.observation.rows() >= 1, "measurement: observation matrix must have " +
                                                                          std::to_string(nx) + " columns");
  require(mm.noise.rows() == mm.observation.rows() && symmetric_positive_definite(mm.noise),
          "measurement: noise must be symmetric positive definite and match the observation rows");
  require(probability(mm.detection_probability), "measurement: detection_probability must be in [0, 1]");
  require(mm.clutter_rate >= 0.0, "measurement: clutter_rate must be >= 0");
  require(mm.region.x_max > mm.region.x_min && mm.region.y_max > mm.region.y_min, "measurement: region must have positive area");
  require(mm.observation.rows() == 2, "measurement: clutter is sampled in a 2-D region, observation must have 2 rows");
  require(!c.birth.empty(), "birth: at least one component is required");
  for (std::size_t i = 0; i < c.birth.size(); ++i) {
    const auto& b = c.birth[i];
    const std::string name = "birth component " + std::to_string(i + 1);
    require(b.weight >= 0.0, name + ": weight must be >= 0");
    require(b.mean.size() == nx, name + ": mean must have " + std::to_string(nx) + " entries");
    require(b.covariance.rows() == nx && symmetric_positive_definite(b.covariance),
            name + ": covariance must be symmetric positive definite");
  }
  if (c.birth_type == BirthType::kMultiBernoulli) {
    require(c.birth_rate() <= 1.0, "birth: multi-Bernoulli birth needs total weight <= 1");
  }
  const auto& f = c.filter;
  require(f.max_global_hypotheses >= 1, "filter: max_global_hypotheses must be >= 1");
  require(f.global_weight_threshold > 0, "filter: global_weight_threshold must be > 0");
  require(f.ppp_weight_threshold > 0, "filter: ppp_weight_threshold must be > 0");
  require(f.existence_threshold > 0, "filter: existence_threshold must be > 0");
  require(f.alive_threshold > 0, "filter: alive_threshold must be > 0");
  require(f.estimate_threshold > 0 && f.estimate_threshold <= 1, "filter: estimate_threshold must be in (0, 1]");
  require(f.gate_threshold > 0, "filter: gate_threshold must be > 0");
  require(f.lscan >= 1, "filter: lscan must be >= 1");
  return issues;
}

namespace {

// Reads typed fields from a JSON object and reports the dotted path on failure.
class Reader {
 public:
  Reader(const json& object, std::string path) : object_(object), path_(std::move(path)) {
    if (!object_.is_object()) fail(path_.empty() ? "top level" : path_, "expected an object");
  }

  template <typename T>
  void read(const char* key, T& target) const {
    seen_.insert(key);
    if (!object_.contains(key)) return;
    try {
      target = object_.at(key).get<T>();
    } catch (const json::exception&) {
      fail(field(key), "wrong type");
    }
  }

  void read_matrix(const char* key, Eigen::MatrixXd& target) const {
    seen_.insert(key);
    if (object_.contains(key)) target = to_matrix(object_.at(key), field(key));
  }
  void read_vector(const char* key, Eigen::VectorXd& target) const {
    seen_.insert(key);
    if (object_.contains(key)) target = to_vector(object_.at(key), field(key));
  }

  bool has(const char* key) const {
    seen_.insert(key);
    return object_.contains(key);
  }
  Reader child(const char* key) const {
    seen_.insert(key);
    return Reader(object_.at(key), field(key));
  }
  const json& raw(const char* key) const {
    seen_.insert(key);
    return object_.at(key);
  }
  std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  /// Rejects keys that no read() asked for.
  void finish() const {
    for (const auto& [key, value] : object_.items()) {
      if (!seen_.count(key)) fail(field(key.c_str()), "unknown field");
    }
  }

  [[noreturn]] static void fail(const std::string& where, const std::string& what) {
    throw ConfigError("field '" + where + "': " + what);
  }

  static Eigen::VectorXd to_vector(const json& j, const std::string& where) {
    if (!j.is_array()) fail(where, "expected an array of numbers");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (!j[i].is_number()) fail(where, "expected an array of numbers");
      v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
  }

  static Eigen::MatrixXd to_matrix(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) fail(where, "expected a row-major array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const auto row = to_vector(j[static_cast<std::size_t>(r)], where);
      if (row.size() != cols) fail(where, "rows have different lengths");
      m.row(r) = row.transpose();
    }
    return m;
  }

 private:
  const json& object_;
  std::string path_;
  mutable std::set<std::string> seen_;
};

MotionMode read_mode(const Reader& r, MotionMode mode) {
  r.read_matrix("transition", mode.transition);
  r.read_vector("offset", mode.offset);
  r.read("perpendicular_offset", mode.perpendicular_offset);
  r.read_matrix("noise", mode.noise);
  r.read("probability", mode.probability);
  r.finish();
  return mode;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

}  // namespace

ScenarioConfig parse_scenario(std::string_view text) {
  ScenarioConfig c = default_scenario();
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) return c;

  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(end), '\n');
    throw ConfigError("line " + std::to_string(line) + ": " + e.what());
  }

  const Reader top(root, "");
  top.read("modes", c.modes);
  top.read("horizon", c.horizon);
  top.read("seed", c.seed);

  if (top.has("motion")) {
    const Reader motion = top.child("motion");
    double tau = 1.0, q = 0.01, survival = 0.99, spawn = 0.01, distance = 5.0;
    motion.read("tau", tau);
    motion.read("q", q);
    motion.read("survival_probability", survival);
    motion.read("spawn_probability", spawn);
    motion.read("spawn_distance", distance);
    c.motion = {constant_velocity_mode(tau, q, survival)};
    for (auto& m : perpendicular_spawn_modes(tau, q, spawn, distance)) c.motion.push_back(m);
    if (motion.has("modes")) {
      const json& list = motion.raw("modes");
      if (!list.is_array() || list.empty()) Reader::fail(motion.field("modes"), "expected a non-empty array");
      std::vector<MotionMode> explicit_modes;
      for (std::size_t i = 0; i < list.size(); ++i) {
        const MotionMode base = i < c.motion.size() ? c.motion[i] : c.motion.back();
        explicit_modes.push_back(read_mode(Reader(list[i], motion.field("modes") + "[" + std::to_string(i) + "]"), base));
      }
      c.motion = std::move(explicit_modes);
      if (!root.contains("modes")) c.modes = static_cast<int>(c.motion.size());
    }
    motion.finish();
  }

  if (top.has("measurement")) {
    const Reader m = top.child("measurement");
    m.read_matrix("observation", c.measurement.observation);
    if (m.has("noise_variance")) {
      double variance = 0;
      m.read("noise_variance", variance);
      c.measurement.noise = variance * Eigen::MatrixXd::Identity(c.measurement.observation.rows(), c.measurement.observation.rows());
    }
    m.read_matrix("noise", c.measurement.noise);
    m.read("detection_probability", c.measurement.detection_probability);
    m.read("clutter_rate", c.measurement.clutter_rate);
    if (m.has("region")) {
      Eigen::VectorXd region;
      m.read_vector("region", region);
      if (region.size() != 4) Reader::fail(m.field("region"), "expected [x_min, x_max, y_min, y_max]");
      c.measurement.region = Region{region(0), region(1), region(2), region(3)};
    }
    m.finish();
  }

  if (top.has("birth")) {
    const Reader b = top.child("birth");
    std::string type = c.birth_type == BirthType::kPoisson ? "ppp" : "multi_bernoulli";
    b.read("type", type);
    if (type == "ppp") {
      c.birth_type = BirthType::kPoisson;
    } else if (type == "multi_bernoulli") {
      c.birth_type = BirthType::kMultiBernoulli;
    } else {
      Reader::fail(b.field("type"), "expected \"ppp\" or \"multi_bernoulli\"");
    }
    if (b.has("components")) {
      const json& list = b.raw("components");
      if (!list.is_array() || list.empty()) Reader::fail(b.field("components"), "expected a non-empty array");
      std::vector<BirthComponent> components;
      for (std::size_t i = 0; i < list.size(); ++i) {
        const Reader item(list[i], b.field("components") + "[" + std::to_string(i) + "]");
        BirthComponent component = c.birth.front();
        item.read("weight", component.weight);
        item.read_vector("mean", component.mean);
        item.read_matrix("covariance", component.covariance);
        item.finish();
        components.push_back(std::move(component));
      }
      c.birth = std::move(components);
    }
    b.finish();
  }

  if (top.has("filter")) {
    const Reader f = top.child("filter");
    f.read("max_global_hypotheses", c.filter.max_global_hypotheses);
    f.read("global_weight_threshold", c.filter.global_weight_threshold);
    f.read("ppp_weight_threshold", c.filter.ppp_weight_threshold);
    f.read("existence_threshold", c.filter.existence_threshold);
    f.read("alive_threshold", c.filter.alive_threshold);
    f.read("estimate_threshold", c.filter.estimate_threshold);
    f.read("gate_threshold", c.filter.gate_threshold);
    f.read("lscan", c.filter.lscan);
    f.finish();
  }
  top.finish();

  const auto issues = validate_scenario(c);
  if (!issues.empty()) {
    std::string message = "invalid scenario:";
    for (const auto& issue : issues) message += "\n  - " + issue;
    throw ConfigError(message);
  }
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

std::string scenario_to_json(const ScenarioConfig& c) {
  json root;
  root["modes"] = c.modes;
  root["horizon"] = c.horizon;
  root["seed"] = c.seed;
  json modes = json::array();
  for (const auto& m : c.motion) {
    modes.push_back({{"transition", matrix_json(m.transition)},
                     {"offset", vector_json(m.offset)},
                     {"perpendicular_offset", m.perpendicular_offset},
                     {"noise", matrix_json(m.noise)},
                     {"probability", m.probability}});
  }
  root["motion"] = {{"modes", modes}};
  const auto& mm = c.measurement;
  root["measurement"] = {{"observation", matrix_json(mm.observation)},
                         {"noise", matrix_json(mm.noise)},
                         {"detection_probability", mm.detection_probability},
                         {"clutter_rate", mm.clutter_rate},
                         {"region", {mm.region.x_min, mm.region.x_max, mm.region.y_min, mm.region.y_max}}};
  json births = json::array();
  for (const auto& b : c.birth) {
    births.push_back({{"weight", b.weight}, {"mean", vector_json(b.mean)}, {"covariance", matrix_json(b.covariance)}});
  }
  root["birth"] = {{"type", c.birth_type == BirthType::kPoisson ? "ppp" : "multi_bernoulli"}, {"components", births}};
  const auto& f = c.filter;
  root["filter"] = {{"max_global_hypotheses", f.max_global_hypotheses},
                    {"global_weight_threshold", f.global_weight_threshold},
                    {"ppp_weight_threshold", f.ppp_weight_threshold},
                    {"existence_threshold", f.existence_threshold},
                    {"alive_threshold", f.alive_threshold},
                    {"estimate_threshold", f.estimate_threshold},
                    {"gate_threshold", f.gate_threshold},
                    {"lscan", f.lscan}};
  return root.dump(2) + "\n";
}

}  // namespace trpmbm
