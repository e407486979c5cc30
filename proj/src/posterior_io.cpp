#include <json.hpp>

#include "trpmbm/filter.hpp"

namespace trpmbm {

namespace {

using nlohmann::json;

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json component_json(const GaussianBranch& c) {
  return {{"genealogy", c.genealogy.to_string()}, {"states", c.num_states()}, {"last_mean", vector_json(c.last_mean())}};
}

}  // namespace

std::string posterior_to_json(const PMBMPosterior& post) {
  json out;
  out["time"] = post.time;
  json ppp = json::array();
  for (const auto& c : post.ppp) {
    json item = component_json(c.density);
    item["log_weight"] = c.log_weight;
    item["start_time"] = c.start_time;
    ppp.push_back(std::move(item));
  }
  out["ppp"] = std::move(ppp);

  json trees = json::array();
  for (const auto& tree : post.trees) {
    json slots = json::array();
    for (const auto& slot : tree.slots) {
      json hyps = json::array();
      for (const auto& hyp : slot.hypotheses) {
        json components = json::array();
        for (const auto& c : hyp.density.components) {
          json item = component_json(c.density);
          item["end_time"] = c.end_time;
          item["beta"] = c.beta;
          components.push_back(std::move(item));
        }
        json history = json::array();
        for (const auto& a : hyp.history) history.push_back({a.time, a.measurement});
        hyps.push_back({{"log_weight", hyp.log_weight},
                        {"existence", hyp.existence},
                        {"history", std::move(history)},
                        {"components", std::move(components)}});
      }
      slots.push_back({{"id", slot.id.to_string()}, {"hypotheses", std::move(hyps)}});
    }
    trees.push_back({{"start_time", tree.start_time}, {"slots", std::move(slots)}});
  }
  out["trees"] = std::move(trees);

  json globals = json::array();
  for (const auto& g : post.globals) globals.push_back({{"log_weight", g.log_weight}, {"selection", g.selection}});
  out["globals"] = std::move(globals);
  return out.dump(2) + "\n";
}

}  // namespace trpmbm
