#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"
#include "sideobs/bounds.hpp"
#include "sideobs/error.hpp"
#include "sideobs/graph.hpp"
#include "sideobs/lp.hpp"

namespace sideobs {

using Json = nlohmann::json;

// {"K": .., "N": .., "observe": [[j, i], ..], "reward": [[j, i], ..]}
inline Json graph_to_json(const SideObsGraph& g) {
  auto edges = [](const std::vector<Edge>& es) {
    Json out = Json::array();
    for (const Edge& e : es) out.push_back({e.action, e.arm});
    return out;
  };
  return Json{{"K", g.num_actions()},
              {"N", g.num_base_arms()},
              {"observe", edges(g.observe_edges())},
              {"reward", edges(g.reward_edges())}};
}

inline SideObsGraph graph_from_json(const Json& doc) {
  try {
    auto edges = [](const Json& arr) {
      std::vector<Edge> out;
      for (const Json& e : arr) {
        if (!e.is_array() || e.size() != 2) {
          throw Error(Errc::InvalidConfig, "graph edges must be [action, arm] pairs");
        }
        out.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>()});
      }
      return out;
    };
    const auto observe = edges(doc.at("observe"));
    const auto reward = edges(doc.at("reward"));
    return build_graph(doc.at("K").get<std::size_t>(), doc.at("N").get<std::size_t>(), observe,
                       reward);
  } catch (const Json::exception& e) {
    throw Error(Errc::InvalidConfig, std::string("graph document: ") + e.what());
  }
}

inline Json lp_solution_to_json(const LpSolution& sol) {
  Json z = Json::array();
  const auto vars = sol.vars();
  const auto weights = sol.z();
  const auto gamma = sol.gamma();
  Json gam = Json::array();
  for (std::size_t v = 0; v < vars.size(); ++v) {
    z.push_back({{"action", vars[v].action}, {"set", vars[v].set}, {"z", weights[v]}});
    gam.push_back({{"action", vars[v].action}, {"set", vars[v].set}, {"gamma", gamma[v]}});
  }
  Json totals = Json::array();
  for (double t : sol.set_totals()) totals.push_back(t);
  Json rates = Json::array();
  for (double r : sol.rates()) rates.push_back(r);
  return Json{{"objective", sol.objective()}, {"z", z},          {"Z", totals},
              {"Z_max", sol.max_set_total()}, {"v", rates},      {"v_min", sol.min_rate()},
              {"gamma", gam}};
}

inline Json bound_report_to_json(const BoundReport& r) {
  Json terms = Json::array();
  for (const BoundTerm& t : r.terms) {
    terms.push_back({{"action", t.action},
                     {"set", t.set},
                     {"gap", t.gap},
                     {"m_ja", t.m_ja},
                     {"gamma", t.gamma},
                     {"deferred", t.deferred},
                     {"contribution", t.contribution}});
  }
  return Json{{"main_term", r.main_term}, {"ok_term_cap", r.ok_term_cap}, {"total", r.total},
              {"m_bar", r.m_bar},         {"deferred", r.deferred},       {"terms", terms}};
}

}  // namespace sideobs
