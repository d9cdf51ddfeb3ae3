#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "sideobs/activation.hpp"
#include "sideobs/env.hpp"
#include "sideobs/error.hpp"
#include "sideobs/graph.hpp"
#include "sideobs/json_io.hpp"
#include "sideobs/policy.hpp"

namespace sideobs {

struct BaGraphSpec {
  std::size_t nodes = 0;
  std::size_t attach = 3;
  std::uint64_t seed = 0;
};

struct EdgeListGraphSpec {
  std::string path;
  bool directed = false;
  std::size_t subgraph_nodes = 0;  // 0 keeps the whole graph
  std::uint64_t walk_seed = 0;
};

struct RoutingGraphSpec {
  std::vector<Link> links;
  std::vector<IndexList> paths;
  double budget = 5.0;
};

struct ExplicitGraphSpec {
  Json document;
};

using GraphSpec = std::variant<BaGraphSpec, EdgeListGraphSpec, RoutingGraphSpec, ExplicitGraphSpec>;

struct ExplicitSets {
  std::vector<IndexList> sets;
  std::vector<double> probs;
};

struct UniformPartitionSpec {
  std::size_t count = 1;
  double overlap = 0.0;
  std::uint64_t seed = 0;
};

// Routing only: set a holds the paths that avoid failed_links[a].
struct LinkFailureSpec {
  std::vector<IndexList> failed_links;
  std::vector<double> probs;
};

using ActivationSpec = std::variant<ExplicitSets, UniformPartitionSpec, LinkFailureSpec>;

struct ExplicitMeans {
  std::vector<double> values;
};

struct RandomMeans {
  std::size_t optimal_count = 0;
  double optimal_mu = 0.9;
  double lo = 0.3;
  double hi = 0.7;
  std::uint64_t seed = 0;
  bool redraw_per_trial = false;
};

using MeanSpec = std::variant<ExplicitMeans, RandomMeans>;

struct ExperimentConfig {
  GraphSpec graph;
  ActivationSpec activation;
  MeanSpec means;
  std::string reward = "identity";  // "identity" | "path_delay"
  double budget = 5.0;              // path_delay budget for non-routing graphs
  std::uint64_t horizon = 0;
  std::size_t trials = 1;
  std::vector<std::string> policies;
  double epsilon = kDefaultEpsilon;
  std::uint64_t seed = 0;
  std::uint64_t checkpoint_stride = 0;  // 0 means horizon / 500
  bool strict_kb = false;

  std::uint64_t stride() const {
    if (checkpoint_stride > 0) return checkpoint_stride;
    return std::max<std::uint64_t>(1, horizon / 500);
  }
};

namespace detail {

template <typename T>
T value_or(const Json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

inline GraphSpec parse_graph_spec(const Json& g) {
  const auto type = g.at("type").get<std::string>();
  if (type == "ba") {
    return BaGraphSpec{g.at("nodes").get<std::size_t>(), value_or<std::size_t>(g, "attach", 3),
                       value_or<std::uint64_t>(g, "seed", 0)};
  }
  if (type == "edge_list") {
    return EdgeListGraphSpec{g.at("path").get<std::string>(), value_or(g, "directed", false),
                             value_or<std::size_t>(g, "subgraph_nodes", 0),
                             value_or<std::uint64_t>(g, "walk_seed", 0)};
  }
  if (type == "routing") {
    if (value_or(g, "default", false) || !g.contains("links")) {
      const auto net = default_routing_network();
      return RoutingGraphSpec{net.links, net.paths, value_or(g, "budget", 5.0)};
    }
    RoutingGraphSpec spec;
    for (const Json& l : g.at("links")) spec.links.push_back({l.at(0).get<int>(), l.at(1).get<int>()});
    spec.paths = g.at("paths").get<std::vector<IndexList>>();
    spec.budget = value_or(g, "budget", 5.0);
    return spec;
  }
  if (type == "explicit") return ExplicitGraphSpec{g};
  throw Error(Errc::InvalidConfig, "unknown graph type '" + type + "'");
}

inline ActivationSpec parse_activation_spec(const Json& a) {
  if (a.contains("uniform_partition")) {
    return UniformPartitionSpec{a.at("uniform_partition").get<std::size_t>(),
                                value_or(a, "overlap", 0.0), value_or<std::uint64_t>(a, "seed", 0)};
  }
  if (a.contains("failed_links")) {
    LinkFailureSpec spec{a.at("failed_links").get<std::vector<IndexList>>(), {}};
    spec.probs = a.contains("probs")
                     ? a.at("probs").get<std::vector<double>>()
                     : std::vector<double>(spec.failed_links.size(),
                                           1.0 / static_cast<double>(spec.failed_links.size()));
    return spec;
  }
  ExplicitSets spec{a.at("sets").get<std::vector<IndexList>>(), {}};
  spec.probs = a.contains("probs")
                   ? a.at("probs").get<std::vector<double>>()
                   : std::vector<double>(spec.sets.size(), 1.0 / static_cast<double>(spec.sets.size()));
  return spec;
}

inline MeanSpec parse_mean_spec(const Json& m) {
  if (m.is_array()) return ExplicitMeans{m.get<std::vector<double>>()};
  if (m.contains("values")) return ExplicitMeans{m.at("values").get<std::vector<double>>()};
  RandomMeans r;
  r.optimal_count = value_or<std::size_t>(m, "optimal_count", 0);
  r.optimal_mu = value_or(m, "optimal_mu", 0.9);
  if (m.contains("others_range")) {
    r.lo = m.at("others_range").at(0).get<double>();
    r.hi = m.at("others_range").at(1).get<double>();
  }
  r.seed = value_or<std::uint64_t>(m, "seed", 0);
  r.redraw_per_trial = value_or(m, "redraw_per_trial", false);
  return r;
}

}  // namespace detail

inline ExperimentConfig parse_config(const Json& doc) {
  try {
    ExperimentConfig cfg;
    cfg.graph = detail::parse_graph_spec(doc.at("graph"));
    cfg.activation = detail::parse_activation_spec(doc.at("activation"));
    cfg.means = detail::parse_mean_spec(doc.at("means"));
    const bool routing = std::holds_alternative<RoutingGraphSpec>(cfg.graph);
    cfg.reward = detail::value_or<std::string>(doc, "reward", routing ? "path_delay" : "identity");
    cfg.budget = detail::value_or(doc, "budget", 5.0);
    cfg.horizon = doc.at("horizon").get<std::uint64_t>();
    cfg.trials = detail::value_or<std::size_t>(doc, "trials", 20);
    cfg.policies = detail::value_or(doc, "policies",
                                    std::vector<std::string>(std::begin(kPolicyIds), std::end(kPolicyIds)));
    cfg.epsilon = detail::value_or(doc, "epsilon", kDefaultEpsilon);
    cfg.seed = detail::value_or<std::uint64_t>(doc, "seed", 0);
    cfg.checkpoint_stride = detail::value_or<std::uint64_t>(doc, "checkpoint_stride", 0);
    cfg.strict_kb = detail::value_or(doc, "strict_kb", false);

    if (cfg.horizon < 16) throw Error(Errc::InvalidConfig, "horizon must be at least 16");
    if (cfg.trials < 1) throw Error(Errc::InvalidConfig, "trials must be at least 1");
    if (cfg.reward != "identity" && cfg.reward != "path_delay") {
      throw Error(Errc::InvalidConfig, "unknown reward '" + cfg.reward + "'");
    }
    for (const auto& p : cfg.policies) {
      if (!is_known_policy(p)) throw Error(Errc::InvalidConfig, "unknown policy '" + p + "'");
    }
    return cfg;
  } catch (const Json::exception& e) {
    throw Error(Errc::InvalidConfig, e.what());
  }
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  Json doc;
  try {
    in >> doc;
  } catch (const Json::exception& e) {
    throw Error(Errc::InvalidConfig, path.string() + ": " + e.what());
  }
  auto cfg = parse_config(doc);
  // Relative edge-list paths resolve against the config's directory.
  if (auto* el = std::get_if<EdgeListGraphSpec>(&cfg.graph)) {
    std::filesystem::path p(el->path);
    if (p.is_relative()) el->path = (path.parent_path() / p).string();
  }
  return cfg;
}

// Graph, activation structure and reward model of an experiment: everything
// except the base-arm means.
struct Scenario {
  SideObsGraph graph;
  ActivationStructure activation;
  RewardModel reward;
};

inline Scenario build_scenario(const ExperimentConfig& cfg) {
  std::optional<RoutingNetwork> routing;
  SideObsGraph graph = std::visit(
      [&](const auto& spec) -> SideObsGraph {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, BaGraphSpec>) {
          return generate_ba(spec.nodes, spec.attach, spec.seed);
        } else if constexpr (std::is_same_v<T, EdgeListGraphSpec>) {
          SideObsGraph g = load_edge_list(spec.path, spec.directed);
          if (spec.subgraph_nodes > 0) g = random_walk_subgraph(g, spec.subgraph_nodes, spec.walk_seed);
          return g;
        } else if constexpr (std::is_same_v<T, RoutingGraphSpec>) {
          routing = build_routing(spec.links, spec.paths, spec.budget);
          return routing->graph;
        } else {
          return graph_from_json(spec.document);
        }
      },
      cfg.graph);

  ActivationStructure act = std::visit(
      [&](const auto& spec) -> ActivationStructure {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, ExplicitSets>) {
          return ActivationStructure(spec.sets, spec.probs, graph.num_actions());
        } else if constexpr (std::is_same_v<T, UniformPartitionSpec>) {
          return uniform_partition(graph.num_actions(), spec.count, spec.overlap, spec.seed);
        } else {
          if (!routing) throw Error(Errc::InvalidConfig, "failed_links needs a routing graph");
          std::vector<IndexList> sets;
          for (const auto& failed : spec.failed_links) sets.push_back(paths_avoiding(*routing, failed));
          return ActivationStructure(std::move(sets), spec.probs, graph.num_actions());
        }
      },
      cfg.activation);

  RewardModel reward = RewardModel::identity();
  if (cfg.reward == "path_delay") {
    reward = RewardModel::path_delay(routing ? routing->delay_budget : cfg.budget);
  }
  return Scenario{std::move(graph), std::move(act), reward};
}

// Base-arm means for one trial (trial index only matters when redrawing).
inline std::vector<double> build_means(const ExperimentConfig& cfg, std::size_t num_arms,
                                       std::size_t trial = 0) {
  if (const auto* m = std::get_if<ExplicitMeans>(&cfg.means)) return m->values;
  const auto& r = std::get<RandomMeans>(cfg.means);
  const std::uint64_t seed = r.redraw_per_trial ? stream_seed(r.seed, "means", trial) : r.seed;
  return assign_means(num_arms, r.optimal_count, r.optimal_mu, r.lo, r.hi, seed);
}

inline bool means_vary_by_trial(const ExperimentConfig& cfg) {
  const auto* r = std::get_if<RandomMeans>(&cfg.means);
  return r && r->redraw_per_trial;
}

}  // namespace sideobs
