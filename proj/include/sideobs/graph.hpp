#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sideobs/error.hpp"
#include "sideobs/rng.hpp"

namespace sideobs {

// An (action, base-arm) incidence.
struct Edge {
  std::size_t action;
  std::size_t arm;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

using IndexList = std::vector<std::size_t>;

namespace detail {

inline void sort_unique(IndexList& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

inline bool sorted_contains(std::span<const std::size_t> v, std::size_t x) {
  return std::binary_search(v.begin(), v.end(), x);
}

inline bool sorted_includes(std::span<const std::size_t> super, std::span<const std::size_t> sub) {
  return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

}  // namespace detail

// Bipartite action / base-arm structure.
//
// observe_set(j) is the set of base-arms revealed by pulling action j,
// reward_set(j) the subset its reward depends on, and observers(i) the
// actions whose observe set contains base-arm i. All sets are sorted.
// Instances are immutable; construct them through build_graph().
class SideObsGraph {
 public:
  std::size_t num_actions() const noexcept { return observe_.size(); }
  std::size_t num_base_arms() const noexcept { return observers_.size(); }

  std::span<const std::size_t> observe_set(std::size_t action) const { return observe_.at(action); }
  std::span<const std::size_t> reward_set(std::size_t action) const { return reward_.at(action); }
  std::span<const std::size_t> observers(std::size_t arm) const { return observers_.at(arm); }

  bool observes(std::size_t action, std::size_t arm) const {
    return detail::sorted_contains(observe_.at(action), arm);
  }

  // True when pulling `observer` reveals every base-arm that `target`'s reward needs.
  bool reveals_reward_of(std::size_t observer, std::size_t target) const {
    return detail::sorted_includes(observe_.at(observer), reward_.at(target));
  }

  // K == N and F_j = {j}: the action set doubles as the base-arm set.
  bool is_social() const {
    if (num_actions() != num_base_arms()) return false;
    for (std::size_t j = 0; j < num_actions(); ++j) {
      if (reward_[j].size() != 1 || reward_[j][0] != j) return false;
    }
    return true;
  }

  std::vector<Edge> observe_edges() const { return edges_of(observe_); }
  std::vector<Edge> reward_edges() const { return edges_of(reward_); }

  friend bool operator==(const SideObsGraph& a, const SideObsGraph& b) {
    return a.observe_ == b.observe_ && a.reward_ == b.reward_ && a.observers_ == b.observers_;
  }

  friend SideObsGraph build_graph(std::size_t, std::size_t, std::span<const Edge>,
                                  std::span<const Edge>);

 private:
  static std::vector<Edge> edges_of(const std::vector<IndexList>& sets) {
    std::vector<Edge> out;
    for (std::size_t j = 0; j < sets.size(); ++j) {
      for (std::size_t i : sets[j]) out.push_back({j, i});
    }
    return out;
  }

  std::vector<IndexList> observe_;
  std::vector<IndexList> reward_;
  std::vector<IndexList> observers_;
};

inline SideObsGraph build_graph(std::size_t num_actions, std::size_t num_base_arms,
                                std::span<const Edge> observe_edges,
                                std::span<const Edge> reward_edges) {
  if (num_actions == 0 || num_base_arms == 0) {
    throw Error(Errc::InvalidParams, "graph needs at least one action and one base-arm");
  }
  auto check_range = [&](const Edge& e) {
    if (e.action >= num_actions || e.arm >= num_base_arms) {
      throw Error(Errc::IndexOutOfRange, "edge (" + std::to_string(e.action) + ", " +
                                             std::to_string(e.arm) + ") outside " +
                                             std::to_string(num_actions) + "x" +
                                             std::to_string(num_base_arms));
    }
  };

  SideObsGraph g;
  g.observe_.assign(num_actions, {});
  g.reward_.assign(num_actions, {});
  g.observers_.assign(num_base_arms, {});
  for (const Edge& e : observe_edges) {
    check_range(e);
    g.observe_[e.action].push_back(e.arm);
  }
  for (auto& c : g.observe_) detail::sort_unique(c);

  for (const Edge& e : reward_edges) {
    check_range(e);
    if (!detail::sorted_contains(g.observe_[e.action], e.arm)) {
      throw Error(Errc::RewardEdgeNotObserved, "reward edge (" + std::to_string(e.action) + ", " +
                                                   std::to_string(e.arm) +
                                                   ") is not an observe edge");
    }
    g.reward_[e.action].push_back(e.arm);
  }
  for (auto& f : g.reward_) detail::sort_unique(f);

  std::vector<bool> covered(num_base_arms, false);
  for (std::size_t j = 0; j < num_actions; ++j) {
    if (g.observe_[j].empty()) {
      throw Error(Errc::InvalidParams, "action " + std::to_string(j) + " observes nothing");
    }
    for (std::size_t i : g.observe_[j]) g.observers_[i].push_back(j);
    for (std::size_t i : g.reward_[j]) covered[i] = true;
  }
  for (std::size_t i = 0; i < num_base_arms; ++i) {
    if (!covered[i]) {
      throw Error(Errc::UncoveredBaseArm,
                  "base-arm " + std::to_string(i) + " is in no action's reward set");
    }
  }
  return g;
}

// Undirected (or directed) node graph mapped to bandit form: one action and
// one base-arm per node, observe set = closed (out-)neighbourhood, reward set = {j}.
inline SideObsGraph social_graph(std::size_t num_nodes,
                                 std::span<const std::pair<std::size_t, std::size_t>> edges,
                                 bool directed = false) {
  std::vector<Edge> observe;
  std::vector<Edge> reward;
  observe.reserve(num_nodes + 2 * edges.size());
  reward.reserve(num_nodes);
  for (std::size_t j = 0; j < num_nodes; ++j) {
    observe.push_back({j, j});
    reward.push_back({j, j});
  }
  for (auto [u, v] : edges) {
    observe.push_back({u, v});
    if (!directed) observe.push_back({v, u});
  }
  return build_graph(num_nodes, num_nodes, observe, reward);
}

// Open neighbourhood of a node in a social graph.
inline IndexList social_neighbors(const SideObsGraph& g, std::size_t node) {
  IndexList out;
  for (std::size_t i : g.observe_set(node)) {
    if (i != node) out.push_back(i);
  }
  return out;
}

// Preferential-attachment edge list: a clique on the first attach+1 nodes,
// then every new node links to `attach` distinct existing nodes chosen with
// probability proportional to degree. Edges are (older, newer).
inline std::vector<std::pair<std::size_t, std::size_t>> ba_edges(std::size_t num_nodes,
                                                                 std::size_t attach,
                                                                 std::uint64_t seed) {
  if (attach < 1 || num_nodes <= attach) {
    throw Error(Errc::InvalidParams, "Barabasi-Albert needs nodes > attach >= 1");
  }
  Rng rng(seed);
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  edges.reserve(attach * (attach + 1) / 2 + attach * (num_nodes - attach - 1));
  // Node ids repeated once per incident edge endpoint.
  std::vector<std::size_t> endpoints;
  endpoints.reserve(2 * edges.capacity());

  for (std::size_t v = 1; v <= attach; ++v) {
    for (std::size_t u = 0; u < v; ++u) {
      edges.emplace_back(u, v);
      endpoints.push_back(u);
      endpoints.push_back(v);
    }
  }

  IndexList targets;
  for (std::size_t v = attach + 1; v < num_nodes; ++v) {
    targets.clear();
    while (targets.size() < attach) {
      const std::size_t u = endpoints[uniform_index(rng, endpoints.size())];
      if (std::find(targets.begin(), targets.end(), u) == targets.end()) targets.push_back(u);
    }
    std::sort(targets.begin(), targets.end());
    for (std::size_t u : targets) {
      edges.emplace_back(u, v);
      endpoints.push_back(u);
      endpoints.push_back(v);
    }
  }
  return edges;
}

inline SideObsGraph generate_ba(std::size_t num_nodes, std::size_t attach, std::uint64_t seed) {
  const auto edges = ba_edges(num_nodes, attach, seed);
  return social_graph(num_nodes, edges);
}

// Parses a whitespace-separated edge list ("u v" per line, '#' comments).
// Node ids are compacted to 0..n-1 in order of first appearance and
// self-loops are dropped (every node observes itself anyway).
inline SideObsGraph parse_edge_list(std::istream& in, bool directed = false) {
  std::unordered_map<std::uint64_t, std::size_t> ids;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  auto compact = [&](std::uint64_t raw) {
    auto [it, inserted] = ids.try_emplace(raw, ids.size());
    return it->second;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t pos = line.find_first_not_of(" \t");
    if (pos == std::string::npos || line[pos] == '#') continue;

    std::uint64_t ends[2];
    for (int k = 0; k < 2; ++k) {
      pos = line.find_first_not_of(" \t", pos);
      if (pos == std::string::npos) {
        throw ParseError(line_no, line.size() + 1, "expected two node ids");
      }
      const char* first = line.data() + pos;
      const char* last = line.data() + line.size();
      auto [ptr, ec] = std::from_chars(first, last, ends[k]);
      if (ec != std::errc() || (ptr != last && *ptr != ' ' && *ptr != '\t')) {
        throw ParseError(line_no, pos + 1, "expected an unsigned integer node id");
      }
      pos = static_cast<std::size_t>(ptr - line.data());
    }
    pos = line.find_first_not_of(" \t", pos);
    if (pos != std::string::npos && line[pos] != '#') {
      throw ParseError(line_no, pos + 1, "trailing data after edge");
    }
    const std::size_t u = compact(ends[0]);
    const std::size_t v = compact(ends[1]);
    if (u != v) edges.emplace_back(u, v);
  }
  if (ids.empty()) throw Error(Errc::EmptyGraph, "edge list contains no edges");
  return social_graph(ids.size(), edges, directed);
}

inline SideObsGraph load_edge_list(const std::string& path, bool directed = false) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  return parse_edge_list(in, directed);
}

// Node-induced subgraph of a social graph on the first `target_nodes`
// distinct nodes visited by a simple random walk. A walk that hits a node
// with no out-neighbours restarts from a uniformly chosen visited node.
// Nodes are relabelled in visit order.
inline SideObsGraph random_walk_subgraph(const SideObsGraph& g, std::size_t target_nodes,
                                         std::uint64_t seed,
                                         std::optional<std::size_t> start = std::nullopt) {
  if (!g.is_social()) {
    throw Error(Errc::InvalidParams, "random-walk sampling needs a social graph (F_j = {j})");
  }
  const std::size_t n = g.num_actions();
  if (target_nodes == 0 || target_nodes > n) {
    throw Error(Errc::InvalidParams, "target of " + std::to_string(target_nodes) +
                                         " nodes on a graph with " + std::to_string(n));
  }
  if (start && *start >= n) throw Error(Errc::IndexOutOfRange, "walk start outside graph");

  Rng rng(seed);
  constexpr std::size_t kUnvisited = static_cast<std::size_t>(-1);
  std::vector<std::size_t> relabel(n, kUnvisited);
  IndexList order;
  order.reserve(target_nodes);

  std::size_t current = start ? *start : uniform_index(rng, n);
  relabel[current] = 0;
  order.push_back(current);

  const std::size_t step_cap = 100 * target_nodes;
  std::vector<IndexList> neighbors(n);
  for (std::size_t j = 0; j < n; ++j) neighbors[j] = social_neighbors(g, j);

  for (std::size_t step = 0; order.size() < target_nodes; ++step) {
    if (step >= step_cap) {
      throw Error(Errc::Unreachable, "random walk visited " + std::to_string(order.size()) +
                                         " of " + std::to_string(target_nodes) + " nodes in " +
                                         std::to_string(step_cap) + " steps");
    }
    const IndexList& nb = neighbors[current];
    current = nb.empty() ? order[uniform_index(rng, order.size())]
                         : nb[uniform_index(rng, nb.size())];
    if (relabel[current] == kUnvisited) {
      relabel[current] = order.size();
      order.push_back(current);
    }
  }

  std::vector<Edge> observe;
  std::vector<Edge> reward;
  for (std::size_t k = 0; k < order.size(); ++k) {
    for (std::size_t i : g.observe_set(order[k])) {
      if (relabel[i] != kUnvisited) observe.push_back({k, relabel[i]});
    }
    reward.push_back({k, k});
  }
  return build_graph(order.size(), order.size(), observe, reward);
}

// Directed link of a routing network.
struct Link {
  int from;
  int to;

  friend bool operator==(const Link&, const Link&) = default;
};

// Paths are actions, links are base-arms, and every path observes and is
// rewarded on exactly its own links.
struct RoutingNetwork {
  std::vector<Link> links;
  std::vector<IndexList> paths;
  double delay_budget;
  SideObsGraph graph;
};

inline RoutingNetwork build_routing(std::vector<Link> links, std::vector<IndexList> paths,
                                    double delay_budget) {
  if (!(delay_budget > 0.0) || !std::isfinite(delay_budget)) {
    throw Error(Errc::InvalidParams, "delay budget must be positive");
  }
  std::vector<Edge> edges;
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const IndexList& path = paths[p];
    if (path.empty()) throw Error(Errc::BrokenPath, "path " + std::to_string(p) + " is empty");
    for (std::size_t k = 0; k < path.size(); ++k) {
      if (path[k] >= links.size()) {
        throw Error(Errc::IndexOutOfRange,
                    "path " + std::to_string(p) + " uses unknown link " + std::to_string(path[k]));
      }
      if (k > 0 && links[path[k - 1]].to != links[path[k]].from) {
        throw Error(Errc::BrokenPath, "path " + std::to_string(p) + ": link " +
                                          std::to_string(path[k - 1]) + " ends at node " +
                                          std::to_string(links[path[k - 1]].to) + " but link " +
                                          std::to_string(path[k]) + " starts at node " +
                                          std::to_string(links[path[k]].from));
      }
      edges.push_back({p, path[k]});
    }
  }
  SideObsGraph g = build_graph(paths.size(), links.size(), edges, edges);
  return RoutingNetwork{std::move(links), std::move(paths), delay_budget, std::move(g)};
}

// Six-node network, source 1 and sink 6: spokes 1->{2..5}, the inner cycle
// 2->3->4->5->2 and the sink edges {2..5}->6. The eight paths are the four
// two-hop routes 1->x->6 followed by the four routes that take one cycle hop.
inline RoutingNetwork default_routing_network(double delay_budget = 5.0) {
  std::vector<Link> links = {{1, 2}, {1, 3}, {1, 4}, {1, 5},   // spokes 0..3
                             {2, 3}, {3, 4}, {4, 5}, {5, 2},   // cycle 4..7
                             {2, 6}, {3, 6}, {4, 6}, {5, 6}};  // sink edges 8..11
  std::vector<IndexList> paths = {{0, 8}, {1, 9},    {2, 10},   {3, 11},
                                  {0, 4, 9}, {1, 5, 10}, {2, 6, 11}, {3, 7, 8}};
  return build_routing(std::move(links), std::move(paths), delay_budget);
}

// Paths that traverse none of the given links.
inline IndexList paths_avoiding(const RoutingNetwork& net, std::span<const std::size_t> failed) {
  IndexList out;
  for (std::size_t p = 0; p < net.paths.size(); ++p) {
    const bool hit = std::any_of(net.paths[p].begin(), net.paths[p].end(), [&](std::size_t l) {
      return std::find(failed.begin(), failed.end(), l) != failed.end();
    });
    if (!hit) out.push_back(p);
  }
  return out;
}

// Paths that traverse at least one of the given links.
inline IndexList paths_using(const RoutingNetwork& net, std::span<const std::size_t> links) {
  IndexList avoid = paths_avoiding(net, links);
  IndexList out;
  for (std::size_t p = 0; p < net.paths.size(); ++p) {
    if (!std::binary_search(avoid.begin(), avoid.end(), p)) out.push_back(p);
  }
  return out;
}

}  // namespace sideobs
