#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "incomp/policies.hpp"
#include "incomp/scenario.hpp"
#include "incomp/topology.hpp"

#ifndef INCOMP_SCENARIO_DIR
#define INCOMP_SCENARIO_DIR "scenarios"
#endif

namespace fixtures {

using namespace incomp;

inline std::string scenario_path(const std::string& name) { return std::string(INCOMP_SCENARIO_DIR) + "/" + name; }

inline std::vector<Edge> grid_edges(std::int64_t r = 5) {
  std::vector<Edge> e;
  for (NodeId row = 0; row < 4; ++row)
    for (NodeId col = 0; col < 4; ++col) {
      const NodeId v = row * 4 + col;
      if (col < 3) e.push_back({v, v + 1, r});
      if (row < 3) e.push_back({v, v + 4, r});
    }
  return e;
}

// The 4x4 grid used by the experiments: sources 2 and 1, destination 15,
// computation at 0, 6, 8, 12.
inline Topology grid(std::int64_t c) {
  std::vector<ComputationNode> comp;
  for (NodeId n : {0, 6, 8, 12}) comp.push_back({n, c});
  return Topology(16, grid_edges(), 2, 1, 15, comp);
}

// Triangle on {0, 1, 2}: sources 0 and 1, destination 2, unit capacities.
inline Topology triangle(NodeId comp_node, std::int64_t c = 10) {
  return Topology(3, {{0, 1, 1}, {0, 2, 1}, {1, 2, 1}}, 0, 1, 2, {{comp_node, c}});
}

// Two four-node lobes joined at node 4: raw side {0,1,2,3}, processed side {5,6,7}.
inline Topology lobes(std::int64_t r = 3, std::int64_t c = 2) {
  return Topology(8,
                  {{0, 1, r}, {0, 2, r}, {1, 3, r}, {2, 3, r}, {2, 4, r}, {3, 4, r}, {4, 5, r}, {4, 6, r},
                   {5, 6, r}, {5, 7, r}, {6, 7, r}},
                  0, 1, 7, {{4, c}});
}

inline Scenario make_scenario(Topology t, PolicySpec policy, double rate, std::uint64_t horizon,
                              std::uint64_t seed, ArrivalKind kind = ArrivalKind::poisson) {
  Scenario s;
  s.topology = std::move(t);
  s.arrival.kind = kind;
  s.arrival.rate = rate;
  s.policy = policy;
  s.horizon = horizon;
  s.seed = seed;
  return s;
}

inline PolicySpec policy(PolicyName name, std::optional<double> eps = std::nullopt,
                         std::optional<std::int64_t> threshold = std::nullopt) {
  PolicySpec p;
  p.name = name;
  p.eps_b = eps;
  p.threshold = threshold;
  return p;
}

// Random connected graph on `nodes` vertices with at most `max_edges` edges.
inline std::vector<Edge> random_connected_edges(std::mt19937_64& g, std::size_t nodes, std::size_t max_edges,
                                                std::int64_t max_r) {
  std::uniform_int_distribution<std::int64_t> cap(1, max_r);
  std::vector<Edge> edges;
  std::vector<std::vector<bool>> used(nodes, std::vector<bool>(nodes, false));
  for (NodeId v = 1; v < nodes; ++v) {
    const NodeId u = std::uniform_int_distribution<NodeId>(0, v - 1)(g);
    edges.push_back({u, v, cap(g)});
    used[u][v] = used[v][u] = true;
  }
  std::vector<std::pair<NodeId, NodeId>> spare;
  for (NodeId a = 0; a < nodes; ++a)
    for (NodeId b = a + 1; b < nodes; ++b)
      if (!used[a][b]) spare.push_back({a, b});
  std::shuffle(spare.begin(), spare.end(), g);
  const std::size_t room = max_edges > edges.size() ? max_edges - edges.size() : 0;
  const std::size_t extra = std::uniform_int_distribution<std::size_t>(0, std::min(room, spare.size()))(g);
  for (std::size_t k = 0; k < extra; ++k) edges.push_back({spare[k].first, spare[k].second, cap(g)});
  return edges;
}

// Random topology: distinct sources, any destination, 1..max_comp computation nodes.
inline Topology random_topology(std::mt19937_64& g, std::size_t max_nodes, std::size_t max_edges,
                                std::size_t max_comp, std::int64_t max_r = 4, std::int64_t max_c = 4) {
  const std::size_t nodes = std::uniform_int_distribution<std::size_t>(3, max_nodes)(g);
  auto edges = random_connected_edges(g, nodes, max_edges, max_r);
  std::vector<NodeId> perm(nodes);
  for (NodeId v = 0; v < nodes; ++v) perm[v] = v;
  std::shuffle(perm.begin(), perm.end(), g);
  const NodeId s1 = perm[0], s2 = perm[1];
  const NodeId d = std::uniform_int_distribution<NodeId>(0, nodes - 1)(g);
  std::shuffle(perm.begin(), perm.end(), g);
  const std::size_t k = std::uniform_int_distribution<std::size_t>(1, std::min(max_comp, nodes))(g);
  std::vector<ComputationNode> comp;
  for (std::size_t i = 0; i < k; ++i) comp.push_back({perm[i], std::uniform_int_distribution<std::int64_t>(0, max_c)(g)});
  return Topology(nodes, std::move(edges), s1, s2, d, std::move(comp));
}

}  // namespace fixtures
