#pragma once

#include <cstdint>
#include <vector>

#include "incomp/queueing.hpp"
#include "incomp/topology.hpp"

namespace incomp {

// Per-edge backpressure choice. `packets` is either the full edge capacity or
// zero (no positive differential).
struct EdgeChoice {
  std::size_t edge = 0;
  bool active = false;
  PacketClass cls;
  NodeId from = 0;
  NodeId to = 0;
  std::int64_t differential = 0;
  std::int64_t packets = 0;
};

using RoutingDecision = std::vector<EdgeChoice>;

// Backpressure over class pairs. For every edge, every class (i, n) and both
// directions is scored by Q_src - Q_dst; the largest strictly positive score
// wins the whole link. Ties resolve to the lowest (i, n), then to the edge's
// stored direction. With `lobes`, raw and processed classes only compete for
// edges on their own side.
inline RoutingDecision bp_route(const NetworkState& state, const Topology& topo, const LobeSplit* lobes = nullptr) {
  RoutingDecision out(topo.edges().size());
  const std::size_t classes = state.class_count();
  for (std::size_t e = 0; e < topo.edges().size(); ++e) {
    const Edge& edge = topo.edges()[e];
    EdgeChoice& best = out[e];
    best.edge = e;
    if (edge.capacity <= 0) continue;
    for (std::size_t ci = 0; ci < classes; ++ci) {
      if (lobes) {
        const bool processed = state.class_at(ci).kind == Kind::processed;
        if (!(processed ? lobes->processed_edge[e] : lobes->raw_edge[e])) continue;
      }
      const std::int64_t qa = state.q_len_index(edge.a, ci);
      const std::int64_t qb = state.q_len_index(edge.b, ci);
      const std::int64_t forward = qa - qb;
      const std::int64_t backward = qb - qa;
      if (forward > best.differential) {
        best = {e, true, state.class_at(ci), edge.a, edge.b, forward, edge.capacity};
      }
      if (backward > best.differential) {
        best = {e, true, state.class_at(ci), edge.b, edge.a, backward, edge.capacity};
      }
    }
  }
  return out;
}

inline std::vector<Transmission> to_transmissions(const RoutingDecision& r) {
  std::vector<Transmission> out;
  out.reserve(r.size());
  for (const auto& c : r)
    if (c.active) out.push_back({c.edge, c.from, c.to, c.cls, c.packets});
  return out;
}

}  // namespace incomp
