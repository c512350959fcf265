#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "incomp/errors.hpp"

namespace incomp {

using NodeId = std::size_t;

struct Edge {
  NodeId a = 0;
  NodeId b = 0;
  std::int64_t capacity = 0;  // packets per slot, shared by both directions

  NodeId other(NodeId v) const { return v == a ? b : a; }
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct ComputationNode {
  NodeId node = 0;
  std::int64_t capacity = 0;  // combined pairs per slot
  friend bool operator==(const ComputationNode&, const ComputationNode&) = default;
};

struct Neighbor {
  NodeId node;
  std::size_t edge;
};

// Undirected capacitated graph with two sources, one destination and a set of
// computation nodes. Immutable once constructed.
class Topology {
 public:
  Topology() = default;

  Topology(std::size_t node_count, std::vector<Edge> edges, NodeId s1, NodeId s2,
           NodeId destination, std::vector<ComputationNode> computation_nodes)
      : node_count_(node_count),
        edges_(std::move(edges)),
        s1_(s1),
        s2_(s2),
        destination_(destination),
        computation_(std::move(computation_nodes)) {
    validate();
    adjacency_.assign(node_count_, {});
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      adjacency_[edges_[e].a].push_back({edges_[e].b, e});
      adjacency_[edges_[e].b].push_back({edges_[e].a, e});
    }
    comp_index_.assign(node_count_, std::nullopt);
    for (std::size_t c = 0; c < computation_.size(); ++c) comp_index_[computation_[c].node] = c;
  }

  std::size_t node_count() const { return node_count_; }
  const std::vector<Edge>& edges() const { return edges_; }
  NodeId s1() const { return s1_; }
  NodeId s2() const { return s2_; }
  NodeId source(int i) const { return i == 1 ? s1_ : s2_; }
  NodeId destination() const { return destination_; }
  const std::vector<ComputationNode>& computation_nodes() const { return computation_; }
  std::size_t computation_count() const { return computation_.size(); }
  std::span<const Neighbor> neighbors(NodeId v) const { return adjacency_[v]; }

  // Position of `v` in the computation node list, if it is one.
  std::optional<std::size_t> computation_index(NodeId v) const {
    return v < comp_index_.size() ? comp_index_[v] : std::nullopt;
  }

  friend bool operator==(const Topology& x, const Topology& y) {
    return x.node_count_ == y.node_count_ && x.edges_ == y.edges_ && x.s1_ == y.s1_ &&
           x.s2_ == y.s2_ && x.destination_ == y.destination_ && x.computation_ == y.computation_;
  }

 private:
  void validate() const {
    auto valid = [&](NodeId v) { return v < node_count_; };
    if (!valid(s1_) || !valid(s2_)) throw ParseError("invalid source node id");
    if (s1_ == s2_) throw ParseError("sources must be distinct (s1 != s2)");
    if (!valid(destination_)) throw ParseError("invalid destination node id");
    std::set<std::pair<NodeId, NodeId>> seen;
    for (const auto& e : edges_) {
      if (!valid(e.a) || !valid(e.b)) throw ParseError("edge references invalid node id");
      if (e.a == e.b) throw ParseError("self-loop edge");
      if (e.capacity < 0) throw ParseError("negative edge capacity");
      if (!seen.emplace(std::min(e.a, e.b), std::max(e.a, e.b)).second)
        throw ParseError("duplicate edge (" + std::to_string(e.a) + "," + std::to_string(e.b) + ")");
    }
    std::set<NodeId> comp;
    for (const auto& c : computation_) {
      if (!valid(c.node)) throw ParseError("invalid computation node id");
      if (c.capacity < 0) throw ParseError("negative computation capacity");
      if (!comp.insert(c.node).second) throw ParseError("duplicate computation node");
    }
  }

  std::size_t node_count_ = 0;
  std::vector<Edge> edges_;
  NodeId s1_ = 0;
  NodeId s2_ = 1;
  NodeId destination_ = 0;
  std::vector<ComputationNode> computation_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<std::optional<std::size_t>> comp_index_;
};

namespace detail {

inline std::vector<bool> reach_avoiding(const Topology& t, std::span<const NodeId> starts,
                                        NodeId removed) {
  std::vector<bool> seen(t.node_count(), false);
  std::deque<NodeId> frontier;
  for (NodeId s : starts) {
    if (s == removed || seen[s]) continue;
    seen[s] = true;
    frontier.push_back(s);
  }
  while (!frontier.empty()) {
    NodeId v = frontier.front();
    frontier.pop_front();
    for (const auto& nb : t.neighbors(v)) {
      if (nb.node == removed || seen[nb.node]) continue;
      seen[nb.node] = true;
      frontier.push_back(nb.node);
    }
  }
  return seen;
}

}  // namespace detail

// True when deleting `n` separates everything reachable from the sources from
// everything reaching the destination, i.e. raw and processed traffic can only
// meet at `n`.
inline bool check_nonoverlap(const Topology& t, NodeId n) {
  const NodeId sources[] = {t.s1(), t.s2()};
  const NodeId sink[] = {t.destination()};
  auto raw = detail::reach_avoiding(t, sources, n);
  auto processed = detail::reach_avoiding(t, sink, n);
  for (std::size_t v = 0; v < t.node_count(); ++v)
    if (raw[v] && processed[v]) return false;
  return true;
}

// Edge sets of the raw side (sources to `n`) and processed side (`n` to the
// destination). On a non-overlapping topology each class is confined to its side.
struct LobeSplit {
  std::vector<bool> raw_edge;
  std::vector<bool> processed_edge;
};

inline LobeSplit split_lobes(const Topology& t, NodeId n) {
  const NodeId sources[] = {t.s1(), t.s2()};
  const NodeId sink[] = {t.destination()};
  auto raw = detail::reach_avoiding(t, sources, n);
  auto processed = detail::reach_avoiding(t, sink, n);
  raw[n] = processed[n] = true;
  LobeSplit out;
  for (const auto& e : t.edges()) {
    out.raw_edge.push_back(raw[e.a] && raw[e.b]);
    out.processed_edge.push_back(processed[e.a] && processed[e.b]);
  }
  return out;
}

}  // namespace incomp
