#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "incomp/errors.hpp"
#include "incomp/topology.hpp"

namespace incomp {

// Query identifier shared by the two raw packets of a query and by the
// processed packet they produce. Dummy packets draw from a disjoint range.
struct Tag {
  std::uint64_t value = 0;
  friend auto operator<=>(const Tag&, const Tag&) = default;
};

inline constexpr std::uint64_t kDummyTagBit = std::uint64_t{1} << 63;

enum class Kind : std::uint8_t { processed = 0, raw1 = 1, raw2 = 2 };

inline constexpr int kind_index(Kind k) { return static_cast<int>(k); }
inline constexpr Kind raw_kind(int source) { return source == 1 ? Kind::raw1 : Kind::raw2; }

// (i, n): `comp` is the position of n in the topology's computation node list.
struct PacketClass {
  Kind kind = Kind::processed;
  std::size_t comp = 0;
  friend bool operator==(const PacketClass&, const PacketClass&) = default;
};

struct Packet {
  Tag tag;
  PacketClass cls;
  bool dummy = false;
  std::uint64_t birth_slot = 0;
};

struct Transmission {
  std::size_t edge = 0;
  NodeId from = 0;
  NodeId to = 0;
  PacketClass cls;
  std::int64_t packets = 0;
};

enum class PushMode : std::uint8_t {
  result_queue,  // F packets leave Y_n, deficit filled with dummies
  direct,        // Y_n bypassed, combined packets go straight to Q_n^(0,n)
};

struct Push {
  PushMode mode = PushMode::direct;
  std::int64_t count = 0;
};

struct Admission {
  std::int64_t count = 0;
  std::size_t target = 0;
};

struct SlotDecision {
  std::vector<Transmission> routing;
  std::vector<std::vector<Tag>> combine;  // per computation node, the tag set Z_n
  std::vector<Push> push;                 // per computation node
  Admission admission;
};

struct SlotOutcome {
  std::vector<std::int64_t> combined;   // Z_n actually executed
  std::vector<std::int64_t> injected;   // packets entering Q_n^(0,n), dummies included
  std::vector<std::int64_t> dummies;    // dummies created at n
  std::int64_t transmitted = 0;
  std::int64_t null_transmissions = 0;
  std::int64_t delivered = 0;
  std::int64_t dummy_dropped = 0;
};

class NetworkState {
 public:
  struct ComputeQueues {
    std::map<Tag, Packet> x[2];  // X_n^(1), X_n^(2) keyed by tag
    std::set<Tag> matched;       // tags present in both
    std::deque<Packet> y;        // Y_n
    std::int64_t h = 0;          // H_n
    std::int64_t assigned = 0;   // arrivals assigned in the last admission
  };

  NetworkState() = default;

  explicit NetworkState(const Topology& topo)
      : topo_(&topo),
        classes_(3 * topo.computation_count()),
        q_(topo.node_count() * classes_),
        comp_(topo.computation_count()) {}

  const Topology& topology() const { return *topo_; }
  std::size_t class_count() const { return classes_; }
  std::size_t class_index(PacketClass c) const {
    return static_cast<std::size_t>(kind_index(c.kind)) * topo_->computation_count() + c.comp;
  }
  PacketClass class_at(std::size_t idx) const {
    const std::size_t k = topo_->computation_count();
    return {static_cast<Kind>(idx / k), idx % k};
  }

  const std::deque<Packet>& queue(NodeId node, PacketClass c) const {
    return q_[node * classes_ + class_index(c)];
  }
  std::deque<Packet>& queue(NodeId node, PacketClass c) { return q_[node * classes_ + class_index(c)]; }

  // Q_k^(i,n) with both queue-length conventions applied.
  std::int64_t q_len(NodeId node, PacketClass c) const {
    if (c.kind == Kind::processed && node == topo_->destination()) return 0;
    if (c.kind != Kind::processed && node == topo_->computation_nodes()[c.comp].node) return 0;
    return static_cast<std::int64_t>(queue(node, c).size());
  }
  std::int64_t q_len_index(NodeId node, std::size_t class_idx) const {
    return q_len(node, class_at(class_idx));
  }

  const ComputeQueues& compute(std::size_t c) const { return comp_[c]; }
  ComputeQueues& compute(std::size_t c) { return comp_[c]; }
  std::int64_t x_len(std::size_t c, int source) const {
    return static_cast<std::int64_t>(comp_[c].x[source - 1].size());
  }
  std::int64_t y_len(std::size_t c) const { return static_cast<std::int64_t>(comp_[c].y.size()); }
  std::int64_t h(std::size_t c) const { return comp_[c].h; }

  std::uint64_t slot() const { return slot_; }
  std::int64_t admitted() const { return admitted_; }
  std::int64_t delivered() const { return delivered_; }
  std::int64_t dummy_dropped() const { return dummy_dropped_; }

  std::int64_t q_total() const {
    std::int64_t s = 0;
    for (const auto& dq : q_) s += static_cast<std::int64_t>(dq.size());
    return s;
  }
  std::int64_t x_total() const {
    std::int64_t s = 0;
    for (const auto& c : comp_) s += static_cast<std::int64_t>(c.x[0].size() + c.x[1].size());
    return s;
  }
  std::int64_t y_total() const {
    std::int64_t s = 0;
    for (const auto& c : comp_) s += static_cast<std::int64_t>(c.y.size());
    return s;
  }
  std::int64_t h_total() const {
    std::int64_t s = 0;
    for (const auto& c : comp_) s += c.h;
    return s;
  }
  std::int64_t largest_queue() const {
    std::int64_t m = 0;
    for (const auto& dq : q_) m = std::max<std::int64_t>(m, static_cast<std::int64_t>(dq.size()));
    for (const auto& c : comp_) {
      m = std::max<std::int64_t>(m, static_cast<std::int64_t>(std::max(c.x[0].size(), c.x[1].size())));
      m = std::max<std::int64_t>(m, static_cast<std::int64_t>(c.y.size()));
      m = std::max(m, c.h);
    }
    return m;
  }

  // 64-bit FNV-1a over every queue length and the delivery counters.
  std::uint64_t digest() const {
    std::uint64_t hsh = 0xcbf29ce484222325ULL;
    auto mix = [&](std::uint64_t v) {
      for (int b = 0; b < 8; ++b) {
        hsh ^= (v >> (8 * b)) & 0xff;
        hsh *= 0x100000001b3ULL;
      }
    };
    for (const auto& dq : q_) mix(dq.size());
    for (const auto& c : comp_) {
      mix(c.x[0].size());
      mix(c.x[1].size());
      mix(c.y.size());
      mix(static_cast<std::uint64_t>(c.h));
    }
    mix(slot_);
    mix(static_cast<std::uint64_t>(delivered_));
    mix(static_cast<std::uint64_t>(dummy_dropped_));
    return hsh;
  }

  // Places a packet that arrives at `node` at the end of a slot, applying the
  // X-queue and destination conventions.
  void enqueue_arrival(NodeId node, const Packet& p, SlotOutcome* out = nullptr) {
    const auto& cn = topo_->computation_nodes()[p.cls.comp];
    if (p.cls.kind == Kind::processed) {
      if (node == topo_->destination()) {
        if (p.dummy) {
          ++dummy_dropped_;
          if (out) ++out->dummy_dropped;
        } else {
          ++delivered_;
          if (out) ++out->delivered;
        }
        return;
      }
    } else if (node == cn.node) {
      auto& cq = comp_[p.cls.comp];
      const int side = p.cls.kind == Kind::raw1 ? 0 : 1;
      cq.x[side].emplace(p.tag, p);
      if (cq.x[1 - side].contains(p.tag)) cq.matched.insert(p.tag);
      return;
    }
    queue(node, p.cls).push_back(p);
  }

  // Issues `count` fresh tags and enqueues one raw packet per tag at each
  // source, bound for computation node `target`.
  std::vector<Tag> admit_packets(std::int64_t count, std::size_t target) {
    std::vector<Tag> tags;
    tags.reserve(static_cast<std::size_t>(std::max<std::int64_t>(count, 0)));
    for (std::int64_t k = 0; k < count; ++k) {
      Tag t{next_tag_++};
      tags.push_back(t);
      enqueue_arrival(topo_->s1(), Packet{t, {Kind::raw1, target}, false, slot_});
      enqueue_arrival(topo_->s2(), Packet{t, {Kind::raw2, target}, false, slot_});
    }
    admitted_ += count;
    for (std::size_t c = 0; c < comp_.size(); ++c) comp_[c].assigned = (c == target) ? count : 0;
    return tags;
  }

  Tag fresh_dummy_tag() { return Tag{kDummyTagBit | next_dummy_++}; }
  void advance_slot() { ++slot_; }

 private:
  const Topology* topo_ = nullptr;
  std::size_t classes_ = 0;
  std::vector<std::deque<Packet>> q_;
  std::vector<ComputeQueues> comp_;
  std::uint64_t slot_ = 0;
  std::uint64_t next_tag_ = 0;
  std::uint64_t next_dummy_ = 0;
  std::int64_t admitted_ = 0;
  std::int64_t delivered_ = 0;
  std::int64_t dummy_dropped_ = 0;
};

// P_n: number of tags present in both computation queues of node `c`.
inline std::int64_t matched_pairs(const NetworkState& s, std::size_t c) {
  return static_cast<std::int64_t>(s.compute(c).matched.size());
}

namespace detail {

inline void check_decision(const NetworkState& s, const SlotDecision& dec) {
  const Topology& t = s.topology();
  std::vector<std::int64_t> load(t.edges().size(), 0);
  for (const auto& tr : dec.routing) {
    if (tr.edge >= t.edges().size()) throw ConstraintViolation("transmission on unknown edge");
    const Edge& e = t.edges()[tr.edge];
    const bool endpoints = (tr.from == e.a && tr.to == e.b) || (tr.from == e.b && tr.to == e.a);
    if (!endpoints) throw ConstraintViolation("transmission endpoints do not match edge");
    if (tr.packets < 0) throw ConstraintViolation("negative transmission count");
    if (tr.cls.comp >= t.computation_count()) throw ConstraintViolation("unknown packet class");
    load[tr.edge] += tr.packets;
  }
  for (std::size_t e = 0; e < load.size(); ++e) {
    if (load[e] > t.edges()[e].capacity)
      throw ConstraintViolation("link capacity exceeded on edge (" + std::to_string(t.edges()[e].a) +
                                "," + std::to_string(t.edges()[e].b) + "): " +
                                std::to_string(load[e]) + " > " +
                                std::to_string(t.edges()[e].capacity));
  }
  if (!dec.combine.empty() && dec.combine.size() != t.computation_count())
    throw ConstraintViolation("combine list does not match computation nodes");
  for (std::size_t c = 0; c < dec.combine.size(); ++c) {
    const auto& tags = dec.combine[c];
    const auto z = static_cast<std::int64_t>(tags.size());
    auto where = [&] { return "computation node " + std::to_string(t.computation_nodes()[c].node); };
    if (z > t.computation_nodes()[c].capacity)
      throw ConstraintViolation("computation capacity exceeded at " + where());
    if (z > s.x_len(c, 1) || z > s.x_len(c, 2))
      throw ConstraintViolation("more combinations than queued raw packets at " + where());
    std::set<Tag> distinct;
    for (Tag tag : tags) {
      if (!s.compute(c).matched.contains(tag))
        throw ConstraintViolation("tag " + std::to_string(tag.value) + " not present in both queues at " + where());
      if (!distinct.insert(tag).second)
        throw ConstraintViolation("tag combined twice at " + where());
    }
  }
  if (!dec.push.empty() && dec.push.size() != t.computation_count())
    throw ConstraintViolation("push list does not match computation nodes");
  for (const auto& p : dec.push)
    if (p.count < 0) throw ConstraintViolation("negative push count");
  if (dec.admission.count < 0) throw ConstraintViolation("negative admission");
  if (dec.admission.count > 0 && dec.admission.target >= t.computation_count())
    throw ConstraintViolation("admission to unknown computation node");
}

}  // namespace detail

// Executes one slot. Every service decision acts on the start-of-slot state;
// all arrivals (transmitted, pushed, admitted) land at the end of the slot.
inline SlotOutcome apply_decision(NetworkState& s, const SlotDecision& dec, bool validate = true) {
  if (validate) detail::check_decision(s, dec);
  const Topology& t = s.topology();
  const std::size_t k = t.computation_count();
  SlotOutcome out;
  out.combined.assign(k, 0);
  out.injected.assign(k, 0);
  out.dummies.assign(k, 0);

  struct Arrival {
    NodeId node;
    Packet packet;
  };
  std::vector<Arrival> incoming;

  for (const auto& tr : dec.routing) {
    auto& src = s.queue(tr.from, tr.cls);
    const bool blocked = (tr.cls.kind == Kind::processed && tr.from == t.destination()) ||
                         (tr.cls.kind != Kind::processed && tr.from == t.computation_nodes()[tr.cls.comp].node);
    const std::int64_t avail = blocked ? 0 : static_cast<std::int64_t>(src.size());
    const std::int64_t moved = std::min(tr.packets, avail);
    for (std::int64_t m = 0; m < moved; ++m) {
      incoming.push_back({tr.to, src.front()});
      src.pop_front();
    }
    out.transmitted += moved;
    out.null_transmissions += tr.packets - moved;
  }

  std::vector<std::vector<Packet>> produced(k);
  for (std::size_t c = 0; c < dec.combine.size(); ++c) {
    auto& cq = s.compute(c);
    for (Tag tag : dec.combine[c]) {
      cq.x[0].erase(tag);
      cq.x[1].erase(tag);
      cq.matched.erase(tag);
      produced[c].push_back(Packet{tag, {Kind::processed, c}, false, s.slot()});
    }
    out.combined[c] = static_cast<std::int64_t>(dec.combine[c].size());
  }

  for (std::size_t c = 0; c < k; ++c) {
    const Push push = c < dec.push.size() ? dec.push[c] : Push{};
    const NodeId n = t.computation_nodes()[c].node;
    auto& cq = s.compute(c);
    if (push.mode == PushMode::direct) {
      for (const auto& p : produced[c]) incoming.push_back({n, p});
      out.injected[c] = static_cast<std::int64_t>(produced[c].size());
      continue;
    }
    const std::int64_t useful = std::min<std::int64_t>(push.count, static_cast<std::int64_t>(cq.y.size()));
    for (std::int64_t m = 0; m < useful; ++m) {
      incoming.push_back({n, cq.y.front()});
      cq.y.pop_front();
    }
    for (std::int64_t m = useful; m < push.count; ++m)
      incoming.push_back({n, Packet{s.fresh_dummy_tag(), {Kind::processed, c}, true, s.slot()}});
    out.injected[c] = push.count;
    out.dummies[c] = push.count - useful;
    for (const auto& p : produced[c]) cq.y.push_back(p);
  }

  for (std::size_t c = 0; c < k; ++c) {
    auto& cq = s.compute(c);
    const std::int64_t assigned =
        (dec.admission.count > 0 && dec.admission.target == c) ? dec.admission.count : 0;
    cq.h = std::max<std::int64_t>(0, cq.h + assigned - t.computation_nodes()[c].capacity);
  }

  // (birth, tag, kind) is unique among packets in flight, so a plain sort is deterministic.
  std::sort(incoming.begin(), incoming.end(), [](const Arrival& a, const Arrival& b) {
    if (a.packet.birth_slot != b.packet.birth_slot) return a.packet.birth_slot < b.packet.birth_slot;
    if (a.packet.tag != b.packet.tag) return a.packet.tag < b.packet.tag;
    return a.packet.cls.kind < b.packet.cls.kind;
  });
  for (const auto& a : incoming) s.enqueue_arrival(a.node, a.packet, &out);

  if (k > 0) s.admit_packets(dec.admission.count, dec.admission.target);
  s.advance_slot();
  return out;
}

// Raw and processed packet bookkeeping: every admitted query is accounted for
// either by its two raw packets or by one non-dummy processed packet.
inline bool conservation_holds(const NetworkState& s) {
  const Topology& t = s.topology();
  std::int64_t raw = 0;
  std::int64_t processed = s.delivered();
  for (NodeId v = 0; v < t.node_count(); ++v) {
    for (std::size_t ci = 0; ci < s.class_count(); ++ci) {
      const PacketClass cls = s.class_at(ci);
      const auto& dq = s.queue(v, cls);
      if (cls.kind == Kind::processed) {
        for (const auto& p : dq) processed += p.dummy ? 0 : 1;
      } else {
        raw += static_cast<std::int64_t>(dq.size());
      }
    }
  }
  for (std::size_t c = 0; c < t.computation_count(); ++c) {
    raw += s.x_len(c, 1) + s.x_len(c, 2);
    for (const auto& p : s.compute(c).y) processed += p.dummy ? 0 : 1;
  }
  return 2 * s.admitted() == raw + 2 * processed;
}

}  // namespace incomp
