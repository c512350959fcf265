#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "incomp/errors.hpp"
#include "incomp/queueing.hpp"
#include "incomp/rng.hpp"
#include "incomp/routing.hpp"
#include "incomp/topology.hpp"

namespace incomp {

enum class PolicyName { pi1, pi1p, pi2, pi2p, pi3, pi3bar };

inline std::string to_string(PolicyName p) {
  switch (p) {
    case PolicyName::pi1: return "pi1";
    case PolicyName::pi1p: return "pi1p";
    case PolicyName::pi2: return "pi2";
    case PolicyName::pi2p: return "pi2p";
    case PolicyName::pi3: return "pi3";
    case PolicyName::pi3bar: return "pi3bar";
  }
  return "pi1";
}

inline std::optional<PolicyName> policy_from_string(const std::string& s) {
  for (auto p : {PolicyName::pi1, PolicyName::pi1p, PolicyName::pi2, PolicyName::pi2p, PolicyName::pi3,
                 PolicyName::pi3bar})
    if (to_string(p) == s) return p;
  return std::nullopt;
}

struct PolicySpec {
  PolicyName name = PolicyName::pi3;
  std::optional<double> eps_b;
  std::optional<std::int64_t> threshold;
  // pi3 only: gate computations by the threshold rule at every node.
  bool threshold_test_mode = false;

  bool single_node() const {
    return name == PolicyName::pi1 || name == PolicyName::pi1p || name == PolicyName::pi2 ||
           name == PolicyName::pi2p;
  }
  bool thresholded() const {
    return name == PolicyName::pi1p || name == PolicyName::pi2p ||
           (name == PolicyName::pi3 && threshold_test_mode);
  }
  bool uses_result_queue() const {
    return name == PolicyName::pi2 || name == PolicyName::pi2p || name == PolicyName::pi3;
  }
  bool load_balances() const { return name == PolicyName::pi3 || name == PolicyName::pi3bar; }
  // Policies defined on non-overlapping topologies keep raw and processed traffic apart.
  bool separates_lobes() const { return name == PolicyName::pi1 || name == PolicyName::pi1p; }
  double eps() const { return eps_b.value_or(0.0); }

  friend bool operator==(const PolicySpec&, const PolicySpec&) = default;
};

// Policy / topology compatibility.
inline void validate_policy(const PolicySpec& p, const Topology& t) {
  if (p.eps_b && !(*p.eps_b > 0.0 && *p.eps_b < 1.0)) throw ParseError("policy.eps_b must lie in (0,1)");
  if (p.threshold && *p.threshold < 0) throw ParseError("policy.threshold must be >= 0");
  const bool needs_eps = p.name == PolicyName::pi2 || p.name == PolicyName::pi2p || p.name == PolicyName::pi3;
  if (needs_eps && !p.eps_b) throw ParseError("policy.eps_b is required for " + to_string(p.name));
  const bool needs_threshold = p.name == PolicyName::pi1p || p.name == PolicyName::pi2p ||
                               (p.name == PolicyName::pi3 && p.threshold_test_mode);
  if (needs_threshold && !p.threshold) throw ParseError("policy.threshold is required for " + to_string(p.name));
  if (p.threshold_test_mode && p.name != PolicyName::pi3)
    throw ParseError("policy.threshold_test_mode is only valid for pi3");
  if (t.computation_count() == 0) throw ParseError("at least one computation node is required");
  if (p.single_node() && t.computation_count() != 1)
    throw ParseError(to_string(p.name) + " requires exactly one computation node");
  if ((p.name == PolicyName::pi1 || p.name == PolicyName::pi1p) &&
      !check_nonoverlap(t, t.computation_nodes()[0].node))
    throw ParseError(to_string(p.name) + " requires a non-overlapping topology");
}

// min(P_n, C_n) matched pairs, oldest tags first.
inline std::vector<Tag> compute_pi1(const NetworkState& s, std::size_t c, std::int64_t capacity) {
  std::vector<Tag> out;
  for (Tag t : s.compute(c).matched) {
    if (static_cast<std::int64_t>(out.size()) >= capacity) break;
    out.push_back(t);
  }
  return out;
}

struct ThresholdComputation {
  std::vector<Tag> tags;
  std::int64_t shortfall = 0;  // C_n minus pairs actually available when the rule fired
};

// Z_n = C_n when X^(1) + X^(2) >= 2 C_n + threshold, else 0. If the rule fires
// with fewer than C_n matched pairs, all of them are combined and the deficit
// is reported.
inline ThresholdComputation compute_pi1_primed(const NetworkState& s, std::size_t c, std::int64_t capacity,
                                               std::int64_t threshold) {
  ThresholdComputation out;
  if (s.x_len(c, 1) + s.x_len(c, 2) < 2 * capacity + threshold) return out;
  out.tags = compute_pi1(s, c, capacity);
  out.shortfall = capacity - static_cast<std::int64_t>(out.tags.size());
  return out;
}

struct PushDraw {
  std::int64_t count = 0;
  bool bonus = false;  // B^(n)(t)
};

inline bool draw_push_bit(double eps_b, Generator& rng) {
  std::bernoulli_distribution b(eps_b);
  return b(rng);
}

inline std::int64_t push_count(std::int64_t assigned, bool bonus) { return assigned * (bonus ? 2 : 1); }

// F = A (1 + B), B ~ Bernoulli(eps_b) drawn from the node's dedicated stream.
inline PushDraw draw_push(std::int64_t assigned, double eps_b, Generator& rng) {
  const bool b = draw_push_bit(eps_b, rng);
  return {push_count(assigned, b), b};
}

inline double load_balance_score(const NetworkState& s, std::size_t c, double eps_b) {
  const Topology& t = s.topology();
  return (1.0 + eps_b) * static_cast<double>(s.q_len(t.computation_nodes()[c].node, {Kind::processed, c})) +
         static_cast<double>(s.q_len(t.s1(), {Kind::raw1, c})) +
         static_cast<double>(s.q_len(t.s2(), {Kind::raw2, c})) + static_cast<double>(s.h(c));
}

// Join-the-shortest-sum-of-queues; ties go to the lowest-indexed node.
inline std::size_t load_balance_pi3(const NetworkState& s, double eps_b) {
  std::size_t best = 0;
  double best_score = load_balance_score(s, 0, eps_b);
  for (std::size_t c = 1; c < s.topology().computation_count(); ++c) {
    const double sc = load_balance_score(s, c, eps_b);
    if (sc < best_score) {
      best = c;
      best_score = sc;
    }
  }
  return best;
}

struct PolicyStep {
  SlotDecision decision;
  std::int64_t shortfall = 0;
};

// One slot of the selected policy. `arrivals` is A(t); `bonus` holds B^(n)(t)
// per computation node and is ignored by policies that bypass Y_n. `lobes` is
// the split used by routing for policies that separate lobes.
inline PolicyStep step_policy(const PolicySpec& policy, const NetworkState& state, const Topology& topo,
                              std::int64_t arrivals, const std::vector<std::uint8_t>& bonus,
                              const LobeSplit* lobes = nullptr) {
  const std::size_t k = topo.computation_count();
  PolicyStep step;
  SlotDecision& dec = step.decision;

  const std::size_t target = policy.load_balances() ? load_balance_pi3(state, policy.eps()) : 0;
  dec.admission = {arrivals, target};
  std::optional<LobeSplit> own;
  if (policy.separates_lobes() && !lobes && k == 1) lobes = &own.emplace(split_lobes(topo, topo.computation_nodes()[0].node));
  dec.routing = to_transmissions(bp_route(state, topo, policy.separates_lobes() ? lobes : nullptr));

  dec.combine.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    const std::int64_t cap = topo.computation_nodes()[c].capacity;
    if (policy.thresholded()) {
      auto r = compute_pi1_primed(state, c, cap, *policy.threshold);
      dec.combine[c] = std::move(r.tags);
      step.shortfall += r.shortfall;
    } else {
      dec.combine[c] = compute_pi1(state, c, cap);
    }
  }

  dec.push.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    if (!policy.uses_result_queue()) {
      dec.push[c] = {PushMode::direct, 0};
      continue;
    }
    const std::int64_t assigned = c == target ? arrivals : 0;
    const bool b = c < bonus.size() && bonus[c] != 0;
    dec.push[c] = {PushMode::result_queue, push_count(assigned, b)};
  }
  return step;
}

}  // namespace incomp
