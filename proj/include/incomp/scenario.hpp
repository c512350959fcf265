#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "incomp/arrivals.hpp"
#include "incomp/errors.hpp"
#include "incomp/policies.hpp"
#include "incomp/topology.hpp"

namespace incomp {

struct Scenario {
  Topology topology;
  ArrivalSpec arrival;
  PolicySpec policy;
  std::uint64_t horizon = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

namespace detail {

using nlohmann::json;

inline const json& require(const json& obj, const char* key, const std::string& where = "") {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError("missing key '" + where + key + "'");
  return *it;
}

inline void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                           const std::string& where = "") {
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.contains(it.key())) throw ParseError("unknown key '" + where + it.key() + "'");
}

inline std::int64_t as_int(const json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ParseError("key '" + key + "' must be an integer");
  return v.get<std::int64_t>();
}

inline std::uint64_t as_uint(const json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  const auto i = as_int(v, key);
  if (i < 0) throw ParseError("key '" + key + "' must be non-negative");
  return static_cast<std::uint64_t>(i);
}

inline double as_real(const json& v, const std::string& key) {
  if (!v.is_number()) throw ParseError("key '" + key + "' must be a number");
  return v.get<double>();
}

inline std::vector<std::int64_t> as_tuple(const json& v, std::size_t n, const std::string& key) {
  if (!v.is_array() || v.size() != n)
    throw ParseError("key '" + key + "' entries must be arrays of " + std::to_string(n) + " integers");
  std::vector<std::int64_t> out;
  for (const auto& x : v) out.push_back(as_int(x, key));
  return out;
}

inline NodeId as_node(std::int64_t v, const std::string& key) {
  if (v < 0) throw ParseError("key '" + key + "' has a negative node id");
  return static_cast<NodeId>(v);
}

}  // namespace detail

inline Topology parse_topology(const nlohmann::json& doc) {
  using namespace detail;
  const auto node_count = as_int(require(doc, "nodes"), "nodes");
  if (node_count < 0) throw ParseError("key 'nodes' must be non-negative");

  const auto& edges_json = require(doc, "edges");
  if (!edges_json.is_array()) throw ParseError("key 'edges' must be a list");
  std::vector<Edge> edges;
  for (const auto& e : edges_json) {
    auto v = as_tuple(e, 3, "edges");
    edges.push_back({as_node(v[0], "edges"), as_node(v[1], "edges"), v[2]});
  }

  auto src = as_tuple(require(doc, "sources"), 2, "sources");
  const auto dest = as_int(require(doc, "destination"), "destination");

  const auto& comp_json = require(doc, "computation_nodes");
  if (!comp_json.is_array()) throw ParseError("key 'computation_nodes' must be a list");
  std::vector<ComputationNode> comp;
  for (const auto& c : comp_json) {
    auto v = as_tuple(c, 2, "computation_nodes");
    comp.push_back({as_node(v[0], "computation_nodes"), v[1]});
  }
  return Topology(static_cast<std::size_t>(node_count), std::move(edges), as_node(src[0], "sources"),
                  as_node(src[1], "sources"), as_node(dest, "destination"), std::move(comp));
}

inline ArrivalSpec parse_arrival(const nlohmann::json& a) {
  using namespace detail;
  if (!a.is_object()) throw ParseError("key 'arrival' must be an object");
  reject_unknown(a, {"kind", "rate", "batch", "cap"}, "arrival.");
  ArrivalSpec spec;
  const auto& kind = require(a, "kind", "arrival.");
  if (!kind.is_string()) throw ParseError("key 'arrival.kind' must be a string");
  const auto k = kind.get<std::string>();
  if (k == "poisson") spec.kind = ArrivalKind::poisson;
  else if (k == "bernoulli_batch") spec.kind = ArrivalKind::bernoulli_batch;
  else if (k == "deterministic") spec.kind = ArrivalKind::deterministic;
  else throw ParseError("key 'arrival.kind' has unknown value '" + k + "'");
  spec.rate = as_real(require(a, "rate", "arrival."), "arrival.rate");
  if (a.contains("batch")) spec.batch = as_int(a["batch"], "arrival.batch");
  else if (spec.kind == ArrivalKind::bernoulli_batch) throw ParseError("missing key 'arrival.batch'");
  if (a.contains("cap")) spec.cap = as_int(a["cap"], "arrival.cap");
  spec.validate();
  return spec;
}

inline PolicySpec parse_policy(const nlohmann::json& p) {
  using namespace detail;
  if (!p.is_object()) throw ParseError("key 'policy' must be an object");
  reject_unknown(p, {"name", "eps_b", "threshold", "threshold_test_mode"}, "policy.");
  PolicySpec spec;
  const auto& name = require(p, "name", "policy.");
  if (!name.is_string()) throw ParseError("key 'policy.name' must be a string");
  auto parsed = policy_from_string(name.get<std::string>());
  if (!parsed) throw ParseError("key 'policy.name' has unknown value '" + name.get<std::string>() + "'");
  spec.name = *parsed;
  if (p.contains("eps_b")) spec.eps_b = as_real(p["eps_b"], "policy.eps_b");
  if (p.contains("threshold")) spec.threshold = as_int(p["threshold"], "policy.threshold");
  if (p.contains("threshold_test_mode")) {
    if (!p["threshold_test_mode"].is_boolean()) throw ParseError("key 'policy.threshold_test_mode' must be a boolean");
    spec.threshold_test_mode = p["threshold_test_mode"].get<bool>();
  }
  return spec;
}

inline Scenario parse_scenario_json(const nlohmann::json& doc) {
  using namespace detail;
  if (!doc.is_object()) throw ParseError("scenario document must be an object");
  reject_unknown(doc, {"nodes", "edges", "sources", "destination", "computation_nodes", "arrival", "policy",
                       "horizon", "seed"});
  Scenario s;
  s.topology = parse_topology(doc);
  s.arrival = parse_arrival(require(doc, "arrival"));
  s.policy = parse_policy(require(doc, "policy"));
  s.horizon = as_uint(require(doc, "horizon"), "horizon");
  s.seed = as_uint(require(doc, "seed"), "seed");
  validate_policy(s.policy, s.topology);
  return s;
}

inline Scenario parse_scenario(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed scenario document: ") + e.what());
  }
  return parse_scenario_json(doc);
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

inline nlohmann::json topology_to_json(const Topology& t) {
  nlohmann::json doc;
  doc["nodes"] = t.node_count();
  doc["edges"] = nlohmann::json::array();
  for (const auto& e : t.edges()) doc["edges"].push_back({e.a, e.b, e.capacity});
  doc["sources"] = {t.s1(), t.s2()};
  doc["destination"] = t.destination();
  doc["computation_nodes"] = nlohmann::json::array();
  for (const auto& c : t.computation_nodes()) doc["computation_nodes"].push_back({c.node, c.capacity});
  return doc;
}

inline nlohmann::json scenario_to_json(const Scenario& s) {
  auto doc = topology_to_json(s.topology);
  nlohmann::json a{{"kind", to_string(s.arrival.kind)}, {"rate", s.arrival.rate}};
  if (s.arrival.kind == ArrivalKind::bernoulli_batch) a["batch"] = s.arrival.batch;
  if (s.arrival.cap > 0) a["cap"] = s.arrival.cap;
  doc["arrival"] = a;
  nlohmann::json p{{"name", to_string(s.policy.name)}};
  if (s.policy.eps_b) p["eps_b"] = *s.policy.eps_b;
  if (s.policy.threshold) p["threshold"] = *s.policy.threshold;
  if (s.policy.threshold_test_mode) p["threshold_test_mode"] = true;
  doc["policy"] = p;
  doc["horizon"] = s.horizon;
  doc["seed"] = s.seed;
  return doc;
}

inline std::string serialize_scenario(const Scenario& s) { return scenario_to_json(s).dump(2); }

}  // namespace incomp
