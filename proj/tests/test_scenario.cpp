#include <gtest/gtest.h>

#include <random>

#include "incomp/scenario.hpp"
#include "support.hpp"

using namespace incomp;

namespace {

std::string minimal(const std::string& policy = R"({"name": "pi3", "eps_b": 0.01})") {
  return R"({"nodes": 3, "edges": [[0, 1, 1], [0, 2, 1], [1, 2, 1]], "sources": [0, 1],
             "destination": 2, "computation_nodes": [[2, 10]],
             "arrival": {"kind": "poisson", "rate": 0.5}, "policy": )" +
         policy + R"(, "horizon": 100, "seed": 4})";
}

std::string error_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Scenario, ParsesMinimalDocument) {
  const Scenario s = parse_scenario(minimal());
  EXPECT_EQ(s.topology.node_count(), 3u);
  EXPECT_EQ(s.policy.name, PolicyName::pi3);
  EXPECT_DOUBLE_EQ(*s.policy.eps_b, 0.01);
  EXPECT_EQ(s.horizon, 100u);
  EXPECT_EQ(s.seed, 4u);
}

TEST(Scenario, DiagnosticsNameTheKey) {
  EXPECT_NE(error_of("{").find("malformed"), std::string::npos);
  EXPECT_NE(error_of(R"({"nodes": 3})").find("'edges'"), std::string::npos);
  std::string extra = minimal();
  extra.insert(1, R"("bogus": 1, )");
  EXPECT_NE(error_of(extra).find("'bogus'"), std::string::npos);
  EXPECT_NE(error_of(minimal(R"({"name": "pi9"})")).find("policy.name"), std::string::npos);
  EXPECT_NE(error_of(minimal(R"({"name": "pi2"})")).find("eps_b"), std::string::npos);
  EXPECT_NE(error_of(minimal(R"({"name": "pi2", "eps_b": 1.5})")).find("eps_b"), std::string::npos);
  EXPECT_NE(error_of(minimal(R"({"name": "pi1p"})")).find("threshold"), std::string::npos);
}

TEST(Scenario, PolicyTopologyCompatibility) {
  // pi1 needs a non-overlapping topology: computing at a source overlaps.
  std::string text = minimal(R"({"name": "pi1"})");
  EXPECT_NO_THROW(parse_scenario(text));
  const auto at = text.find("[[2, 10]]");
  text.replace(at, 9, "[[1, 10]]");
  EXPECT_THROW(parse_scenario(text), ParseError);
}

TEST(Scenario, RoundTripIsIdentity) {
  for (const char* name : {"grid_c2.json", "grid_c3.json", "lobes.json", "triangle.json"}) {
    const Scenario s = load_scenario(fixtures::scenario_path(name));
    EXPECT_EQ(parse_scenario(serialize_scenario(s)), s) << name;
  }
  std::mt19937_64 g(3);
  for (int k = 0; k < 200; ++k) {
    Scenario s;
    s.topology = fixtures::random_topology(g, 6, 10, 3);
    const auto kind = static_cast<ArrivalKind>(k % 3);
    s.arrival = {kind, 0.125 * (k % 7), kind == ArrivalKind::bernoulli_batch ? 1 + k % 2 : 1, k % 4 == 0 ? 50 : 0};
    s.policy = fixtures::policy(k % 2 ? PolicyName::pi3 : PolicyName::pi3bar, 0.01 * (1 + k % 9));
    s.policy.threshold = k % 3 == 0 ? std::optional<std::int64_t>(k) : std::nullopt;
    s.horizon = static_cast<std::uint64_t>(k) * 17;
    s.seed = g();
    EXPECT_EQ(parse_scenario(serialize_scenario(s)), s) << serialize_scenario(s);
  }
}
