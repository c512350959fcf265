#include <gtest/gtest.h>

#include "incomp/scenario.hpp"
#include "incomp/topology.hpp"
#include "support.hpp"

using namespace incomp;

TEST(Topology, GridDocumentParses) {
  const Scenario s = load_scenario(fixtures::scenario_path("grid_c2.json"));
  EXPECT_EQ(s.topology.node_count(), 16u);
  EXPECT_EQ(s.topology.edges().size(), 24u);
  EXPECT_EQ(s.topology.computation_count(), 4u);
  for (const auto& e : s.topology.edges()) EXPECT_EQ(e.capacity, 5);
  for (const auto& c : s.topology.computation_nodes()) EXPECT_EQ(c.capacity, 2);
}

TEST(Topology, EmptyEdgeListIsStructurallyValid) {
  EXPECT_NO_THROW(Topology(3, {}, 0, 1, 2, {{2, 1}}));
}

TEST(Topology, DuplicateEdgeRejected) {
  try {
    Topology(3, {{0, 1, 1}, {0, 1, 2}}, 0, 1, 2, {{2, 1}});
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("duplicate edge"), std::string::npos);
  }
  EXPECT_THROW(Topology(3, {{0, 1, 1}, {1, 0, 2}}, 0, 1, 2, {{2, 1}}), ParseError);
}

TEST(Topology, StructuralChecks) {
  EXPECT_THROW(Topology(3, {{0, 0, 1}}, 0, 1, 2, {}), ParseError);
  EXPECT_THROW(Topology(3, {{0, 5, 1}}, 0, 1, 2, {}), ParseError);
  EXPECT_THROW(Topology(3, {{0, 1, -1}}, 0, 1, 2, {}), ParseError);
  EXPECT_THROW(Topology(3, {{0, 1, 1}}, 0, 0, 2, {}), ParseError);
  EXPECT_THROW(Topology(3, {{0, 1, 1}}, 0, 1, 2, {{1, 1}, {1, 2}}), ParseError);
  EXPECT_THROW(Topology(3, {{0, 1, 1}}, 0, 1, 2, {{1, -1}}), ParseError);
}

TEST(Topology, ComputationIndex) {
  const Topology t = fixtures::grid(2);
  EXPECT_EQ(t.computation_index(6), 1u);
  EXPECT_FALSE(t.computation_index(7).has_value());
  EXPECT_FALSE(t.computation_index(99).has_value());
}

TEST(NonOverlap, LobesAreSeparated) { EXPECT_TRUE(check_nonoverlap(fixtures::lobes(), 4)); }

TEST(NonOverlap, TriangleComputingAtDestination) { EXPECT_TRUE(check_nonoverlap(fixtures::triangle(2), 2)); }

TEST(NonOverlap, TriangleComputingAtSource) { EXPECT_FALSE(check_nonoverlap(fixtures::triangle(1), 1)); }

TEST(NonOverlap, GridOverlaps) { EXPECT_FALSE(check_nonoverlap(fixtures::grid(2), 6)); }

TEST(NonOverlap, LobeSplitConfinesClasses) {
  const Topology t = fixtures::lobes();
  const LobeSplit s = split_lobes(t, 4);
  for (std::size_t e = 0; e < t.edges().size(); ++e) {
    const auto& edge = t.edges()[e];
    const bool raw_side = edge.a <= 4 && edge.b <= 4;
    EXPECT_EQ(s.raw_edge[e], raw_side) << e;
    EXPECT_EQ(s.processed_edge[e], !raw_side) << e;
  }
}
