#include <gtest/gtest.h>

#include "incomp/arrivals.hpp"
#include "incomp/queueing.hpp"
#include "support.hpp"

using namespace incomp;

namespace {

// Single computation node 2 on the triangle.
struct Fixture {
  Topology topo = fixtures::triangle(2, 3);
  NetworkState state{topo};

  void put_raw(int source, std::uint64_t tag) {
    state.enqueue_arrival(2, Packet{Tag{tag}, {raw_kind(source), 0}, false, 0});
  }
};

SlotDecision empty_decision(std::size_t k) {
  SlotDecision d;
  d.combine.resize(k);
  d.push.resize(k);
  return d;
}

}  // namespace

TEST(MatchedPairs, PartialIntersection) {
  Fixture f;
  for (auto t : {1, 2, 3}) f.put_raw(1, t);
  for (auto t : {2, 3, 5}) f.put_raw(2, t);
  EXPECT_EQ(matched_pairs(f.state, 0), 2);
}

TEST(MatchedPairs, Empty) {
  Fixture f;
  EXPECT_EQ(matched_pairs(f.state, 0), 0);
}

TEST(MatchedPairs, OverlappingRanges) {
  Fixture f;
  for (int t = 1; t <= 10; ++t) f.put_raw(1, t);
  for (int t = 6; t <= 15; ++t) f.put_raw(2, t);
  EXPECT_EQ(matched_pairs(f.state, 0), 5);
}

TEST(ApplyDecision, EmptyDecisionOnlyAdvancesSlot) {
  Fixture f;
  const auto before = f.state.digest();
  apply_decision(f.state, empty_decision(1));
  EXPECT_EQ(f.state.slot(), 1u);
  EXPECT_EQ(f.state.q_total() + f.state.x_total() + f.state.y_total() + f.state.h_total(), 0);
  EXPECT_NE(before, f.state.digest());  // the slot counter is part of the digest
}

TEST(ApplyDecision, PushFillsWithDummies) {
  Fixture f;
  f.state.compute(0).y.push_back(Packet{Tag{9}, {Kind::processed, 0}, false, 0});
  // Computing at the destination: pushed packets are absorbed on arrival.
  SlotDecision d = empty_decision(1);
  d.push[0] = {PushMode::result_queue, 3};
  const SlotOutcome out = apply_decision(f.state, d);
  EXPECT_EQ(out.injected[0], 3);
  EXPECT_EQ(out.dummies[0], 2);
  EXPECT_EQ(f.state.y_len(0), 0);
  EXPECT_EQ(f.state.delivered(), 1);
  EXPECT_EQ(f.state.dummy_dropped(), 2);
}

TEST(ApplyDecision, PushIntoProcessedQueueAwayFromDestination) {
  Topology topo(3, {{0, 1, 1}, {1, 2, 1}}, 0, 2, 1, {{0, 2}});
  NetworkState s(topo);
  s.compute(0).y.push_back(Packet{Tag{4}, {Kind::processed, 0}, false, 0});
  SlotDecision d = empty_decision(1);
  d.push[0] = {PushMode::result_queue, 3};
  apply_decision(s, d);
  const auto& q = s.queue(0, {Kind::processed, 0});
  ASSERT_EQ(q.size(), 3u);
  EXPECT_EQ(std::count_if(q.begin(), q.end(), [](const Packet& p) { return p.dummy; }), 2);
  EXPECT_EQ(s.y_len(0), 0);
}

TEST(ApplyDecision, SinglePairCombinesIntoResultQueue) {
  Fixture f;
  f.put_raw(1, 7);
  f.put_raw(2, 7);
  SlotDecision d = empty_decision(1);
  d.combine[0] = {Tag{7}};
  d.push[0] = {PushMode::result_queue, 0};
  apply_decision(f.state, d);
  EXPECT_EQ(f.state.x_len(0, 1), 0);
  EXPECT_EQ(f.state.x_len(0, 2), 0);
  ASSERT_EQ(f.state.y_len(0), 1);
  EXPECT_EQ(f.state.compute(0).y.front().tag, Tag{7});
}

TEST(ApplyDecision, ShortQueueGivesNullTransmissions) {
  Topology topo(3, {{0, 1, 5}, {1, 2, 5}}, 0, 1, 2, {{2, 10}});
  NetworkState s(topo);
  for (std::uint64_t t = 0; t < 3; ++t) s.queue(0, {Kind::raw1, 0}).push_back(Packet{Tag{t}, {Kind::raw1, 0}, false, 0});
  SlotDecision d = empty_decision(1);
  d.routing.push_back({0, 0, 1, {Kind::raw1, 0}, 5});
  const SlotOutcome out = apply_decision(s, d);
  EXPECT_EQ(out.transmitted, 3);
  EXPECT_EQ(out.null_transmissions, 2);
  EXPECT_EQ(s.q_len(1, {Kind::raw1, 0}), 3);
  EXPECT_EQ(s.q_len(0, {Kind::raw1, 0}), 0);
}

TEST(ApplyDecision, RejectsInfeasibleDecisions) {
  Fixture f;
  f.put_raw(1, 1);
  f.put_raw(2, 1);
  SlotDecision over = empty_decision(1);
  over.routing.push_back({0, 0, 1, {Kind::raw1, 0}, 2});  // R = 1
  EXPECT_THROW(apply_decision(f.state, over), ConstraintViolation);

  SlotDecision shared = empty_decision(1);
  shared.routing.push_back({0, 0, 1, {Kind::raw1, 0}, 1});
  shared.routing.push_back({0, 1, 0, {Kind::raw2, 0}, 1});
  EXPECT_THROW(apply_decision(f.state, shared), ConstraintViolation);

  SlotDecision unmatched = empty_decision(1);
  unmatched.combine[0] = {Tag{2}};
  EXPECT_THROW(apply_decision(f.state, unmatched), ConstraintViolation);

  SlotDecision twice = empty_decision(1);
  twice.combine[0] = {Tag{1}, Tag{1}};
  EXPECT_THROW(apply_decision(f.state, twice), ConstraintViolation);

  for (int t = 2; t <= 5; ++t) {
    f.put_raw(1, t);
    f.put_raw(2, t);
  }
  SlotDecision busy = empty_decision(1);
  busy.combine[0] = {Tag{1}, Tag{2}, Tag{3}, Tag{4}};  // C = 3
  EXPECT_THROW(apply_decision(f.state, busy), ConstraintViolation);
  EXPECT_EQ(f.state.slot(), 0u);
}

TEST(Admit, ZeroIsNoOp) {
  Fixture f;
  EXPECT_TRUE(admit(f.state, 0, 0).empty());
  EXPECT_EQ(f.state.q_total(), 0);
}

TEST(Admit, IdenticalTagsAtBothSources) {
  Topology topo = fixtures::grid(2);
  NetworkState s(topo);
  const auto tags = admit(s, 3, 1);
  ASSERT_EQ(tags.size(), 3u);
  const auto& q1 = s.queue(topo.s1(), {Kind::raw1, 1});
  const auto& q2 = s.queue(topo.s2(), {Kind::raw2, 1});
  ASSERT_EQ(q1.size(), 3u);
  ASSERT_EQ(q2.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(q1[i].tag, tags[i]);
    EXPECT_EQ(q2[i].tag, tags[i]);
  }
  const auto more = admit(s, 2, 0);
  EXPECT_LT(tags.back(), more.front());
}

TEST(Admit, SourceThatComputesFeedsItsOwnXQueue) {
  // s1 = 0 is also a computation node.
  Topology topo(3, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}}, 0, 1, 2, {{0, 2}});
  NetworkState s(topo);
  admit(s, 2, 0);
  EXPECT_EQ(s.x_len(0, 1), 2);
  EXPECT_EQ(s.q_len(0, {Kind::raw1, 0}), 0);
  EXPECT_EQ(s.q_len(1, {Kind::raw2, 0}), 2);
}

TEST(Conservation, HoldsThroughCombination) {
  Fixture f;
  admit(f.state, 2, 0);
  EXPECT_TRUE(conservation_holds(f.state));
  f.put_raw(1, 100);  // a raw packet without an admitted query breaks the balance
  EXPECT_FALSE(conservation_holds(f.state));
}
