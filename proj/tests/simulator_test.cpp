#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>

#include "gossip/error.hpp"
#include "gossip/simulator.hpp"
#include "support/fixtures.hpp"

namespace gossip {
namespace {

SimulationConfig config(std::uint64_t horizon, std::uint64_t seed, std::uint64_t stride = 1) {
  SimulationConfig cfg;
  cfg.horizon = horizon;
  cfg.seed = seed;
  cfg.record_every = stride;
  return cfg;
}

struct Example1 {
  DirectedNetwork net = testing::example1_network();
  SelectionMatrix p = uniform_selection_matrix(net);
  WorldModel world = testing::example1_world();
};

TEST(SimulationConfig, RejectsZeros) {
  EXPECT_THROW(config(0, 1).validate(), ValidationError);
  EXPECT_THROW(config(1, 1, 0).validate(), ValidationError);
  auto cfg = config(1, 1);
  cfg.replications = 0;
  EXPECT_THROW(cfg.validate(), ValidationError);
}

TEST(Run, RejectsMismatchedSizes) {
  Example1 ex;
  const auto small = testing::uninformative_world(3);
  EXPECT_THROW(run(ex.net, ex.p, small, config(5, 1)), ValidationError);
}

TEST(Run, SameSeedSameTrace) {
  Example1 ex;
  const auto a = run(ex.net, ex.p, ex.world, config(300, 9));
  const auto b = run(ex.net, ex.p, ex.world, config(300, 9));
  EXPECT_TRUE(a == b);
  const auto c = run(ex.net, ex.p, ex.world, config(300, 10));
  EXPECT_FALSE(a == c);
}

TEST(Run, SnapshotSchedule) {
  Example1 ex;
  const auto trace = run(ex.net, ex.p, ex.world, config(25, 1, 10));
  EXPECT_EQ(trace.snapshot_times(), (std::vector<std::uint64_t>{0, 10, 20, 25}));
  EXPECT_THROW(trace.log_belief(0, 5), std::out_of_range);
}

TEST(Run, SelectionsStayInNeighbourhood) {
  Example1 ex;
  const auto trace = run(ex.net, ex.p, ex.world, config(500, 4));
  for (std::uint64_t t = 1; t <= 500; ++t)
    for (Agent i = 0; i < 8; ++i) EXPECT_TRUE(ex.net.has_edge(trace.selection(t, i), i));
}

TEST(Run, Example1LearnsTheTruth) {
  Example1 ex;
  const auto trace = run(ex.net, ex.p, ex.world, config(5000, 42, 100));
  for (Agent i = 0; i < 8; ++i) EXPECT_GT(trace.belief(i, 5000).probability(0), 0.99) << i + 1;
}

TEST(Run, RoundZeroIsInitialBelief) {
  Example1 ex;
  const auto trace = run(ex.net, ex.p, ex.world, config(3, 77));
  for (Agent i = 0; i < 8; ++i) {
    const auto expected = initial_belief(ex.world, i, trace.signal(i, 0));
    const auto got = trace.log_belief(i, 0);
    EXPECT_EQ(std::memcmp(got.data(), expected.log_belief.data(), 3 * sizeof(double)), 0);
  }
}

TEST(Run, UninformativeObserverOfUninformativeSourceKeepsPrior) {
  // Every agent uninformative: beliefs never move.
  const auto net = testing::example1_network();
  const auto world = testing::uninformative_world(8);
  const auto trace = run(net, uniform_selection_matrix(net), world, config(200, 3));
  for (Agent i = 0; i < 8; ++i) {
    const auto b = trace.belief(i, 200);
    for (StateIndex k = 0; k < 3; ++k) EXPECT_EQ(b.log_belief[k], -std::log(3.0));
  }
}

TEST(Run, SingleAgentMatchesIteratedSelfUpdate) {
  const auto net = testing::singleton();
  const std::vector<LikelihoodTable> tables{testing::table_l1()};
  const WorldModel world(StateSpace({"1", "2", "3"}, 0), Prior::uniform(3), tables);
  const auto trace = run(net, uniform_selection_matrix(net), world, config(400, 5));
  auto belief = initial_belief(world, 0, trace.signal(0, 0));
  for (std::uint64_t t = 1; t <= 400; ++t) {
    EXPECT_EQ(trace.selection(t, 0), 0u);
    belief = self_update(world, belief, trace.signal(0, t));
    const auto got = trace.log_belief(0, t);
    ASSERT_EQ(std::memcmp(got.data(), belief.log_belief.data(), 3 * sizeof(double)), 0) << t;
  }
}

TEST(Run, ManualRecomputationInReverseAgentOrder) {
  // Synchronous semantics: the order in which agents are updated within a
  // round must not matter.
  Example1 ex;
  const auto trace = run(ex.net, ex.p, ex.world, config(60, 21));
  std::vector<BeliefState> prev;
  for (Agent i = 0; i < 8; ++i) prev.push_back(initial_belief(ex.world, i, trace.signal(i, 0)));
  for (std::uint64_t t = 1; t <= 60; ++t) {
    std::vector<BeliefState> next(8);
    for (Agent i = 8; i-- > 0;) {
      next[i] = gossip_update(ex.world, prev[trace.selection(t, i)], i, trace.signal(i, t));
    }
    for (Agent i = 0; i < 8; ++i) {
      const auto got = trace.log_belief(i, t);
      ASSERT_EQ(std::memcmp(got.data(), next[i].log_belief.data(), 3 * sizeof(double)), 0);
    }
    prev = std::move(next);
  }
}

TEST(Run, SelectionFrequenciesMatchUniformRows) {
  Example1 ex;
  const std::uint64_t horizon = 100000;
  const auto trace = run(ex.net, ex.p, ex.world, config(horizon, 8, horizon));
  // Agent 2 picks 1 or 4 with probability 1/2 each.
  std::uint64_t picks_of_1 = 0;
  for (std::uint64_t t = 1; t <= horizon; ++t) picks_of_1 += trace.selection(t, 1) == 0;
  const double sigma = std::sqrt(horizon * 0.25);
  EXPECT_NEAR(static_cast<double>(picks_of_1), horizon / 2.0, 3.0 * sigma);
}

TEST(Run, CustomSamplerIsUsed) {
  Example1 ex;
  const JointSignalSampler zeros = [](const WorldModel& world, std::uint64_t, std::uint64_t) {
    return std::vector<Signal>(world.agent_count(), 0);
  };
  const auto trace = run(ex.net, ex.p, ex.world, config(20, 1), zeros);
  for (std::uint64_t t = 0; t <= 20; ++t)
    for (Agent i = 0; i < 8; ++i) EXPECT_EQ(trace.signal(i, t), 0u);
}

TEST(RunReplications, MatchesSequentialRuns) {
  Example1 ex;
  auto cfg = config(100, 1234, 10);
  cfg.replications = 5;
  const auto traces = run_replications(ex.net, ex.p, ex.world, cfg, 3);
  ASSERT_EQ(traces.size(), 5u);
  for (std::uint64_t r = 0; r < 5; ++r) {
    auto single = cfg;
    single.replications = 1;
    single.seed = replication_seed(cfg.seed, r);
    EXPECT_TRUE(traces[r] == run(ex.net, ex.p, ex.world, single)) << r;
  }
}

TEST(BackwardWalk, FollowsSelections) {
  Example1 ex;
  const auto trace = run(ex.net, ex.p, ex.world, config(50, 6));
  const auto walk = backward_walk(trace, 7, 50);
  ASSERT_EQ(walk.size(), 51u);
  EXPECT_EQ(walk[0], 7u);
  EXPECT_EQ(walk[1], 6u);  // agent 8 only hears agent 7
  for (std::size_t k = 1; k <= 50; ++k) {
    EXPECT_EQ(walk[k], trace.selection(50 - (k - 1), walk[k - 1]));
    EXPECT_TRUE(ex.net.has_edge(walk[k], walk[k - 1]));
  }
}

TEST(BackwardWalk, LeavesTransientNodesAndStays) {
  Example1 ex;
  const auto trace = run(ex.net, ex.p, ex.world, config(40, 13));
  const auto walk = backward_walk(trace, 7, 40);
  // 8 -> 7 -> 1, then inside {1, ..., 5} forever.
  EXPECT_EQ(walk[2], 0u);
  for (std::size_t k = 2; k < walk.size(); ++k) EXPECT_LT(walk[k], 5u);
}

TEST(WalkIdentity, TimeOne) {
  Example1 ex;
  const auto trace = run(ex.net, ex.p, ex.world, config(1, 31));
  for (Agent i = 0; i < 8; ++i)
    for (StateIndex c = 1; c < 3; ++c) EXPECT_LE(verify_walk_identity(trace, ex.world, i, 1, c), 1e-12);
}

TEST(WalkIdentity, Agent8AtHundred) {
  Example1 ex;
  const auto trace = run(ex.net, ex.p, ex.world, config(100, 2));
  const auto d = walk_decomposition(trace, ex.world, 7, 100, 1);
  EXPECT_EQ(d.own_signal, 0.0);  // agent 8 is uninformative
  EXPECT_EQ(d.prior, 0.0);       // uniform prior
  EXPECT_NEAR(d.total(), log_ratio(trace.log_belief(7, 100), 1, 0), 1e-10);
}

TEST(WalkIdentity, UninformativeWorldIsExactlyZero) {
  const auto net = testing::example1_network();
  const auto world = testing::uninformative_world(8);
  const auto trace = run(net, uniform_selection_matrix(net), world, config(300, 1));
  for (Agent i = 0; i < 8; ++i) {
    EXPECT_EQ(walk_decomposition(trace, world, i, 300, 2).total(), 0.0);
    EXPECT_EQ(verify_walk_identity(trace, world, i, 300, 2), 0.0);
  }
}

TEST(WalkIdentity, NonUniformPrior) {
  Example1 ex;
  std::vector<LikelihoodTable> tables;
  for (Agent i = 0; i < 8; ++i) tables.push_back(ex.world.likelihood(i));
  const WorldModel world(StateSpace({"1", "2", "3"}, 0), Prior({0.5, 0.3, 0.2}), tables);
  const auto trace = run(ex.net, ex.p, world, config(200, 17));
  for (Agent i = 0; i < 8; ++i) {
    const auto d = walk_decomposition(trace, world, i, 200, 2);
    EXPECT_NEAR(d.prior, std::log(0.2 / 0.5), 1e-15);
    EXPECT_LE(verify_walk_identity(trace, world, i, 200, 2), 1e-10);
  }
}

TEST(WalkIdentity, BothSidesNegativeInfinity) {
  // A signal that rules out state b: the recorded ratio and the walk sum are
  // both -inf.
  const std::vector<std::vector<double>> rows{{0.5, 0.5}, {1.0, 0.0}};
  const WorldModel world(StateSpace({"a", "b"}, 0), Prior::uniform(2),
                         {LikelihoodTable::from_rows(rows)});
  const JointSignalSampler ones = [](const WorldModel&, std::uint64_t, std::uint64_t) {
    return std::vector<Signal>{1};
  };
  const auto net = testing::singleton();
  const auto trace = run(net, uniform_selection_matrix(net), world, config(3, 1), ones);
  EXPECT_EQ(verify_walk_identity(trace, world, 0, 3, 1), 0.0);
}

TEST(Replay, CleanTraceReplays) {
  Example1 ex;
  const auto trace = run(ex.net, ex.p, ex.world, config(200, 3, 7));
  EXPECT_EQ(replay_mismatch(trace, ex.world), std::nullopt);
}

TEST(Replay, DetectsTamperedSelection) {
  Example1 ex;
  auto trace = run(ex.net, ex.p, ex.world, config(200, 3));
  // Agent 2 picks between 1 and 4; flip round 150.
  const Agent old = trace.selection(150, 1);
  trace.set_selection(150, 1, old == 0 ? 3 : 0);
  const auto mismatch = replay_mismatch(trace, ex.world);
  ASSERT_TRUE(mismatch.has_value());
  EXPECT_GE(*mismatch, 150u);
}

TEST(Fingerprint, ChangesWithContent) {
  Example1 ex;
  EXPECT_EQ(fingerprint(ex.world), fingerprint(testing::example1_world()));
  EXPECT_NE(fingerprint(ex.world), fingerprint(testing::example1_world(1)));
  EXPECT_NE(fingerprint(ex.p), fingerprint(uniform_selection_matrix(testing::singleton())));
}

}  // namespace
}  // namespace gossip
