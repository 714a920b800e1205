#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "gossip/error.hpp"
#include "gossip/world.hpp"
#include "support/fixtures.hpp"

namespace gossip {
namespace {

std::vector<double> random_distribution(RandomStream& rng, std::size_t k, bool allow_zeros) {
  std::vector<double> p(k);
  for (auto& v : p) v = (allow_zeros && rng.uniform() < 0.2) ? 0.0 : rng.uniform() + 1e-3;
  if (std::accumulate(p.begin(), p.end(), 0.0) == 0.0) p[0] = 1.0;
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& v : p) v /= total;
  return p;
}

TEST(StateSpace, Validation) {
  EXPECT_THROW(StateSpace({}, 0), ValidationError);
  EXPECT_THROW(StateSpace({"a", "a"}, 0), ValidationError);
  EXPECT_THROW(StateSpace({"a", "b"}, 2), ValidationError);
  const StateSpace s({"a", "b"}, 1);
  EXPECT_EQ(s.index_of("b"), 1u);
  EXPECT_THROW(s.index_of("c"), ValidationError);
}

TEST(Prior, MustBeStrictlyPositiveAndNormalised) {
  EXPECT_THROW(Prior({0.5, 0.5, 0.0}), ValidationError);
  EXPECT_THROW(Prior({0.5, 0.6}), ValidationError);
  EXPECT_NO_THROW(Prior({0.2, 0.8}));
}

TEST(LikelihoodTable, RowsMustBeDistributions) {
  const std::vector<std::vector<double>> bad{{0.5, 0.4}, {0.5, 0.5}};
  EXPECT_THROW(LikelihoodTable::from_rows(bad), ValidationError);
  const std::vector<std::vector<double>> negative{{1.5, -0.5}};
  EXPECT_THROW(LikelihoodTable::from_rows(negative), ValidationError);
  const std::vector<std::vector<double>> ragged{{1.0}, {0.5, 0.5}};
  EXPECT_THROW(LikelihoodTable::from_rows(ragged), ValidationError);
}

TEST(WorldModel, TablesMustMatchStateCount) {
  const std::vector<std::vector<double>> two_rows{{0.5, 0.5}, {0.5, 0.5}};
  std::vector<LikelihoodTable> tables{LikelihoodTable::from_rows(two_rows)};
  EXPECT_THROW(WorldModel(StateSpace({"1", "2", "3"}, 0), Prior::uniform(3), tables),
               ValidationError);
}

TEST(SampleSignal, UninformativeAgentIgnoresTruth) {
  for (StateIndex truth = 0; truth < 3; ++truth) {
    const auto world = testing::example1_world(truth);
    RandomStream rng(100 + truth);
    int zeros = 0;
    const int draws = 100000;
    for (int k = 0; k < draws; ++k) zeros += sample_signal(world, 2, rng) == 0;
    EXPECT_NEAR(zeros / static_cast<double>(draws), 0.25, 0.01);
  }
}

TEST(SampleSignal, PointMassAlwaysHits) {
  const std::vector<std::vector<double>> rows{{1.0, 0.0}, {0.0, 1.0}};
  const WorldModel world(StateSpace({"a", "b"}, 0), Prior::uniform(2),
                         {LikelihoodTable::from_rows(rows)});
  RandomStream rng(5);
  for (int k = 0; k < 1000; ++k) EXPECT_EQ(sample_signal(world, 0, rng), 0u);
}

TEST(SampleSignal, Agent1FrequencyMatchesTable) {
  const auto world = testing::example1_world();
  RandomStream rng(2024);
  int zeros = 0;
  const int draws = 100000;
  for (int k = 0; k < draws; ++k) zeros += sample_signal(world, 0, rng) == 0;
  EXPECT_NEAR(zeros / static_cast<double>(draws), 1.0 / 3.0, 0.01);
}

TEST(SampleSignal, ChiSquareOnFourSymbols) {
  const std::vector<std::vector<double>> rows{{0.1, 0.2, 0.3, 0.4}};
  const WorldModel world(StateSpace({"only"}, 0), Prior::uniform(1),
                         {LikelihoodTable::from_rows(rows)});
  RandomStream rng(99);
  std::vector<double> counts(4, 0.0);
  const int draws = 50000;
  for (int k = 0; k < draws; ++k) counts[sample_signal(world, 0, rng)] += 1.0;
  double chi2 = 0.0;
  for (std::size_t s = 0; s < 4; ++s) {
    const double expected = rows[0][s] * draws;
    chi2 += (counts[s] - expected) * (counts[s] - expected) / expected;
  }
  // 3 degrees of freedom; the 0.999 quantile is 16.27.
  EXPECT_LT(chi2, 16.27);
}

TEST(SampleCategorical, SkipsZeroMassAndRoundingSlack) {
  const std::vector<double> p{0.0, 0.5, 0.0, 0.5, 0.0};
  EXPECT_EQ(sample_categorical(p, 0.0), 1u);
  EXPECT_EQ(sample_categorical(p, 0.75), 3u);
  EXPECT_EQ(sample_categorical(p, std::nextafter(1.0, 0.0)), 3u);
}

TEST(KlDivergence, Identity) {
  const std::vector<double> p{0.1, 0.6, 0.3};
  EXPECT_EQ(kl_divergence(p, p), 0.0);
}

TEST(KlDivergence, Example1Agent2) {
  const std::vector<double> p{0.5, 0.5};
  const std::vector<double> q{2.0 / 3, 1.0 / 3};
  const double expected = 0.5 * std::log(9.0 / 8.0);  // 0.058891517828...
  EXPECT_NEAR(kl_divergence(p, q), expected, 1e-15);
  EXPECT_NEAR(kl_divergence(p, q), 0.05889151782819173, 1e-15);
}

TEST(KlDivergence, Example1Agent1) {
  const std::vector<double> p{1.0 / 3, 2.0 / 3};
  const std::vector<double> q{0.2, 0.8};
  const double expected = std::log(5.0 / 3.0) / 3.0 + 2.0 * std::log(5.0 / 6.0) / 3.0;
  EXPECT_NEAR(kl_divergence(p, q), expected, 1e-15);
  EXPECT_NEAR(kl_divergence(p, q), 0.048727503392693855, 1e-15);
}

TEST(KlDivergence, GuardCases) {
  const std::vector<double> p{0.5, 0.5, 0.0};
  const std::vector<double> q{0.25, 0.25, 0.5};
  // Zero entries in p contribute nothing.
  EXPECT_NEAR(kl_divergence(p, q), std::log(2.0), 1e-15);
  // q vanishes where p does not: infinite.
  EXPECT_EQ(kl_divergence(q, p), kInfiniteDivergence);
  // Shared support with zeros in both.
  EXPECT_EQ(kl_divergence(p, p), 0.0);
  const std::vector<double> shorter{1.0};
  EXPECT_THROW(kl_divergence(p, shorter), ValidationError);
}

TEST(KlDivergence, PropertyNonNegativeAndZeroIffEqual) {
  RandomStream rng(42);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 2 + rng.next_u64() % 6;
    const auto p = random_distribution(rng, k, true);
    const auto q = rng.uniform() < 0.2 ? p : random_distribution(rng, k, true);
    const double d = kl_divergence(p, q);
    EXPECT_GE(d, 0.0);
    bool equal = true;
    for (std::size_t s = 0; s < k; ++s) equal = equal && std::abs(p[s] - q[s]) <= 1e-12;
    EXPECT_EQ(d <= 1e-12, equal) << "trial " << trial;
  }
}

TEST(Distinguishable, Example1Pairs) {
  const auto world = testing::example1_world();
  for (StateIndex a = 0; a < 3; ++a)
    for (StateIndex b = 0; b < 3; ++b) EXPECT_FALSE(distinguishable(world, 2, a, b));
  EXPECT_TRUE(distinguishable(world, 1, 0, 1));
  EXPECT_FALSE(distinguishable(world, 1, 0, 2));
  EXPECT_TRUE(distinguishable(world, 0, 0, 2));
  EXPECT_FALSE(distinguishable(world, 0, 0, 1));
}

TEST(Distinguishable, SymmetricAsBoolean) {
  RandomStream rng(8);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t k = 2 + rng.next_u64() % 4;
    std::vector<std::vector<double>> rows;
    for (int s = 0; s < 3; ++s) {
      rows.push_back(rng.uniform() < 0.3 && !rows.empty() ? rows.back()
                                                           : random_distribution(rng, k, true));
    }
    const WorldModel world(StateSpace({"a", "b", "c"}, 0), Prior::uniform(3),
                           {LikelihoodTable::from_rows(rows)});
    for (StateIndex a = 0; a < 3; ++a)
      for (StateIndex b = 0; b < 3; ++b)
        EXPECT_EQ(distinguishable(world, 0, a, b), distinguishable(world, 0, b, a));
  }
}

TEST(Identifiability, Example1CoreClass) {
  const auto world = testing::example1_world();
  const std::vector<Agent> core{0, 1, 2, 3, 4};
  const auto report = check_global_identifiability(world, core);
  EXPECT_TRUE(report.identifiable);
  ASSERT_EQ(report.false_states.size(), 2u);
  EXPECT_EQ(report.false_states[0].state, 1u);
  EXPECT_EQ(report.false_states[0].witnesses, std::vector<Agent>{1});
  EXPECT_EQ(report.false_states[1].state, 2u);
  EXPECT_EQ(report.false_states[1].witnesses, std::vector<Agent>{0});
}

TEST(Identifiability, UninformativeSubset) {
  const auto world = testing::example1_world();
  const std::vector<Agent> observers{2, 5, 6, 7};
  EXPECT_FALSE(check_global_identifiability(world, observers).identifiable);
}

TEST(Identifiability, SingleStateIsVacuous) {
  const std::vector<std::vector<double>> rows{{0.5, 0.5}};
  const WorldModel world(StateSpace({"only"}, 0), Prior::uniform(1),
                         {LikelihoodTable::from_rows(rows)});
  const std::vector<Agent> all{0};
  const auto report = check_global_identifiability(world, all);
  EXPECT_TRUE(report.identifiable);
  EXPECT_TRUE(report.false_states.empty());
}

TEST(Identifiability, MonotoneInAgentSet) {
  const auto world = testing::example1_world();
  RandomStream rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Agent> subset;
    std::vector<Agent> superset;
    for (Agent i = 0; i < 8; ++i) {
      const double u = rng.uniform();
      if (u < 0.3) subset.push_back(i);
      if (u < 0.6) superset.push_back(i);
    }
    if (check_global_identifiability(world, subset).identifiable) {
      EXPECT_TRUE(check_global_identifiability(world, superset).identifiable);
    }
  }
}

}  // namespace
}  // namespace gossip
