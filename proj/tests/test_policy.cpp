#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "sideobs/harness.hpp"
#include "sideobs/lp.hpp"
#include "sideobs/policy.hpp"

using namespace sideobs;

namespace {

Environment identity_env(std::vector<double> means, std::vector<IndexList> sets,
                         std::vector<double> probs, std::vector<Edge> extra = {}) {
  const std::size_t k = means.size();
  std::vector<Edge> reward;
  for (std::size_t j = 0; j < k; ++j) reward.push_back({j, j});
  std::vector<Edge> observe = reward;
  observe.insert(observe.end(), extra.begin(), extra.end());
  return Environment(build_graph(k, k, observe, reward),
                     ActivationStructure(std::move(sets), std::move(probs), k), std::move(means),
                     RewardModel::identity());
}

std::vector<std::size_t> action_trace(const Environment& env, Policy& policy, std::uint64_t horizon,
                                      std::uint64_t seed) {
  std::vector<std::size_t> actions;
  simulate(env, policy, horizon, TrialSeeds::derive(seed, "shared", 0), &actions);
  return actions;
}

Environment routing_env(std::uint64_t mean_seed) {
  const auto net = default_routing_network(5.0);
  const ActivationStructure act({{0, 1, 2, 3}, {4, 5, 6, 7}}, {0.5, 0.5}, 8);
  return Environment(net.graph, act, assign_means(12, 0, 0.9, 0.05, 0.95, mean_seed),
                     RewardModel::path_delay(5.0));
}

}  // namespace

TEST(UcbLpA, ForcedSyncSamplesLpDistribution) {
  // Single set K = {0, 1} with mutual observation, so v = (1, 1) for any
  // weights and the phase check holds at round 0.
  const auto env = identity_env({0.5, 0.5}, {{0, 1}}, {1.0}, {{0, 1}, {1, 0}});
  const auto problem = build_lp(env.graph(), env.activation());
  struct Case {
    std::vector<double> z;
    double tolerance;
  };
  constexpr int n = 100000;
  // 0.0062 is 4.5 binomial standard deviations at p = 1/4.
  for (const Case& c : {Case{{2.0, kDefaultEpsilon}, 0.01}, Case{{1.0, 3.0}, 0.0062}}) {
    const LpSolution lp(problem, c.z, 0.0, env.graph(), env.activation());
    UcbLpA policy(env.graph(), env.activation(), lp, 10000, RewardModel::identity());
    Rng rng(5);
    int zeros = 0;
    for (int t = 0; t < n; ++t) {
      const std::size_t j = policy.select(0, rng);
      ASSERT_TRUE(policy.round_sync());
      zeros += j == 0;
    }
    EXPECT_NEAR(static_cast<double>(zeros) / n, c.z[0] / (c.z[0] + c.z[1]), c.tolerance);
  }
}

TEST(UcbLpA, ZeroVarianceEliminationRound) {
  const auto env = identity_env({1.0, 0.0}, {{0, 1}}, {1.0});
  const auto lp = solve_observability_lp(env.graph(), env.activation());
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    for (int variant = 0; variant < 2; ++variant) {
      std::unique_ptr<UcbLpA> policy;
      if (variant == 0) {
        policy = std::make_unique<UcbLpA>(env.graph(), env.activation(), lp, 10000, RewardModel::identity());
      } else {
        policy = std::make_unique<UcbE>(env.graph(), env.activation(), 10000, RewardModel::identity());
      }
      simulate(env, *policy, 200, TrialSeeds::derive(seed, policy->name(), 0));
      const auto round = policy->elimination_round(1, 0);
      ASSERT_TRUE(round.has_value()) << policy->name();
      EXPECT_LE(*round, 2);  // m_{1,1}: first m with 2^-m < 1/2
      // n(0) = 19 samples already separate the means: W = sqrt(ln(1e4)/38) < 1/2.
      EXPECT_EQ(*round, 0);
      EXPECT_EQ(policy->active_set(0), IndexList{0});
    }
  }
}

TEST(UcbLpA, SingletonActiveSetPlaysItsAction) {
  const auto env = identity_env({1.0, 0.0}, {{0, 1}}, {1.0});
  UcbE policy(env.graph(), env.activation(), 10000, RewardModel::identity());
  simulate(env, policy, 100, TrialSeeds::derive(1, "ucb-e", 0));
  ASSERT_EQ(policy.active_set(0).size(), 1u);
  Rng rng(0);
  for (int t = 0; t < 10; ++t) EXPECT_EQ(policy.select(0, rng), 0u);
}

TEST(UcbLpA, StateInvariantsHoldThroughoutARun) {
  const std::size_t k = 30;
  const auto g = generate_ba(k, 2, 17);
  const auto act = uniform_partition(k, 3, 0.2, 17);
  const Environment env(g, act, assign_means(k, 3, 0.9, 0.3, 0.7, 17), RewardModel::identity());
  const auto lp = solve_observability_lp(g, act);
  const std::uint64_t horizon = 20000;
  UcbLpA policy(g, act, lp, horizon, RewardModel::identity());
  Rng act_rng(1), reward_rng(2), policy_rng(3);
  std::vector<Observation> obs;
  bool saw_sync = false;
  for (std::uint64_t t = 0; t < horizon; ++t) {
    const std::size_t a = env.draw_active_set(act_rng);
    const std::size_t j = policy.select(a, policy_rng);
    ASSERT_TRUE(act.contains(a, j));
    saw_sync |= policy.round_sync();
    const double r = env.pull(j, reward_rng, obs);
    policy.update(a, j, obs, r);
    for (std::size_t b = 0; b < act.size(); ++b) {
      const auto& active = policy.active_set(b);
      const auto& deficit = policy.deficit_set(b);
      const auto kb = act.set(b);
      ASSERT_FALSE(active.empty());
      ASSERT_TRUE(std::includes(kb.begin(), kb.end(), active.begin(), active.end()));
      ASSERT_TRUE(std::includes(active.begin(), active.end(), deficit.begin(), deficit.end()));
      ASSERT_EQ(policy.delta(b), std::ldexp(1.0, -policy.round(b)));
    }
  }
  EXPECT_TRUE(saw_sync);
  bool synced_event = false;
  for (const auto& e : policy.events()) {
    if (e.synced) {
      synced_event = true;
      EXPECT_GE(e.min_count, n_of(e.round, horizon));
    }
  }
  EXPECT_TRUE(synced_event);
}

TEST(UcbLpA, IndependentRoundsMeetTheirQuota) {
  const auto env = identity_env({0.8, 0.5, 0.45, 0.2}, {{0, 1, 2, 3}}, {1.0});
  const std::uint64_t horizon = 50000;
  UcbE policy(env.graph(), env.activation(), horizon, RewardModel::identity());
  simulate(env, policy, horizon, TrialSeeds::derive(9, "ucb-e", 0));
  ASSERT_FALSE(policy.events().empty());
  for (const auto& e : policy.events()) {
    EXPECT_FALSE(e.synced);
    EXPECT_GE(e.min_count, n_of(e.round, horizon));
  }
  EXPECT_EQ(policy.active_set(0).front(), 0u);
}

TEST(UcbN, IndexValue) {
  const auto env = identity_env({0.5, 0.5}, {{0, 1}}, {1.0});
  UcbN policy(env.graph(), env.activation(), RewardModel::identity());
  Rng rng(0);
  for (int t = 0; t < 100; ++t) policy.select(0, rng);
  for (int s = 0; s < 10; ++s) {
    const std::vector<Observation> obs{{1, s % 2 == 0 ? 1.0 : 0.0}};
    policy.update(0, 1, obs, obs[0].value);
  }
  EXPECT_NEAR(policy.index(1), 1.4597051824376162, 1e-12);
}

TEST(UcbN, PlaysUnsampledActionsFirst) {
  const auto env = identity_env({0.1, 0.9, 0.5}, {{0, 1, 2}}, {1.0});
  UcbN policy(env.graph(), env.activation(), RewardModel::identity());
  const auto trace = action_trace(env, policy, 3, 4);
  EXPECT_EQ(trace, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Ucb1, IgnoresSideObservations) {
  // Action 0 observes every arm.
  const auto env = identity_env({0.5, 0.5, 0.5}, {{0, 1, 2}}, {1.0}, {{0, 1}, {0, 2}});
  Ucb1 policy(env.graph(), env.activation());
  Rng rng(3), reward_rng(4);
  std::vector<Observation> obs;
  const std::size_t j = policy.select(0, rng);
  ASSERT_EQ(j, 0u);
  const double r = env.pull(j, reward_rng, obs);
  EXPECT_EQ(obs.size(), 3u);
  policy.update(0, j, obs, r);
  EXPECT_EQ(policy.count(0), 1u);
  EXPECT_EQ(policy.count(1), 0u);
  EXPECT_EQ(policy.count(2), 0u);
}

TEST(UcbMaxN, MatchesUcbNOnRoutingNetwork) {
  const auto env = routing_env(3);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    UcbN n(env.graph(), env.activation(), env.reward_model());
    UcbMaxN maxn(env.graph(), env.activation(), env.reward_model());
    EXPECT_EQ(action_trace(env, n, 20000, seed), action_trace(env, maxn, 20000, seed));
  }
}

TEST(UcbMaxN, MovesToBestNeighbourOnACliqueGraph) {
  // Star around node 0: choosing 0 reveals 1 and 2.
  const std::vector<std::pair<std::size_t, std::size_t>> edges{{0, 1}, {0, 2}};
  const auto g = social_graph(3, edges);
  const Environment env(g, ActivationStructure({{0, 1, 2}}, {1.0}, 3), {0.2, 0.9, 0.4},
                        RewardModel::identity());
  UcbN n(g, env.activation(), env.reward_model());
  UcbMaxN maxn(g, env.activation(), env.reward_model());
  EXPECT_NE(action_trace(env, n, 3000, 1), action_trace(env, maxn, 3000, 1));
}

TEST(Policies, AlwaysChooseFromTheActiveSetAndAreDeterministic) {
  const auto env = routing_env(8);
  const auto lp = solve_observability_lp(env.graph(), env.activation());
  for (std::string_view id : kPolicyIds) {
    auto p1 = make_policy(id, env, &lp, 10000);
    auto p2 = make_policy(id, env, &lp, 10000);
    std::vector<std::size_t> a1, a2;
    // simulate() rejects any action outside K_{a_t}.
    const auto t1 = simulate(env, *p1, 10000, TrialSeeds::derive(4, id, 0), &a1);
    const auto t2 = simulate(env, *p2, 10000, TrialSeeds::derive(4, id, 0), &a2);
    EXPECT_EQ(a1, a2) << id;
    EXPECT_EQ(t1.cumulative, t2.cumulative) << id;
  }
  EXPECT_THROW(make_policy("ucb-lp-a", env, nullptr, 10000), Error);
  EXPECT_THROW(make_policy("thompson", env, &lp, 10000), Error);
}
