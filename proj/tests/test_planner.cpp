#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "oracles.hpp"
#include "phimdp/planner.hpp"

using namespace phimdp;

TEST(ValueIteration, SingleStateClosedForm) {
  for (double gamma : {0.0, 0.5, 0.9, 0.99}) {
    oracle::DenseMdp d{1, 1, {1.0}, {1.0}};
    PlannerOptions opt;
    opt.tolerance = 1e-12;
    const auto sol = value_iteration(gen::to_estimate(d, gamma), opt);
    EXPECT_TRUE(sol.converged);
    EXPECT_NEAR(sol.V[0], 1.0 / (1.0 - gamma), 1e-9);
  }
}

TEST(ValueIteration, ExplorationStateAlone) {
  const double rmax = 40.0, gamma = 0.75;
  oracle::DenseMdp d{1, 2, {1.0, 1.0}, {rmax, rmax}};
  const auto sol = value_iteration(gen::to_estimate(d, gamma));
  EXPECT_NEAR(sol.V[0], rmax / (1.0 - gamma), 1e-6);
}

TEST(ValueIteration, TwoStateCycleAgainstElimination) {
  // 0 -> 1 with reward 0, 1 -> 0 with reward 1
  oracle::DenseMdp d{2, 1, {0, 1, 1, 0}, {0, 0, 1, 0}};
  const double gamma = 0.9;
  const auto want = oracle::solve_linear({{1.0, -gamma}, {-gamma, 1.0}}, {0.0, 1.0});
  PlannerOptions opt;
  opt.tolerance = 1e-10;
  for (bool elim : {true, false}) {
    opt.self_loop_elimination = elim;
    const auto sol = value_iteration(gen::to_estimate(d, gamma), opt);
    EXPECT_NEAR(sol.V[0], want[0], 1e-9);
    EXPECT_NEAR(sol.V[1], want[1], 1e-9);
  }
  EXPECT_NEAR(want[1], 1.0 / (1.0 - gamma * gamma), 1e-12);
}

TEST(ValueIteration, MatchesOraclesOnRandomMdps) {
  Rng rng = derive_rng(51, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const double gamma = trial % 2 == 0 ? 0.5 : 0.9;
    const auto d = gen::random_mdp(1 + uniform_index(rng, 5), 2, rng);
    PlannerOptions opt;
    opt.tolerance = 1e-8;
    for (bool elim : {true, false}) {
      opt.self_loop_elimination = elim;
      const auto sol = value_iteration(gen::to_estimate(d, gamma), opt);
      ASSERT_TRUE(sol.converged);
      const auto exact = oracle::policy_enumeration_values(d, gamma);
      const auto rollout = oracle::finite_horizon_values(d, gamma, 2000);
      for (std::size_t s = 0; s < d.S; ++s) {
        EXPECT_LE(std::abs(sol.V[s] - exact[s]), 2 * opt.tolerance);
        EXPECT_LE(std::abs(sol.V[s] - rollout[s]), 2 * opt.tolerance);
        double best = sol.q(s, 0);
        for (std::size_t a = 1; a < d.A; ++a) best = std::max(best, sol.q(s, a));
        EXPECT_EQ(sol.V[s], best);
      }
    }
  }
}

TEST(ValueIteration, RewardShiftAddsConstant) {
  Rng rng = derive_rng(52, 0);
  const double gamma = 0.8, c = 3.0;
  auto d = gen::random_mdp(4, 2, rng);
  PlannerOptions opt;
  opt.tolerance = 1e-10;
  const auto base = value_iteration(gen::to_estimate(d, gamma), opt);
  for (auto& r : d.r) r += c;
  const auto shifted = value_iteration(gen::to_estimate(d, gamma), opt);
  for (std::size_t s = 0; s < 4; ++s) {
    EXPECT_NEAR(shifted.V[s] - base.V[s], c / (1 - gamma), 1e-8);
    for (std::size_t a = 0; a < 2; ++a) EXPECT_NEAR(shifted.q(s, a) - base.q(s, a), c / (1 - gamma), 1e-8);
    EXPECT_EQ(greedy_action(shifted, s), greedy_action(base, s));
  }
}

TEST(ValueIteration, ResidualsContract) {
  Rng rng = derive_rng(53, 0);
  const double gamma = 0.9;
  const auto d = gen::random_mdp(5, 2, rng);
  PlannerOptions opt;
  opt.tolerance = 1e-10;
  opt.record_residuals = true;
  opt.self_loop_elimination = false;
  const auto sol = value_iteration(gen::to_estimate(d, gamma), opt);
  ASSERT_GT(sol.residuals.size(), 2u);
  for (std::size_t i = 1; i < sol.residuals.size(); ++i) {
    EXPECT_LE(sol.residuals[i], gamma * sol.residuals[i - 1] + 1e-12);
  }
  EXPECT_LE(sol.residual, opt.tolerance);
}

TEST(ValueIteration, WarmStartGivesSameAnswer) {
  Rng rng = derive_rng(54, 0);
  const auto d = gen::random_mdp(5, 2, rng);
  PlannerOptions opt;
  opt.tolerance = 1e-9;
  const auto cold = value_iteration(gen::to_estimate(d, 0.9), opt);
  const auto warm = value_iteration(gen::to_estimate(d, 0.9), opt, cold.V);
  for (std::size_t s = 0; s < 5; ++s) EXPECT_NEAR(warm.V[s], cold.V[s], 2e-9);
  EXPECT_LE(warm.iterations, cold.iterations);
}

TEST(ValueIteration, EmptyRowsAreTerminalAndBadRowsThrow) {
  MdpEstimate m;
  m.num_actions = 1;
  m.gamma = 0.9;
  m.states = {StateId{{0}, false}, StateId{{1}, false}};
  m.tensor_index = {0, 1};
  m.rows = {{{1, 1.0, 2.0}}, {}};
  const auto sol = value_iteration(m);
  EXPECT_NEAR(sol.V[0], 2.0, 1e-9);
  EXPECT_EQ(sol.V[1], 0.0);
  m.rows[1] = {{0, 0.5, 0.0}};
  EXPECT_THROW(value_iteration(m), std::invalid_argument);
  m.rows[1] = {{0, 1.0, 0.0}};
  m.gamma = 1.0;
  EXPECT_THROW(value_iteration(m), std::invalid_argument);
}

TEST(GreedyAction, ArgmaxAndTies) {
  ValueSolution sol;
  sol.num_actions = 2;
  sol.states = {StateId{{0}, false}, StateId{{1}, false}};
  sol.Q = {1.0, 3.0, 2.0, 2.0};
  sol.V = {3.0, 2.0};
  EXPECT_EQ(greedy_action(sol, 0), 1u);
  EXPECT_EQ(greedy_action(sol, 1), 0u);
  EXPECT_EQ(greedy_action(sol, StateId{{1}, false}), 0u);
  EXPECT_THROW(greedy_action(sol, StateId{{7}, false}), std::out_of_range);
}

TEST(GreedyAction, UnvisitedActionWinsUnderOptimism) {
  // state s: action 0 seen 4 times (s -> s, reward 1), action 1 never tried.
  const RewardAlphabet rewards({"0", "1"});
  CountTensor c(2, 2);
  const auto s = c.intern({});
  c.add({s, 0, s, 1}, 4);
  c.add_occupancy(s, 5);
  const double gamma = 0.9, rmax = 20.0;
  const auto m = extend_for_exploration(c, rewards, rmax, gamma);
  PlannerOptions opt;
  opt.tolerance = 1e-10;
  const auto sol = value_iteration(m, opt);
  const std::size_t i = *m.index_of(StateId{{}, false});
  EXPECT_EQ(greedy_action(sol, i), 1u);

  // dense copy for the rollout oracle
  oracle::DenseMdp d{m.num_states(), 2, std::vector<double>(m.num_states() * 2 * m.num_states(), 0.0),
                     std::vector<double>(m.num_states() * 2 * m.num_states(), 0.0)};
  for (std::size_t x = 0; x < m.num_states(); ++x) {
    for (std::size_t a = 0; a < 2; ++a) {
      for (const auto& e : m.row(x, a)) {
        d.p[(x * 2 + a) * d.S + e.to] += e.probability;
        d.r[(x * 2 + a) * d.S + e.to] = e.reward;
      }
    }
  }
  const auto v = oracle::finite_horizon_values(d, gamma, 3000);
  for (std::size_t x = 0; x < d.S; ++x) EXPECT_NEAR(sol.V[x], v[x], 2e-8);
  EXPECT_GE(sol.q(i, 1), gamma * rmax / (1 - gamma));
  EXPECT_GT(sol.q(i, 1), sol.q(i, 0));
}
