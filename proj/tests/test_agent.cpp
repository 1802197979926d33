#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "oracles.hpp"
#include "phimdp/agent.hpp"
#include "phimdp/trace.hpp"

using namespace phimdp;

namespace {

bool contains_state(const std::vector<StateId>& states, const StateId& s) {
  return std::find(states.begin(), states.end(), s) != states.end();
}

}  // namespace

TEST(GammaSchedule, DefaultAndFixed) {
  const GammaSchedule d;
  EXPECT_EQ(d.at(0), 0.0);
  EXPECT_EQ(d.at(1), 0.5);
  EXPECT_EQ(d.at(99), 0.99);
  const auto f = GammaSchedule::parse("0.95");
  EXPECT_EQ(f.kind, GammaSchedule::Kind::Fixed);
  EXPECT_EQ(f.at(7), 0.95);
  EXPECT_EQ(GammaSchedule::parse("default").kind, GammaSchedule::Kind::Default);
  EXPECT_THROW(GammaSchedule::parse("1"), std::invalid_argument);
  EXPECT_THROW(GammaSchedule::parse("-0.1"), std::invalid_argument);
  EXPECT_THROW(GammaSchedule::parse("fast"), std::invalid_argument);
}

TEST(Agent, BootstrapPicksActionZero) {
  for (const char* name : {"chain", "bandit", "flip"}) {
    auto env = make_environment(name);
    Agent agent(env->alphabets(), AgentConfig{});
    Rng rng = derive_rng(0, 1);
    EXPECT_EQ(agent.start(env->reset(rng)), 0u) << name;
    EXPECT_EQ(agent.phi(), ContextTreeMap(env->alphabets()->observations.size()));
    EXPECT_EQ(agent.realized_states().size(), 1u);
    EXPECT_EQ(agent.gamma(), 0.0);
  }
}

TEST(Agent, RejectsBadConfig) {
  auto env = make_environment("bandit");
  AgentConfig cfg;
  cfg.rmax_poly_coeff = 0.0;
  EXPECT_THROW(Agent(env->alphabets(), cfg), std::invalid_argument);
  Agent agent(env->alphabets(), AgentConfig{});
  EXPECT_THROW(agent.step(0, 0), std::logic_error);
}

TEST(Agent, PerStepInvariants) {
  auto env = make_environment("chain");
  AgentConfig cfg;
  cfg.seed = 3;
  Agent agent(env->alphabets(), cfg);
  Rng rng = derive_rng(cfg.seed, 1);
  Symbol a = agent.start(env->reset(rng));
  const double max_r = env->alphabets()->rewards.max_value();
  for (std::size_t n = 1; n <= 300; ++n) {
    const auto p = env->step(a, rng);
    a = agent.step(p.reward, p.observation);
    ASSERT_EQ(agent.history().size(), n + 1);
    ASSERT_EQ(agent.gamma(), 1.0 - 1.0 / static_cast<double>(n + 1));
    const auto states = agent.realized_states();
    ASSERT_TRUE(contains_state(states, agent.current_state()));
    const double sa = static_cast<double>(states.size() * 2);
    ASSERT_DOUBLE_EQ(agent.rmax_e(), std::max(max_r, 1.0 / (1.0 - agent.gamma()) * sa * max_r));
    ASSERT_EQ(agent.phi().apply(agent.history()), agent.current_state().context);

    // optimism: a pair whose only successor is e has Q >= gamma Rmax_e / (1 - gamma)
    const auto& m = agent.mdp();
    const auto& v = agent.values();
    ASSERT_TRUE(m.exploration.has_value());
    for (std::size_t s = 0; s < m.num_states(); ++s) {
      if (s == *m.exploration) continue;
      for (std::size_t act = 0; act < m.num_actions; ++act) {
        const auto row = m.row(s, act);
        if (row.size() == 1 && row[0].to == *m.exploration) {
          ASSERT_GE(v.q(s, act) + 1e-6 * agent.rmax_e() / (1 - agent.gamma()),
                    agent.gamma() * agent.rmax_e() / (1.0 - agent.gamma()));
        }
      }
    }
    ASSERT_EQ(a, greedy_action(v, *m.index_of(agent.current_state())));
  }
}

TEST(Agent, AblationHasNoExplorationState) {
  auto env = make_environment("chain");
  AgentConfig cfg;
  cfg.exploration = false;
  const auto res = run_episode(*env, 50, cfg);
  EXPECT_EQ(res.history.transitions(), 50u);
  Agent agent(env->alphabets(), cfg);
  agent.start(0);
  agent.step(0, 0);
  EXPECT_FALSE(agent.mdp().exploration.has_value());
}

TEST(RunEpisode, OneStep) {
  auto env = make_environment("tiny");
  const auto res = run_episode(*env, 1, AgentConfig{});
  EXPECT_EQ(res.history.transitions(), 1u);
  EXPECT_EQ(res.history.size(), 2u);
  ASSERT_EQ(res.metrics.size(), 1u);
  EXPECT_EQ(res.metrics[0].n, 1u);
  EXPECT_THROW(run_episode(*env, 0, AgentConfig{}), std::invalid_argument);
}

TEST(RunEpisode, IdenticalSeedsGiveIdenticalOutputs) {
  auto run = [](std::uint64_t seed) {
    auto env = make_environment("chain");
    AgentConfig cfg;
    cfg.seed = seed;
    const auto res = run_episode(*env, 400, cfg);
    std::ostringstream out;
    write_trace(out, res.history);
    write_metrics(out, res.metrics);
    return out.str();
  };
  EXPECT_EQ(run(5), run(5));
  EXPECT_NE(run(5), run(6));
}

TEST(RunEpisode, MetricsColumns) {
  auto env = make_environment("bandit");
  AgentConfig cfg;
  cfg.reward_window = 4;
  const auto res = run_episode(*env, 10, cfg);
  std::ostringstream out;
  write_metrics(out, res.metrics);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "n,avg_reward_window,states,cost_bits,gamma,Rmax_e");
  const auto& rewards = res.history.alphabets().rewards;
  double sum = 0.0;
  for (std::size_t t = 6; t < 10; ++t) sum += rewards.value(res.history.reward(t));
  EXPECT_DOUBLE_EQ(res.metrics.back().avg_reward_window, sum / 4);
  double all = 0.0;
  for (std::size_t t = 0; t < 10; ++t) all += rewards.value(res.history.reward(t));
  EXPECT_DOUBLE_EQ(res.average_reward(1, 10), all / 10);
}

TEST(RunEpisode, TinyAverageReward) {
  auto env = make_environment("tiny");
  AgentConfig cfg;
  cfg.seed = 1;
  const auto res = run_episode(*env, 10000, cfg);
  EXPECT_NEAR(res.average_reward(1, 10000), 1.5, 0.05);
}

TEST(RunEpisode, TinyFinalMapIsSmall) {
  auto env = make_environment("tiny");
  AgentConfig cfg;
  cfg.seed = 1;
  const auto res = run_episode(*env, 10000, cfg);
  const auto counts = accumulate(FeatureMap(res.final_phi), res.history);
  EXPECT_LE(counts.realized_states().size(), 8u);
}
