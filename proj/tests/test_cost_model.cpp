#include <gtest/gtest.h>

#include "oracles.hpp"
#include "phimdp/cost_model.hpp"

using namespace phimdp;

namespace {

void expect_consistent(const CostModel& m) {
  const auto full = cost(FeatureMap(m.phi()), m.history());
  const auto running = m.cost();
  ASSERT_NEAR(running.state_bits, full.state_bits, 1e-6);
  ASSERT_NEAR(running.reward_bits, full.reward_bits, 1e-6);
  const auto labels = m.labels();
  ASSERT_EQ(labels.size(), m.history().size());
  for (std::size_t t = 0; t < labels.size(); ++t) {
    ASSERT_EQ(m.counts().states().context(labels[t]), m.phi().apply(m.history(), t + 1));
  }
}

}  // namespace

TEST(CostModel, ProposalDeltaMatchesFullRecount) {
  Rng rng = derive_rng(21, 0);
  for (int trial = 0; trial < 6; ++trial) {
    auto alpha = oracle::make_alphabets(2 + trial % 3, 1 + trial % 2, 2 + trial % 2);
    const auto h = oracle::random_history(alpha, 400, rng);
    CostModel model(h, ContextTreeMap(alpha->observations.size()));
    for (int i = 0; i < 150; ++i) {
      const auto move = propose_move(model.phi(), rng);
      const auto before = model.cost().total;
      const auto p = model.propose(move);
      const double want = cost(FeatureMap(model.phi().apply_move(move)), h).total;
      ASSERT_NEAR(before + p.delta(), want, 1e-6);
      if (uniform_index(rng, 2) == 0) {
        model.accept(p);
        expect_consistent(model);
      }
    }
  }
}

TEST(CostModel, TinyHistoryMovesAndGrowth) {
  Rng rng = derive_rng(22, 0);
  auto h = oracle::tiny_history(3, 5);
  CostModel model(h, ContextTreeMap(2));
  TinyExampleEnv env;
  env.set_previous(h.observation(h.size() - 1));
  Rng env_rng = derive_rng(5, 9);
  for (int i = 0; i < 300; ++i) {
    model.accept(model.propose(propose_move(model.phi(), rng)));
    const auto p = env.step(0, env_rng);
    model.extend(0, p.reward, p.observation);
    if (i % 10 == 0) expect_consistent(model);
  }
  expect_consistent(model);
  EXPECT_NEAR(model.cost().total, model.recompute().total, 1e-6);
}

TEST(CostModel, StaleProposalRejected) {
  const auto h = oracle::tiny_history(50, 1);
  CostModel model(h, ContextTreeMap(2));
  const auto p = model.propose(Move{MoveKind::Split, {}});
  model.extend(0, 0, 0);
  EXPECT_THROW(model.accept(p), std::logic_error);
}

TEST(CostModel, IllegalMovesThrow) {
  const auto h = oracle::tiny_history(50, 1);
  CostModel model(h, ContextTreeMap(2));
  EXPECT_THROW(model.propose(Move{MoveKind::Split, {0}}), std::invalid_argument);
  EXPECT_THROW(model.propose(Move{MoveKind::Merge, {}}), std::invalid_argument);
}

TEST(CostModel, NoneMoveIsFree) {
  const auto h = oracle::tiny_history(50, 1);
  CostModel model(h, ContextTreeMap::full_depth(2, 2));
  const auto before = model.cost().total;
  const auto p = model.propose(Move{});
  EXPECT_EQ(p.delta(), 0.0);
  model.accept(p);
  EXPECT_EQ(model.cost().total, before);
}
