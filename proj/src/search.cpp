#include "phimdp/search.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

namespace phimdp {

Criterion parse_criterion(std::string_view text) {
  if (text == "cost") return Criterion::Cost;
  if (text == "icost") return Criterion::ICost;
  throw std::invalid_argument(fmt::format("unknown criterion '{}' (expected cost or icost)", text));
}

std::string_view to_string(Criterion c) { return c == Criterion::Cost ? "cost" : "icost"; }

bool metropolis_accept(double current, double proposed, double q) { return current - proposed > std::log2(q); }

SearchState::SearchState(History h, ContextTreeMap phi, Criterion criterion, PenaltyMode penalty)
    : model_(std::move(h), std::move(phi)), criterion_(criterion), penalty_(penalty) {}

double SearchState::value() {
  if (criterion_ == Criterion::Cost) return model_.cost().total;
  if (!cached_) cached_ = icost(model_.counts(), model_.labels(), model_.history(), penalty_).total;
  return *cached_;
}

void SearchState::extend(Symbol action, Symbol reward, Symbol observation) {
  model_.extend(action, reward, observation);
  cached_.reset();
}

SearchState::Step SearchState::improve(Rng& rng) {
  Step step;
  step.move = propose_move(model_.phi(), rng);
  const double q = uniform_open_closed(rng);
  step.current = value();
  auto proposal = model_.propose(step.move);
  if (criterion_ == Criterion::Cost) {
    step.proposed = step.current + proposal.delta();
  } else {
    step.proposed = icost(FeatureMap(model_.phi().apply_move(step.move)), model_.history(), penalty_).total;
  }
  step.accepted = step.move.kind != MoveKind::None && metropolis_accept(step.current, step.proposed, q);
  if (step.accepted) {
    model_.accept(proposal);
    if (criterion_ == Criterion::ICost) cached_ = step.proposed;
  } else {
    step.proposed = step.current;
  }
  return step;
}

ContextTreeMap phi_improve(const ContextTreeMap& phi, const History& h, Rng& rng, Criterion criterion) {
  SearchState state(h, phi, criterion);
  state.improve(rng);
  return state.phi();
}

AnnealResult anneal(const ContextTreeMap& phi0, const History& h, const SearchConfig& cfg) {
  Rng rng = derive_rng(cfg.seed, 0);
  SearchState state(h, phi0, cfg.criterion);
  const double initial = state.value();
  AnnealResult out{phi0, phi0, initial, initial, initial, {}};
  const std::size_t every = std::max<std::size_t>(1, cfg.log_every);
  for (std::size_t i = 1; i <= cfg.iterations; ++i) {
    const auto step = state.improve(rng);
    const double now = state.value();
    if (now < out.incumbent_cost) {
      out.incumbent_cost = now;
      out.incumbent = state.phi();
    }
    if (i % every == 0 || i == cfg.iterations) out.trace.push_back({i, now, step.accepted, out.incumbent_cost});
  }
  out.final_map = state.phi();
  out.final_cost = state.value();
  return out;
}

void write_search_log(std::ostream& out, const AnnealResult& result) {
  out << "iter,cost,accepted\n";
  for (const auto& row : result.trace) out << fmt::format("{},{},{}\n", row.iteration, row.cost, row.accepted ? 1 : 0);
}

}  // namespace phimdp
