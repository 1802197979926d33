#include "phimdp/mdp.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

namespace phimdp {

std::span<const TransitionTable::Entry> TransitionTable::row(StateIndex s, Symbol a) const {
  const std::size_t i = static_cast<std::size_t>(s) * num_actions_ + a;
  if (s >= num_states_ || a >= num_actions_) return {};
  return rows_[i];
}

double TransitionTable::probability(StateIndex s, Symbol a, StateIndex to) const {
  for (const auto& e : row(s, a)) {
    if (e.to == to) return e.probability;
  }
  return 0.0;
}

double TransitionTable::row_sum(StateIndex s, Symbol a) const {
  double sum = 0.0;
  for (const auto& e : row(s, a)) sum += e.probability;
  return sum;
}

TransitionTable estimate_T(const CountTensor& counts) {
  TransitionTable t;
  t.num_states_ = counts.state_capacity();
  t.num_actions_ = counts.num_actions();
  t.rows_.resize(t.num_states_ * t.num_actions_);
  for (StateIndex s = 0; s < t.num_states_; ++s) {
    for (Symbol a = 0; a < t.num_actions_; ++a) {
      const double total = static_cast<double>(counts.row_total(s, a));
      if (total <= 0.0) continue;
      auto& row = t.rows_[static_cast<std::size_t>(s) * t.num_actions_ + a];
      for (const auto& e : counts.row(s, a)) row.push_back({e.to, static_cast<double>(e.count) / total});
      std::sort(row.begin(), row.end(), [](const auto& x, const auto& y) { return x.to < y.to; });
    }
  }
  return t;
}

std::optional<double> RewardTable::expected(StateIndex s, Symbol a, StateIndex to) const {
  const TransitionKey key{s, a, to, 0};
  auto it = std::lower_bound(cells_.begin(), cells_.end(), key,
                             [](const Cell& c, const TransitionKey& k) { return c.key < k; });
  if (it == cells_.end() || it->key != key) return std::nullopt;
  return it->value;
}

RewardTable estimate_R(const CountTensor& counts, const RewardAlphabet& rewards) {
  RewardTable table;
  // cells() is sorted by (from, action, to, reward), so one (s, a, s') group is contiguous
  const auto cells = counts.cells();
  for (std::size_t i = 0; i < cells.size();) {
    const auto& k = cells[i].first;
    double weighted = 0.0;
    double n = 0.0;
    std::size_t j = i;
    for (; j < cells.size() && cells[j].first.from == k.from && cells[j].first.action == k.action &&
           cells[j].first.to == k.to;
         ++j) {
      const double c = static_cast<double>(cells[j].second);
      weighted += c * rewards.value(cells[j].first.reward);
      n += c;
    }
    table.cells_.push_back({TransitionKey{k.from, k.action, k.to, 0}, weighted / n});
    i = j;
  }
  return table;
}

std::optional<std::uint32_t> MdpEstimate::index_of(const StateId& id) const {
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i] == id) return static_cast<std::uint32_t>(i);
  }
  return std::nullopt;
}

namespace {

MdpEstimate build(const CountTensor& counts, const RewardAlphabet& rewards, double gamma, std::optional<double> rmax_e) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument(fmt::format("discount {} outside [0, 1)", gamma));
  MdpEstimate mdp;
  mdp.gamma = gamma;
  mdp.num_actions = counts.num_actions();
  const auto realized = counts.realized_states();
  std::vector<std::uint32_t> compact(counts.state_capacity(), std::numeric_limits<std::uint32_t>::max());
  for (StateIndex s : realized) {
    compact[s] = static_cast<std::uint32_t>(mdp.states.size());
    mdp.states.push_back(StateId{counts.states().context(s), false});
    mdp.tensor_index.push_back(s);
  }
  if (rmax_e) {
    mdp.exploration = static_cast<std::uint32_t>(mdp.states.size());
    mdp.states.push_back(StateId::exploration_state());
  }
  const RewardTable r = estimate_R(counts, rewards);
  mdp.rows.resize(mdp.states.size() * mdp.num_actions);
  for (std::size_t i = 0; i < realized.size(); ++i) {
    const StateIndex s = realized[i];
    for (Symbol a = 0; a < mdp.num_actions; ++a) {
      auto& row = mdp.rows[i * mdp.num_actions + a];
      const double total = static_cast<double>(counts.row_total(s, a)) + (rmax_e ? 1.0 : 0.0);
      if (total <= 0.0) continue;
      for (const auto& e : counts.row(s, a)) {
        row.push_back({compact[e.to], static_cast<double>(e.count) / total, r.value_or_zero(s, a, e.to)});
      }
      std::sort(row.begin(), row.end(), [](const auto& x, const auto& y) { return x.to < y.to; });
      if (rmax_e) row.push_back({*mdp.exploration, 1.0 / total, *rmax_e});
    }
  }
  if (rmax_e) {
    for (Symbol a = 0; a < mdp.num_actions; ++a) {
      mdp.rows[static_cast<std::size_t>(*mdp.exploration) * mdp.num_actions + a].push_back(
          {*mdp.exploration, 1.0, *rmax_e});
    }
  }
  return mdp;
}

}  // namespace

MdpEstimate build_mdp(const CountTensor& counts, const RewardAlphabet& rewards, double gamma) {
  return build(counts, rewards, gamma, std::nullopt);
}

MdpEstimate extend_for_exploration(const CountTensor& counts, const RewardAlphabet& rewards, double rmax_e,
                                   double gamma) {
  if (rmax_e < rewards.max_value()) {
    throw std::invalid_argument(fmt::format("Rmax_e {} below the largest reward {}", rmax_e, rewards.max_value()));
  }
  return build(counts, rewards, gamma, rmax_e);
}

void write_mdp_csv(std::ostream& out, const MdpEstimate& mdp, const Alphabets& alphabets) {
  out << "s,a,s',p,r\n";
  for (std::size_t s = 0; s < mdp.num_states(); ++s) {
    for (std::size_t a = 0; a < mdp.num_actions; ++a) {
      for (const auto& e : mdp.row(s, a)) {
        out << fmt::format("{},{},{},{},{}\n", mdp.states[s].to_string(alphabets.observations),
                           alphabets.actions.label(static_cast<Symbol>(a)),
                           mdp.states[e.to].to_string(alphabets.observations), e.probability, e.reward);
      }
    }
  }
}

}  // namespace phimdp
