#include "phimdp/icost.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace phimdp {

UFamily::UFamily(std::size_t states, std::size_t actions, std::size_t rewards)
    : states_(states), actions_(actions), rewards_(rewards), matrices_(actions * rewards) {
  if (states == 0 || actions == 0 || rewards == 0) throw std::invalid_argument("U family dimensions must be positive");
}

void UFamily::add(Symbol a, Symbol r, std::size_t from, std::size_t to, double value) {
  if (a >= actions_ || r >= rewards_ || from >= states_ || to >= states_) {
    throw std::out_of_range("U entry index out of range");
  }
  if (!(value >= 0.0 && value <= 1.0)) throw std::invalid_argument("U entries must lie in [0, 1]");
  if (value == 0.0) return;
  matrices_[a * rewards_ + r].push_back(
      Entry{static_cast<std::uint32_t>(from), static_cast<std::uint32_t>(to), value});
}

std::span<const UFamily::Entry> UFamily::matrix(Symbol a, Symbol r) const {
  if (a >= actions_ || r >= rewards_) throw std::out_of_range("U matrix index out of range");
  return matrices_[a * rewards_ + r];
}

double UFamily::at(Symbol a, Symbol r, std::size_t from, std::size_t to) const {
  double v = 0.0;
  for (const auto& e : matrix(a, r)) {
    if (e.from == from && e.to == to) v += e.value;
  }
  return v;
}

double LogLikelihood::probability() const { return impossible ? 0.0 : std::exp2(log2_probability); }

LogLikelihood reward_log_likelihood(const UFamily& u, std::size_t s0, std::span<const Symbol> actions,
                                    std::span<const Symbol> rewards) {
  if (actions.size() != rewards.size()) throw std::invalid_argument("action and reward sequences differ in length");
  if (s0 >= u.states()) throw std::out_of_range("initial state outside U dimensions");
  std::vector<double> v(u.states(), 0.0);
  std::vector<double> next(u.states(), 0.0);
  v[s0] = 1.0;
  double log2p = 0.0;
  for (std::size_t t = 0; t < actions.size(); ++t) {
    if (actions[t] >= u.actions() || rewards[t] >= u.rewards()) {
      throw std::out_of_range(fmt::format("symbol at step {} outside U dimensions", t + 1));
    }
    std::fill(next.begin(), next.end(), 0.0);
    for (const auto& e : u.matrix(actions[t], rewards[t])) next[e.to] += v[e.from] * e.value;
    double z = 0.0;
    for (double x : next) z += x;
    if (z <= 0.0) return LogLikelihood{-std::numeric_limits<double>::infinity(), true};
    log2p += std::log2(z);
    for (double& x : next) x /= z;
    v.swap(next);
  }
  return LogLikelihood{log2p, false};
}

double reward_likelihood(const UFamily& u, std::size_t s0, std::span<const Symbol> actions,
                         std::span<const Symbol> rewards) {
  return reward_log_likelihood(u, s0, actions, rewards).probability();
}

std::uint64_t parameter_count(const CountTensor& counts, PenaltyMode mode) {
  if (mode == PenaltyMode::Full) {
    const std::uint64_t m = counts.realized_states().size();
    if (m == 0) return 0;
    return m * (m - 1) * counts.num_actions() * (counts.num_rewards() - 1);
  }
  const auto cells = counts.cells();
  std::uint64_t rows = 0;
  for (StateIndex s = 0; s < counts.state_capacity(); ++s) {
    for (Symbol a = 0; a < counts.num_actions(); ++a) rows += counts.row_total(s, a) > 0 ? 1 : 0;
  }
  return cells.size() - rows;
}

namespace {

std::vector<std::uint32_t> compact_index(const CountTensor& counts) {
  std::vector<std::uint32_t> compact(counts.state_capacity(), std::numeric_limits<std::uint32_t>::max());
  std::uint32_t next = 0;
  for (StateIndex s : counts.realized_states()) compact[s] = next++;
  return compact;
}

}  // namespace

UFamily estimate_u(const CountTensor& counts) {
  const auto compact = compact_index(counts);
  const std::size_t m = std::max<std::size_t>(1, counts.realized_states().size());
  UFamily u(m, counts.num_actions(), counts.num_rewards());
  for (const auto& [k, n] : counts.cells()) {
    const double denom = static_cast<double>(counts.row_total(k.from, k.action));
    u.add(k.action, k.reward, compact[k.from], compact[k.to], static_cast<double>(n) / denom);
  }
  return u;
}

ICostResult icost(const CountTensor& counts, std::span<const StateIndex> labels, const History& h, PenaltyMode mode) {
  if (labels.size() != h.size()) throw std::invalid_argument("state sequence length differs from history length");
  ICostResult out;
  out.parameters = parameter_count(counts, mode);
  const std::size_t n = h.transitions();
  if (n > 0) {
    const auto compact = compact_index(counts);
    const UFamily u = estimate_u(counts);
    const auto ll = reward_log_likelihood(u, compact[labels.front()], h.actions(), h.rewards());
    if (ll.impossible) {
      throw std::logic_error("ICost: realized reward sequence has zero probability under its own estimate");
    }
    out.neg_log_likelihood = std::max(0.0, -ll.log2_probability);
    out.parameter_penalty = 0.5 * static_cast<double>(out.parameters) * std::log2(static_cast<double>(n));
  }
  out.total = out.neg_log_likelihood + out.parameter_penalty;
  return out;
}

ICostResult icost(const FeatureMap& phi, const History& h, PenaltyMode mode) {
  std::vector<StateIndex> labels;
  const CountTensor counts = accumulate(phi, h, labels);
  return icost(counts, labels, h, mode);
}

}  // namespace phimdp
