#include "phimdp/counts.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

namespace phimdp {

namespace {

constexpr std::uint64_t kStateBits = 24;
constexpr std::uint64_t kSymbolBits = 8;
constexpr std::uint64_t kMaxStates = 1ULL << kStateBits;
constexpr std::uint64_t kMaxSymbols = 1ULL << kSymbolBits;

}  // namespace

StateIndex StateTable::intern(const Context& c) {
  auto [it, inserted] = index_.try_emplace(c, static_cast<StateIndex>(contexts_.size()));
  if (inserted) {
    if (contexts_.size() >= kMaxStates) throw std::length_error("too many distinct states");
    contexts_.push_back(c);
  }
  return it->second;
}

std::optional<StateIndex> StateTable::find(const Context& c) const {
  auto it = index_.find(c);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void StateTable::rename(StateIndex s, const Context& c) {
  if (s >= contexts_.size()) throw std::out_of_range("rename of unknown state");
  if (auto it = index_.find(contexts_[s]); it != index_.end() && it->second == s) index_.erase(it);
  index_[c] = s;
  contexts_[s] = c;
}

CountTensor::CountTensor(std::size_t num_actions, std::size_t num_rewards)
    : num_actions_(num_actions), num_rewards_(num_rewards) {
  if (num_actions == 0 || num_rewards == 0) throw std::invalid_argument("action and reward alphabets must be non-empty");
  if (num_actions > kMaxSymbols || num_rewards > kMaxSymbols) {
    throw std::invalid_argument(fmt::format("at most {} actions and rewards are supported", kMaxSymbols));
  }
}

StateIndex CountTensor::intern(const Context& c) {
  const StateIndex s = states_.intern(c);
  ensure_state(s);
  return s;
}

void CountTensor::ensure_state(StateIndex s) {
  const std::size_t need = static_cast<std::size_t>(s) + 1;
  if (occupancy_.size() >= need) return;
  const std::size_t cap = std::max(need, states_.size());
  occupancy_.resize(cap, 0);
  rows_.resize(cap * num_actions_);
  row_totals_.resize(cap * num_actions_, 0);
  reward_columns_.resize(cap * num_rewards_, 0);
}

std::uint64_t CountTensor::pack(const TransitionKey& k) const {
  return (static_cast<std::uint64_t>(k.from) << (kStateBits + 2 * kSymbolBits)) |
         (static_cast<std::uint64_t>(k.to) << (2 * kSymbolBits)) | (static_cast<std::uint64_t>(k.action) << kSymbolBits) |
         static_cast<std::uint64_t>(k.reward);
}

TransitionKey CountTensor::unpack(std::uint64_t key) const {
  const std::uint64_t mask_s = kMaxStates - 1;
  const std::uint64_t mask_y = kMaxSymbols - 1;
  return TransitionKey{static_cast<StateIndex>((key >> (kStateBits + 2 * kSymbolBits)) & mask_s),
                       static_cast<Symbol>((key >> kSymbolBits) & mask_y),
                       static_cast<StateIndex>((key >> (2 * kSymbolBits)) & mask_s), static_cast<Symbol>(key & mask_y)};
}

void CountTensor::add(const TransitionKey& key, std::int64_t delta) {
  if (delta == 0) return;
  if (key.action >= num_actions_ || key.reward >= num_rewards_) throw std::out_of_range("transition symbol out of range");
  if (key.from >= states_.size() || key.to >= states_.size()) throw std::out_of_range("transition state not interned");
  ensure_state(std::max(key.from, key.to));

  auto apply = [delta](std::uint64_t& v) {
    if (delta < 0 && v < static_cast<std::uint64_t>(-delta)) throw std::logic_error("count would become negative");
    v = static_cast<std::uint64_t>(static_cast<std::int64_t>(v) + delta);
  };

  const std::uint64_t packed = pack(key);
  auto& cell = cells_[packed];
  apply(cell);
  if (cell == 0) cells_.erase(packed);

  const std::size_t r = static_cast<std::size_t>(key.from) * num_actions_ + key.action;
  auto& row = rows_[r];
  auto it = std::find_if(row.begin(), row.end(), [&](const RowEntry& e) { return e.to == key.to; });
  if (it == row.end()) {
    row.push_back(RowEntry{key.to, 0});
    it = row.end() - 1;
  }
  apply(it->count);
  if (it->count == 0) row.erase(it);
  apply(row_totals_[r]);
  apply(reward_columns_[static_cast<std::size_t>(key.to) * num_rewards_ + key.reward]);
  apply(total_);
}

void CountTensor::add_occupancy(StateIndex s, std::int64_t delta) {
  if (s >= states_.size()) throw std::out_of_range("state not interned");
  ensure_state(s);
  auto& v = occupancy_[s];
  if (delta < 0 && v < static_cast<std::uint64_t>(-delta)) throw std::logic_error("occupancy would become negative");
  v = static_cast<std::uint64_t>(static_cast<std::int64_t>(v) + delta);
}

std::uint64_t CountTensor::count(const TransitionKey& key) const {
  if (key.from >= kMaxStates || key.to >= kMaxStates || key.action >= num_actions_ || key.reward >= num_rewards_) return 0;
  auto it = cells_.find(pack(key));
  return it == cells_.end() ? 0 : it->second;
}

std::uint64_t CountTensor::row_total(StateIndex s, Symbol a) const {
  const std::size_t r = static_cast<std::size_t>(s) * num_actions_ + a;
  return r < row_totals_.size() ? row_totals_[r] : 0;
}

std::span<const CountTensor::RowEntry> CountTensor::row(StateIndex s, Symbol a) const {
  const std::size_t r = static_cast<std::size_t>(s) * num_actions_ + a;
  if (r >= rows_.size()) return {};
  return rows_[r];
}

std::span<const std::uint64_t> CountTensor::reward_column(StateIndex to) const {
  const std::size_t off = static_cast<std::size_t>(to) * num_rewards_;
  if (off >= reward_columns_.size()) return {};
  return std::span<const std::uint64_t>(reward_columns_).subspan(off, num_rewards_);
}

std::vector<StateIndex> CountTensor::realized_states() const {
  std::vector<StateIndex> out;
  for (std::size_t s = 0; s < occupancy_.size(); ++s) {
    if (occupancy_[s] > 0) out.push_back(static_cast<StateIndex>(s));
  }
  return out;
}

std::vector<std::pair<TransitionKey, std::uint64_t>> CountTensor::cells() const {
  std::vector<std::pair<TransitionKey, std::uint64_t>> out;
  out.reserve(cells_.size());
  for (const auto& [k, v] : cells_) out.emplace_back(unpack(k), v);
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  return out;
}

void CountTensor::write_csv(std::ostream& out, const Alphabets& alphabets) const {
  out << "s,a,s',r,count\n";
  for (const auto& [k, v] : cells()) {
    out << format_context(states_.context(k.from), alphabets.observations) << ','
        << alphabets.actions.label(k.action) << ',' << format_context(states_.context(k.to), alphabets.observations)
        << ',' << alphabets.rewards.label(k.reward) << ',' << v << '\n';
  }
}

CountTensor accumulate(const FeatureMap& phi, const History& h, std::vector<StateIndex>& labels) {
  const auto& ab = h.alphabets();
  CountTensor counts(ab.actions.size(), ab.rewards.size());
  labels.clear();
  labels.reserve(h.size());
  auto obs = h.observations();
  for (std::size_t t = 1; t <= h.size(); ++t) {
    const auto prefix = obs.first(t);
    const auto* tree = std::get_if<ContextTreeMap>(&phi);
    const StateIndex s = tree ? counts.intern(tree->state(prefix)) : counts.intern(state_of(phi, prefix));
    counts.add_occupancy(s);
    if (!labels.empty()) {
      counts.add(TransitionKey{labels.back(), h.action(t - 2), s, h.reward(t - 2)});
    }
    labels.push_back(s);
  }
  return counts;
}

CountTensor accumulate(const FeatureMap& phi, const History& h) {
  std::vector<StateIndex> labels;
  return accumulate(phi, h, labels);
}

}  // namespace phimdp
