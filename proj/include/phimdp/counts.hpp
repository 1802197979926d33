#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "phimdp/feature_map.hpp"
#include "phimdp/history.hpp"

namespace phimdp {

using StateIndex = std::uint32_t;

/// Interns contexts to dense state indices. Indices are never reused.
class StateTable {
 public:
  StateIndex intern(const Context& c);
  std::optional<StateIndex> find(const Context& c) const;
  /// Gives index s the context c. An index previously holding c is orphaned:
  /// it keeps its slot but is no longer found by context.
  void rename(StateIndex s, const Context& c);
  const Context& context(StateIndex s) const { return contexts_.at(s); }
  std::size_t size() const { return contexts_.size(); }

 private:
  std::unordered_map<Context, StateIndex, ContextHash> index_;
  std::vector<Context> contexts_;
};

/// One realized s -a-> s' (r') event.
struct TransitionKey {
  StateIndex from;
  Symbol action;
  StateIndex to;
  Symbol reward;
  auto operator<=>(const TransitionKey&) const = default;
};

/// Transition/reward counts n_{ss'}^{ar'} with the marginals the coders and
/// estimators read: n_{ss'}^{a+} (rows), n_{s+}^{a+} (row totals),
/// n_{+s'}^{+r'} (reward columns) and the total n_{++}^{++}.
///
/// Also tracks state occupancy (how many time steps carry each state), which
/// defines the realized state set.
class CountTensor {
 public:
  struct RowEntry {
    StateIndex to;
    std::uint64_t count;
  };

  CountTensor(std::size_t num_actions, std::size_t num_rewards);

  std::size_t num_actions() const { return num_actions_; }
  std::size_t num_rewards() const { return num_rewards_; }

  StateTable& states() { return states_; }
  const StateTable& states() const { return states_; }
  /// Interns c and sizes the per-state arrays.
  StateIndex intern(const Context& c);

  /// Adds delta (possibly negative) to one cell and all of its marginals.
  void add(const TransitionKey& key, std::int64_t delta = 1);
  void add_occupancy(StateIndex s, std::int64_t delta = 1);

  std::uint64_t count(const TransitionKey& key) const;
  std::uint64_t total() const { return total_; }
  std::uint64_t row_total(StateIndex s, Symbol a) const;
  /// Non-zero destination counts of row (s, a), unordered.
  std::span<const RowEntry> row(StateIndex s, Symbol a) const;
  /// Reward counts into s', indexed by reward symbol.
  std::span<const std::uint64_t> reward_column(StateIndex to) const;
  std::uint64_t occupancy(StateIndex s) const { return s < occupancy_.size() ? occupancy_[s] : 0; }

  /// Every state index that has been interned (including unrealized ones).
  std::size_t state_capacity() const { return states_.size(); }
  /// States with positive occupancy, in index order.
  std::vector<StateIndex> realized_states() const;

  /// All non-zero cells sorted by key.
  std::vector<std::pair<TransitionKey, std::uint64_t>> cells() const;

  /// Debug dump: `s,a,s',r,count`.
  void write_csv(std::ostream& out, const Alphabets& alphabets) const;

 private:
  std::uint64_t pack(const TransitionKey& k) const;
  TransitionKey unpack(std::uint64_t key) const;
  void ensure_state(StateIndex s);

  std::size_t num_actions_;
  std::size_t num_rewards_;
  StateTable states_;
  std::unordered_map<std::uint64_t, std::uint64_t> cells_;
  std::vector<std::vector<RowEntry>> rows_;  // index s * |A| + a
  std::vector<std::uint64_t> row_totals_;
  std::vector<std::uint64_t> reward_columns_;  // index s' * |R| + r
  std::vector<std::uint64_t> occupancy_;
  std::uint64_t total_ = 0;
};

/// Counts (s_t, a_t, s_{t+1}, r_t) for t = 1..n-1 where s_t = Phi(h_t). The
/// reward r_t is the one received after a_t together with o_{t+1}.
CountTensor accumulate(const FeatureMap& phi, const History& h);

/// State sequence s_1..s_n as indices into counts.states(), filled by accumulate.
CountTensor accumulate(const FeatureMap& phi, const History& h, std::vector<StateIndex>& labels);

}  // namespace phimdp
