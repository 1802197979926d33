#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "phimdp/counts.hpp"
#include "phimdp/feature_map.hpp"
#include "phimdp/history.hpp"

namespace phimdp {

/// T-hat_{ss'}^a = n_{ss'}^{a+} / n_{s+}^{a+}, or an all-zero row when (s, a) is unvisited.
/// Indexed by the tensor's state indices.
class TransitionTable {
 public:
  struct Entry {
    StateIndex to;
    double probability;
  };

  std::size_t num_states() const { return num_states_; }
  std::size_t num_actions() const { return num_actions_; }
  std::span<const Entry> row(StateIndex s, Symbol a) const;
  double probability(StateIndex s, Symbol a, StateIndex to) const;
  double row_sum(StateIndex s, Symbol a) const;

 private:
  friend TransitionTable estimate_T(const CountTensor& counts);
  std::size_t num_states_ = 0;
  std::size_t num_actions_ = 0;
  std::vector<std::vector<Entry>> rows_;
};

/// R-hat_{ss'}^a = sum_r' r' n_{ss'}^{ar'} / n_{ss'}^{a+}; absent for unrealized cells.
class RewardTable {
 public:
  std::optional<double> expected(StateIndex s, Symbol a, StateIndex to) const;
  /// Missing cells read as 0.
  double value_or_zero(StateIndex s, Symbol a, StateIndex to) const { return expected(s, a, to).value_or(0.0); }
  std::size_t size() const { return cells_.size(); }

 private:
  friend RewardTable estimate_R(const CountTensor& counts, const RewardAlphabet& rewards);
  struct Cell {
    TransitionKey key;  // reward field unused
    double value;
  };
  std::vector<Cell> cells_;  // sorted by key
};

TransitionTable estimate_T(const CountTensor& counts);
RewardTable estimate_R(const CountTensor& counts, const RewardAlphabet& rewards);

struct Successor {
  std::uint32_t to;
  double probability;
  double reward;
};

/// Estimated MDP over the realized states (plus the exploration state when extended).
/// State i of the MDP corresponds to tensor_index[i].
struct MdpEstimate {
  std::vector<StateId> states;
  std::vector<StateIndex> tensor_index;  // per real state
  std::size_t num_actions = 0;
  std::vector<std::vector<Successor>> rows;  // index s * num_actions + a
  double gamma = 0.0;
  std::optional<std::uint32_t> exploration;  // index of e

  std::size_t num_states() const { return states.size(); }
  std::span<const Successor> row(std::size_t s, std::size_t a) const { return rows.at(s * num_actions + a); }
  std::optional<std::uint32_t> index_of(const StateId& id) const;
};

/// Plain estimate from T-hat and R-hat; unvisited rows stay all-zero.
MdpEstimate build_mdp(const CountTensor& counts, const RewardAlphabet& rewards, double gamma);

/// Adds the absorbing state e: each (s, a) gets one phantom transition to e with
/// reward rmax_e, and e loops to itself with reward rmax_e under every action.
/// The phantom counts live only in the returned model. Throws std::invalid_argument
/// when rmax_e < max reward.
MdpEstimate extend_for_exploration(const CountTensor& counts, const RewardAlphabet& rewards, double rmax_e,
                                   double gamma);

/// Debug dump `s,a,s',p,r`.
void write_mdp_csv(std::ostream& out, const MdpEstimate& mdp, const Alphabets& alphabets);

}  // namespace phimdp
