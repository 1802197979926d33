#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "phimdp/coding.hpp"
#include "phimdp/counts.hpp"
#include "phimdp/feature_map.hpp"
#include "phimdp/history.hpp"

namespace phimdp {

/// Cost(Phi | h) for a context-tree map, kept up to date under split/merge moves
/// and history growth without recounting the whole history.
///
/// A split or merge only relabels the time steps whose state is the split
/// member (or one of the merged children), so a proposal touches the rows of the
/// affected states and the reward columns of the affected destinations only.
/// The largest of the regrouped sets keeps its state index under the new
/// context, so a move that barely changes the partition costs little.
class CostModel {
 public:
  struct Proposal {
    Move move;
    double delta_state_bits = 0.0;
    double delta_reward_bits = 0.0;
    double delta() const { return delta_state_bits + delta_reward_bits; }

   private:
    friend class CostModel;
    std::uint64_t version = 0;
    // The largest affected group keeps its index and only changes context.
    std::optional<std::pair<StateIndex, Context>> rename;
    // Targets at or above kPlaceholder refer to fresh_contexts, interned on accept.
    std::vector<Context> fresh_contexts;
    std::vector<std::pair<std::uint32_t, StateIndex>> relabels;  // (time, new state), time ascending
    std::vector<std::pair<TransitionKey, std::int64_t>> cell_deltas;
  };

  CostModel(History h, ContextTreeMap phi);

  const History& history() const { return history_; }
  const ContextTreeMap& phi() const { return phi_; }
  const CountTensor& counts() const { return counts_; }
  /// s_1..s_n as indices into counts().states().
  std::span<const StateIndex> labels() const { return labels_; }
  StateIndex current_state() const { return labels_.back(); }

  CostBreakdown cost() const;
  /// Recomputed from the current counts; equals cost() up to rounding.
  CostBreakdown recompute() const { return phimdp::cost(counts_); }

  /// Evaluates the move without changing the model.
  Proposal propose(const Move& move);
  /// Applies a proposal produced by propose() on the unchanged model.
  void accept(const Proposal& p);
  /// Grows the history by one cycle a r o.
  void extend(Symbol action, Symbol reward, Symbol observation);

 private:
  StateIndex label_of_last();
  double row_bits(StateIndex s, Symbol a) const { return row_code_length(counts_.row(s, a)); }
  double column_bits(StateIndex s) const { return code_length(counts_.reward_column(s)); }
  std::vector<std::uint32_t>& times(StateIndex s);

  History history_;
  ContextTreeMap phi_;
  CountTensor counts_;
  std::vector<StateIndex> labels_;
  std::vector<std::vector<std::uint32_t>> times_;  // time steps carrying each state
  std::vector<StateIndex> pending_;                // scratch, per time step
  double state_bits_ = 0.0;
  double reward_bits_ = 0.0;
  std::uint64_t version_ = 0;
};

}  // namespace phimdp
