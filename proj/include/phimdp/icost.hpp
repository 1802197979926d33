#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "phimdp/counts.hpp"
#include "phimdp/feature_map.hpp"
#include "phimdp/history.hpp"

namespace phimdp {

/// The matrices U^{ar'}_{ss'} = T_{ss'}^a R_{ss'}^{ar'}, one sparse m x m
/// matrix per (action, reward) pair.
class UFamily {
 public:
  struct Entry {
    std::uint32_t from;
    std::uint32_t to;
    double value;
  };

  UFamily(std::size_t states, std::size_t actions, std::size_t rewards);

  std::size_t states() const { return states_; }
  std::size_t actions() const { return actions_; }
  std::size_t rewards() const { return rewards_; }

  /// Adds value to U^{ar}_{s s'}; entries must lie in [0, 1].
  void add(Symbol a, Symbol r, std::size_t from, std::size_t to, double value);
  std::span<const Entry> matrix(Symbol a, Symbol r) const;
  double at(Symbol a, Symbol r, std::size_t from, std::size_t to) const;

 private:
  std::size_t states_, actions_, rewards_;
  std::vector<std::vector<Entry>> matrices_;  // index a * |R| + r
};

struct LogLikelihood {
  double log2_probability = 0.0;  // -inf when impossible
  bool impossible = false;
  double probability() const;
};

/// log2 P_U(r_{1:n} | a_{1:n}) = log2 sum_{s_n} [U^{a_1 r_1} ... U^{a_n r_n}]_{s_0 s_n},
/// propagated left to right with per-step renormalization. O(nnz(U) n).
LogLikelihood reward_log_likelihood(const UFamily& u, std::size_t s0, std::span<const Symbol> actions,
                                    std::span<const Symbol> rewards);
/// Plain probability; underflows to 0 for long sequences.
double reward_likelihood(const UFamily& u, std::size_t s0, std::span<const Symbol> actions,
                         std::span<const Symbol> rewards);

enum class PenaltyMode { Full, Observed };

/// Number of independent parameters of the estimated U.
/// Full: m (m - 1) |A| (|R| - 1). Observed: realized (s, a, s', r') cells minus
/// one normalization constraint per realized (s, a) row.
std::uint64_t parameter_count(const CountTensor& counts, PenaltyMode mode);

struct ICostResult {
  double neg_log_likelihood = 0.0;  // bits
  double parameter_penalty = 0.0;   // bits, 1/2 M log n
  double total = 0.0;
  std::uint64_t parameters = 0;
};

/// U-hat_{ss'}^{ar'} = n_{ss'}^{ar'} / n_{s+}^{a+} over the realized states,
/// indexed in the order of counts.realized_states().
UFamily estimate_u(const CountTensor& counts);

/// ICost from already accumulated counts; labels is the state sequence s_1..s_n.
ICostResult icost(const CountTensor& counts, std::span<const StateIndex> labels, const History& h,
                  PenaltyMode mode = PenaltyMode::Observed);
ICostResult icost(const FeatureMap& phi, const History& h, PenaltyMode mode = PenaltyMode::Observed);

}  // namespace phimdp
