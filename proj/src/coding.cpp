#include "phimdp/coding.hpp"

#include <limits>
#include <stdexcept>

namespace phimdp {

double code_length(std::span<const std::uint64_t> counts) {
  return code_length_of(counts, [](std::uint64_t c) { return c; });
}

double row_code_length(std::span<const CountTensor::RowEntry> row) {
  return code_length_of(row, [](const CountTensor::RowEntry& e) { return e.count; });
}

double state_code(const CountTensor& counts) {
  double bits = 0.0;
  for (StateIndex s = 0; s < counts.state_capacity(); ++s) {
    for (Symbol a = 0; a < counts.num_actions(); ++a) bits += row_code_length(counts.row(s, a));
  }
  return bits;
}

double reward_code(const CountTensor& counts) {
  double bits = 0.0;
  for (StateIndex s = 0; s < counts.state_capacity(); ++s) bits += code_length(counts.reward_column(s));
  return bits;
}

CostBreakdown cost(const CountTensor& counts) {
  CostBreakdown out;
  out.state_bits = state_code(counts);
  out.reward_bits = reward_code(counts);
  out.total = out.state_bits + out.reward_bits;
  return out;
}

CostBreakdown cost(const FeatureMap& phi, const History& h) { return cost(accumulate(phi, h)); }

std::size_t best_phi_index(std::span<const FeatureMap> candidates, const History& h) {
  if (candidates.empty()) throw std::invalid_argument("best_phi needs at least one candidate");
  std::size_t best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  std::size_t best_states = std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const CountTensor counts = accumulate(candidates[i], h);
    const double c = cost(counts).total;
    const std::size_t m = counts.realized_states().size();
    if (c < best_cost || (c == best_cost && m < best_states)) {
      best = i;
      best_cost = c;
      best_states = m;
    }
  }
  return best;
}

const FeatureMap& best_phi(std::span<const FeatureMap> candidates, const History& h) {
  return candidates[best_phi_index(candidates, h)];
}

}  // namespace phimdp
