#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "phimdp/counts.hpp"
#include "phimdp/feature_map.hpp"
#include "phimdp/history.hpp"

namespace phimdp {

/// Code length in bits of an i.i.d. sequence with category counts n_i under
/// frequency estimates:  n H(n/n) + (m' - 1)/2 log n,  0 for n = 0,
/// where m' is the number of non-empty categories. Logs are base 2.
///
/// Computed as n log n - sum n_i log n_i, which needs no division.
template <typename Range, typename Proj>
double code_length_of(const Range& range, Proj count_of) {
  double total = 0.0;
  double sum_nlogn = 0.0;
  std::size_t nonempty = 0;
  for (const auto& item : range) {
    const auto c = static_cast<double>(count_of(item));
    if (c <= 0.0) continue;
    total += c;
    sum_nlogn += c * std::log2(c);
    ++nonempty;
  }
  if (total <= 0.0) return 0.0;
  const double log_n = std::log2(total);
  const double data_bits = std::max(0.0, total * log_n - sum_nlogn);
  return data_bits + 0.5 * static_cast<double>(nonempty - 1) * log_n;
}

double code_length(std::span<const std::uint64_t> counts);
inline double code_length(const std::vector<std::uint64_t>& counts) {
  return code_length(std::span<const std::uint64_t>(counts));
}

/// Code length of one (s, a) row of destination counts.
double row_code_length(std::span<const CountTensor::RowEntry> row);

struct CostBreakdown {
  double state_bits = 0.0;
  double reward_bits = 0.0;
  double total = 0.0;
};

/// CL(s | a) = sum over (s, a) of CL(n_{s.}^{a+}).
double state_code(const CountTensor& counts);
/// CL(r | s, a) = sum over s' of CL(n_{+s'}^{+.}).
double reward_code(const CountTensor& counts);
CostBreakdown cost(const CountTensor& counts);
CostBreakdown cost(const FeatureMap& phi, const History& h);

/// Candidate with minimal total cost; ties go to the smaller realized state
/// count, then to the earlier candidate. Throws std::invalid_argument when empty.
std::size_t best_phi_index(std::span<const FeatureMap> candidates, const History& h);
const FeatureMap& best_phi(std::span<const FeatureMap> candidates, const History& h);

}  // namespace phimdp
