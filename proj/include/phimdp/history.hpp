#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace phimdp {

/// Dense index of a symbol inside its alphabet.
using Symbol = std::uint32_t;

/// Ordered finite set of labeled symbols with dense indices 0..size-1.
class Alphabet {
 public:
  Alphabet() = default;
  explicit Alphabet(std::vector<std::string> labels);

  std::size_t size() const { return labels_.size(); }
  const std::string& label(Symbol s) const;
  Symbol index(std::string_view label) const;
  bool contains(std::string_view label) const;
  const std::vector<std::string>& labels() const { return labels_; }

  bool operator==(const Alphabet& other) const { return labels_ == other.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, Symbol> index_;
};

/// Reward alphabet: every symbol carries the real value used for planning.
/// Counting and coding only ever look at the index.
class RewardAlphabet : public Alphabet {
 public:
  RewardAlphabet() = default;
  /// Values are parsed from the labels.
  explicit RewardAlphabet(std::vector<std::string> labels);
  RewardAlphabet(std::vector<std::string> labels, std::vector<double> values);

  double value(Symbol r) const { return values_.at(r); }
  const std::vector<double>& values() const { return values_; }
  double max_value() const;

 private:
  std::vector<double> values_;
};

struct Alphabets {
  Alphabet observations;
  Alphabet actions;
  RewardAlphabet rewards;
};

/// Builds an alphabet from labels seen in data: numeric order when every
/// label parses as a number, lexicographic otherwise. Duplicates are dropped.
std::vector<std::string> canonical_label_order(std::vector<std::string> labels);

/// One full interaction cycle o_t a_t r_t.
struct Step {
  Symbol observation;
  Symbol action;
  Symbol reward;
  bool operator==(const Step&) const = default;
};

/// Interaction record o_1 a_1 r_1 ... o_{n-1} a_{n-1} r_{n-1} o_n.
///
/// Holds n observations and n-1 action/reward pairs. The reward r_t is the one
/// received after a_t, before o_{t+1}. Copies are independent values; append()
/// returns a new history and leaves the receiver untouched, extend() grows in
/// place for owners that do not share the object.
class History {
 public:
  History() = default;
  explicit History(std::shared_ptr<const Alphabets> alphabets);

  /// Starts a history with its first observation o_1.
  static History start(std::shared_ptr<const Alphabets> alphabets, Symbol first_observation);

  const Alphabets& alphabets() const { return *alphabets_; }
  const std::shared_ptr<const Alphabets>& alphabets_ptr() const { return alphabets_; }

  /// Number of observations n.
  std::size_t size() const { return observations_.size(); }
  bool empty() const { return observations_.empty(); }
  /// Number of complete (o, a, r) cycles, n-1 for n >= 1.
  std::size_t transitions() const { return actions_.size(); }

  /// 0-based accessors: observation(i) is o_{i+1}.
  Symbol observation(std::size_t i) const { return observations_.at(i); }
  Symbol action(std::size_t i) const { return actions_.at(i); }
  Symbol reward(std::size_t i) const { return rewards_.at(i); }
  Step step(std::size_t i) const;

  std::span<const Symbol> observations() const { return observations_; }
  std::span<const Symbol> actions() const { return actions_; }
  std::span<const Symbol> rewards() const { return rewards_; }

  /// Returns h a r o; *this is unchanged.
  [[nodiscard]] History append(Symbol action, Symbol reward, Symbol observation) const;
  /// Sets o_1 on an empty history and returns the result.
  [[nodiscard]] History append_first(Symbol observation) const;

  /// In-place versions of append/append_first.
  void extend(Symbol action, Symbol reward, Symbol observation);
  void extend_first(Symbol observation);

  /// The last min(k, n) observations, oldest first.
  std::vector<Symbol> suffix_observations(std::size_t k) const;

  /// FNV-1a digest of the full content, used to check purity of append.
  std::uint64_t digest() const;

  bool operator==(const History& other) const;

 private:
  void check_observation(Symbol o) const;
  void check_cycle(Symbol a, Symbol r) const;

  std::shared_ptr<const Alphabets> alphabets_;
  std::vector<Symbol> observations_;
  std::vector<Symbol> actions_;
  std::vector<Symbol> rewards_;
};

}  // namespace phimdp
