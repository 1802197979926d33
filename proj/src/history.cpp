#include "phimdp/history.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace phimdp {

namespace {

bool parse_number(std::string_view s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

Alphabet::Alphabet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw std::invalid_argument("alphabet must contain at least one symbol");
  index_.reserve(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i].empty()) throw std::invalid_argument("alphabet labels must be non-empty");
    auto [it, inserted] = index_.emplace(labels_[i], static_cast<Symbol>(i));
    if (!inserted) throw std::invalid_argument(fmt::format("duplicate alphabet label '{}'", labels_[i]));
  }
}

const std::string& Alphabet::label(Symbol s) const {
  if (s >= labels_.size()) {
    throw std::out_of_range(fmt::format("symbol index {} outside alphabet of size {}", s, labels_.size()));
  }
  return labels_[s];
}

Symbol Alphabet::index(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) throw std::out_of_range(fmt::format("unknown symbol label '{}'", label));
  return it->second;
}

bool Alphabet::contains(std::string_view label) const { return index_.count(std::string(label)) > 0; }

RewardAlphabet::RewardAlphabet(std::vector<std::string> labels) : Alphabet(labels) {
  values_.reserve(labels.size());
  for (const auto& l : labels) {
    double v = 0.0;
    if (!parse_number(l, v)) throw std::invalid_argument(fmt::format("reward label '{}' is not a number", l));
    values_.push_back(v);
  }
}

RewardAlphabet::RewardAlphabet(std::vector<std::string> labels, std::vector<double> values)
    : Alphabet(std::move(labels)), values_(std::move(values)) {
  if (values_.size() != size()) throw std::invalid_argument("reward alphabet needs one value per label");
}

double RewardAlphabet::max_value() const {
  return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

std::vector<std::string> canonical_label_order(std::vector<std::string> labels) {
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  const bool numeric = std::all_of(labels.begin(), labels.end(), [](const std::string& l) {
    double v = 0.0;
    return parse_number(l, v);
  });
  if (numeric) {
    std::stable_sort(labels.begin(), labels.end(), [](const std::string& a, const std::string& b) {
      double x = 0.0, y = 0.0;
      parse_number(a, x);
      parse_number(b, y);
      return x < y;
    });
  }
  return labels;
}

History::History(std::shared_ptr<const Alphabets> alphabets) : alphabets_(std::move(alphabets)) {
  if (!alphabets_) throw std::invalid_argument("history needs alphabets");
}

History History::start(std::shared_ptr<const Alphabets> alphabets, Symbol first_observation) {
  History h(std::move(alphabets));
  h.extend_first(first_observation);
  return h;
}

Step History::step(std::size_t i) const {
  return Step{observations_.at(i), actions_.at(i), rewards_.at(i)};
}

void History::check_observation(Symbol o) const {
  if (o >= alphabets_->observations.size()) {
    throw std::out_of_range(
        fmt::format("observation index {} outside alphabet of size {}", o, alphabets_->observations.size()));
  }
}

void History::check_cycle(Symbol a, Symbol r) const {
  if (a >= alphabets_->actions.size()) {
    throw std::out_of_range(fmt::format("action index {} outside alphabet of size {}", a, alphabets_->actions.size()));
  }
  if (r >= alphabets_->rewards.size()) {
    throw std::out_of_range(fmt::format("reward index {} outside alphabet of size {}", r, alphabets_->rewards.size()));
  }
}

History History::append(Symbol action, Symbol reward, Symbol observation) const {
  History next = *this;
  next.extend(action, reward, observation);
  return next;
}

History History::append_first(Symbol observation) const {
  History next = *this;
  next.extend_first(observation);
  return next;
}

void History::extend(Symbol action, Symbol reward, Symbol observation) {
  if (observations_.empty()) throw std::logic_error("history has no first observation to act on");
  check_cycle(action, reward);
  check_observation(observation);
  actions_.push_back(action);
  rewards_.push_back(reward);
  observations_.push_back(observation);
}

void History::extend_first(Symbol observation) {
  if (!alphabets_) throw std::logic_error("history has no alphabets");
  if (!observations_.empty()) throw std::logic_error("history already has a first observation");
  check_observation(observation);
  observations_.push_back(observation);
}

std::vector<Symbol> History::suffix_observations(std::size_t k) const {
  const std::size_t len = std::min(k, observations_.size());
  return {observations_.end() - static_cast<std::ptrdiff_t>(len), observations_.end()};
}

std::uint64_t History::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  mix(observations_.size());
  for (auto o : observations_) mix(o);
  for (auto a : actions_) mix(a);
  for (auto r : rewards_) mix(r);
  return h;
}

bool History::operator==(const History& other) const {
  const bool same_alphabets = alphabets_ == other.alphabets_ ||
                              (alphabets_ && other.alphabets_ &&
                               alphabets_->observations == other.alphabets_->observations &&
                               alphabets_->actions == other.alphabets_->actions &&
                               alphabets_->rewards == other.alphabets_->rewards);
  return same_alphabets && observations_ == other.observations_ && actions_ == other.actions_ &&
         rewards_ == other.rewards_;
}

}  // namespace phimdp
