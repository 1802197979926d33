#include "phimdp/cost_model.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <tuple>

namespace phimdp {

namespace {

constexpr StateIndex kNone = std::numeric_limits<StateIndex>::max();
constexpr StateIndex kPlaceholder = StateIndex{1} << 30;

struct Entry {
  std::uint64_t key;
  std::uint64_t count;
};

// Code length of a row or column after applying the signed deltas.
template <typename Deltas>
double patched_length(std::vector<Entry>& scratch, const Deltas& deltas) {
  for (const auto& [key, d] : deltas) {
    auto it = std::find_if(scratch.begin(), scratch.end(), [&](const Entry& e) { return e.key == key; });
    if (it == scratch.end()) {
      scratch.push_back(Entry{key, 0});
      it = scratch.end() - 1;
    }
    it->count = static_cast<std::uint64_t>(static_cast<std::int64_t>(it->count) + d);
  }
  return code_length_of(scratch, [](const Entry& e) { return e.count; });
}

}  // namespace

CostModel::CostModel(History h, ContextTreeMap phi)
    : history_(std::move(h)), phi_(std::move(phi)), counts_(history_.alphabets().actions.size(),
                                                              history_.alphabets().rewards.size()) {
  if (history_.empty()) throw std::invalid_argument("cost model needs at least one observation");
  if (phi_.alphabet_size() != history_.alphabets().observations.size()) {
    throw std::invalid_argument("feature map alphabet differs from the history's");
  }
  counts_ = accumulate(FeatureMap(phi_), history_, labels_);
  for (std::uint32_t t = 0; t < labels_.size(); ++t) times(labels_[t]).push_back(t);
  pending_.assign(labels_.size(), kNone);
  state_bits_ = state_code(counts_);
  reward_bits_ = reward_code(counts_);
}

CostBreakdown CostModel::cost() const {
  return CostBreakdown{state_bits_, reward_bits_, state_bits_ + reward_bits_};
}

std::vector<std::uint32_t>& CostModel::times(StateIndex s) {
  if (s >= times_.size()) times_.resize(static_cast<std::size_t>(s) + 1);
  return times_[s];
}

CostModel::Proposal CostModel::propose(const Move& move) {
  if (move.kind == MoveKind::Split && !phi_.contains(move.site)) {
    throw std::invalid_argument("split: state is not a member of the suffix set");
  }
  if (move.kind == MoveKind::Merge && !phi_.can_merge(move.site)) {
    throw std::invalid_argument("merge: not every one-symbol extension of the state is a member");
  }
  Proposal p;
  p.move = move;
  p.version = version_;
  if (move.kind == MoveKind::None) return p;

  const auto obs = history_.observations();
  const std::size_t k = phi_.alphabet_size();
  auto with_prefix = [&](Symbol o) {
    Context c;
    c.reserve(move.site.size() + 1);
    c.push_back(o);
    c.insert(c.end(), move.site.begin(), move.site.end());
    return c;
  };
  auto fresh = [&](Context c) {
    p.fresh_contexts.push_back(std::move(c));
    return static_cast<StateIndex>(kPlaceholder + p.fresh_contexts.size() - 1);
  };

  if (move.kind == MoveKind::Split) {
    const auto s = counts_.states().find(move.site);
    if (!s || *s >= times_.size() || times_[*s].empty()) return p;
    const auto& list = times_[*s];
    const std::size_t len = move.site.size();
    // steps before the start of the history read observation 0
    auto preceding = [&](std::uint32_t t) { return t >= len ? obs[t - len] : Symbol{0}; };
    std::vector<std::size_t> group_size(k, 0);
    for (std::uint32_t t : list) ++group_size[preceding(t)];
    const auto keeper = static_cast<Symbol>(std::max_element(group_size.begin(), group_size.end()) - group_size.begin());
    p.rename.emplace(*s, with_prefix(keeper));
    std::vector<StateIndex> target(k, kNone);
    for (std::uint32_t t : list) {
      const Symbol o = preceding(t);
      if (o == keeper) continue;
      if (target[o] == kNone) target[o] = fresh(with_prefix(o));
      p.relabels.emplace_back(t, target[o]);
    }
  } else {
    std::vector<StateIndex> group;
    for (Symbol o = 0; o < k; ++o) {
      const auto c = counts_.states().find(with_prefix(o));
      if (c && *c < times_.size() && !times_[*c].empty()) group.push_back(*c);
    }
    if (group.empty()) return p;
    const StateIndex keeper = *std::max_element(
        group.begin(), group.end(), [&](StateIndex x, StateIndex y) { return times_[x].size() < times_[y].size(); });
    p.rename.emplace(keeper, move.site);
    for (StateIndex g : group) {
      if (g == keeper) continue;
      for (std::uint32_t t : times_[g]) p.relabels.emplace_back(t, keeper);
    }
  }
  if (p.relabels.empty()) return p;
  std::sort(p.relabels.begin(), p.relabels.end());

  for (const auto& [t, ns] : p.relabels) pending_[t] = ns;
  auto relabeled = [&](std::size_t t) { return pending_[t] != kNone ? pending_[t] : labels_[t]; };
  const std::size_t n = labels_.size();
  auto transition = [&](std::size_t i) {
    const TransitionKey before{labels_[i], history_.action(i), labels_[i + 1], history_.reward(i)};
    const TransitionKey after{relabeled(i), history_.action(i), relabeled(i + 1), history_.reward(i)};
    if (before != after) {
      p.cell_deltas.emplace_back(before, -1);
      p.cell_deltas.emplace_back(after, 1);
    }
  };
  for (const auto& [t, ns] : p.relabels) {
    if (t >= 1) transition(t - 1);
    if (t + 1 < n && pending_[t + 1] == kNone) transition(t);
  }
  for (const auto& [t, ns] : p.relabels) pending_[t] = kNone;

  // combine equal keys
  auto& d = p.cell_deltas;
  std::sort(d.begin(), d.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  std::size_t w = 0;
  for (std::size_t i = 0; i < d.size();) {
    std::size_t j = i;
    std::int64_t sum = 0;
    for (; j < d.size() && d[j].first == d[i].first; ++j) sum += d[j].second;
    if (sum != 0) d[w++] = {d[i].first, sum};
    i = j;
  }
  d.resize(w);

  // rows: d is sorted by (from, action, to, reward)
  std::vector<Entry> scratch;
  std::vector<std::pair<std::uint64_t, std::int64_t>> group;
  for (std::size_t i = 0; i < d.size();) {
    const StateIndex s = d[i].first.from;
    const Symbol a = d[i].first.action;
    group.clear();
    std::size_t j = i;
    for (; j < d.size() && d[j].first.from == s && d[j].first.action == a; ++j) group.emplace_back(d[j].first.to, d[j].second);
    scratch.clear();
    for (const auto& e : counts_.row(s, a)) scratch.push_back(Entry{e.to, e.count});
    p.delta_state_bits += patched_length(scratch, group) - row_bits(s, a);
    i = j;
  }

  // reward columns
  std::vector<std::pair<TransitionKey, std::int64_t>> by_dest(d);
  std::sort(by_dest.begin(), by_dest.end(), [](const auto& x, const auto& y) {
    return std::tie(x.first.to, x.first.reward) < std::tie(y.first.to, y.first.reward);
  });
  for (std::size_t i = 0; i < by_dest.size();) {
    const StateIndex s = by_dest[i].first.to;
    group.clear();
    std::size_t j = i;
    for (; j < by_dest.size() && by_dest[j].first.to == s; ++j) group.emplace_back(by_dest[j].first.reward, by_dest[j].second);
    scratch.clear();
    const auto column = counts_.reward_column(s);
    for (std::size_t r = 0; r < column.size(); ++r) {
      if (column[r] > 0) scratch.push_back(Entry{r, column[r]});
    }
    p.delta_reward_bits += patched_length(scratch, group) - column_bits(s);
    i = j;
  }
  return p;
}

void CostModel::accept(const Proposal& p) {
  if (p.version != version_) throw std::logic_error("stale cost model proposal");
  if (p.rename) counts_.states().rename(p.rename->first, p.rename->second);
  std::vector<StateIndex> resolved;
  for (const auto& c : p.fresh_contexts) {
    const StateIndex s = counts_.intern(c);
    if (counts_.occupancy(s) != 0) throw std::logic_error("fresh context is already in use");
    resolved.push_back(s);
  }
  auto resolve = [&](StateIndex s) { return s >= kPlaceholder ? resolved[s - kPlaceholder] : s; };
  for (const auto& [key, delta] : p.cell_deltas) {
    if (delta < 0) counts_.add(TransitionKey{resolve(key.from), key.action, resolve(key.to), key.reward}, delta);
  }
  for (const auto& [key, delta] : p.cell_deltas) {
    if (delta > 0) counts_.add(TransitionKey{resolve(key.from), key.action, resolve(key.to), key.reward}, delta);
  }
  std::vector<StateIndex> touched;
  for (const auto& [t, target] : p.relabels) {
    const StateIndex ns = resolve(target);
    const StateIndex old = labels_[t];
    counts_.add_occupancy(old, -1);
    counts_.add_occupancy(ns, 1);
    labels_[t] = ns;
    times(ns).push_back(t);
    if (std::find(touched.begin(), touched.end(), old) == touched.end()) touched.push_back(old);
  }
  for (StateIndex s : touched) {
    auto& list = times(s);
    std::erase_if(list, [&](std::uint32_t t) { return labels_[t] != s; });
  }
  state_bits_ += p.delta_state_bits;
  reward_bits_ += p.delta_reward_bits;
  phi_.apply_move_in_place(p.move);
  ++version_;
}

StateIndex CostModel::label_of_last() {
  return counts_.intern(phi_.state(history_.observations()));
}

void CostModel::extend(Symbol action, Symbol reward, Symbol observation) {
  history_.extend(action, reward, observation);
  const StateIndex prev = labels_.back();
  const StateIndex s = label_of_last();
  const double row_before = row_bits(prev, action);
  const double column_before = column_bits(s);
  counts_.add(TransitionKey{prev, action, s, reward});
  counts_.add_occupancy(s);
  state_bits_ += row_bits(prev, action) - row_before;
  reward_bits_ += column_bits(s) - column_before;
  const auto t = static_cast<std::uint32_t>(labels_.size());
  labels_.push_back(s);
  times(s).push_back(t);
  pending_.push_back(kNone);
  ++version_;
}

}  // namespace phimdp
