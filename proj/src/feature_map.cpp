#include "phimdp/feature_map.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "phimdp/errors.hpp"

namespace phimdp {

std::size_t ContextHash::operator()(const Context& c) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ c.size();
  for (Symbol s : c) {
    h ^= s + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

namespace {

bool single_char_labels(const Alphabet& alpha) {
  return std::all_of(alpha.labels().begin(), alpha.labels().end(), [](const std::string& l) { return l.size() == 1; });
}

}  // namespace

std::string format_context(const Context& c, const Alphabet& observations) {
  if (c.empty()) return "-";
  const bool compact = single_char_labels(observations);
  std::string out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!compact && i > 0) out += ' ';
    out += observations.label(c[i]);
  }
  return out;
}

Context parse_context(std::string_view text, const Alphabet& observations) {
  std::string s(text);
  std::istringstream tokens(s);
  std::vector<std::string> parts;
  for (std::string tok; tokens >> tok;) parts.push_back(tok);
  if (parts.empty()) throw std::invalid_argument("empty context");
  if (parts.size() == 1 && parts[0] == "-") return {};
  Context out;
  if (parts.size() == 1 && !observations.contains(parts[0]) && single_char_labels(observations)) {
    for (char ch : parts[0]) {
      const std::string label(1, ch);
      if (!observations.contains(label)) throw std::invalid_argument(fmt::format("unknown observation '{}'", label));
      out.push_back(observations.index(label));
    }
    return out;
  }
  for (const auto& p : parts) {
    if (!observations.contains(p)) throw std::invalid_argument(fmt::format("unknown observation '{}'", p));
    out.push_back(observations.index(p));
  }
  return out;
}

std::string StateId::to_string(const Alphabet& observations) const {
  return exploration ? std::string("<explore>") : format_context(context, observations);
}

ContextTreeMap::ContextTreeMap(std::size_t alphabet_size) : ContextTreeMap(alphabet_size, {Context{}}) {}

ContextTreeMap::ContextTreeMap(std::size_t alphabet_size, std::vector<Context> members)
    : alphabet_size_(alphabet_size), members_(std::move(members)) {
  if (alphabet_size_ == 0) throw std::invalid_argument("observation alphabet must be non-empty");
  build();
}

ContextTreeMap ContextTreeMap::full_depth(std::size_t alphabet_size, std::size_t k) {
  std::vector<Context> members{Context{}};
  for (std::size_t d = 0; d < k; ++d) {
    std::vector<Context> next;
    next.reserve(members.size() * alphabet_size);
    for (const auto& m : members) {
      for (Symbol o = 0; o < alphabet_size; ++o) {
        Context c{o};
        c.insert(c.end(), m.begin(), m.end());
        next.push_back(std::move(c));
      }
    }
    members = std::move(next);
  }
  return ContextTreeMap(alphabet_size, std::move(members));
}

void ContextTreeMap::build() {
  if (members_.empty()) throw std::invalid_argument("suffix set must be non-empty");
  std::sort(members_.begin(), members_.end());
  if (std::adjacent_find(members_.begin(), members_.end()) != members_.end()) {
    throw std::invalid_argument("suffix set contains a duplicate member");
  }
  nodes_.assign(1, Node{});
  leaf_of_.assign(members_.size(), -1);
  free_blocks_.clear();
  for (std::size_t m = 0; m < members_.size(); ++m) {
    const Context& s = members_[m];
    std::size_t node = 0;
    for (std::size_t i = s.size(); i-- > 0;) {
      if (s[i] >= alphabet_size_) throw std::invalid_argument("suffix set member uses a symbol outside the alphabet");
      if (nodes_[node].member >= 0) throw std::invalid_argument("suffix set is not suffix-free");
      if (nodes_[node].first_child < 0) {
        const std::int32_t block = allocate_block();
        nodes_[node].first_child = block;
      }
      node = static_cast<std::size_t>(nodes_[node].first_child) + s[i];
    }
    if (nodes_[node].first_child >= 0) throw std::invalid_argument("suffix set is not suffix-free");
    nodes_[node].member = static_cast<std::int32_t>(m);
    leaf_of_[m] = static_cast<std::int32_t>(node);
  }
  for (const auto& n : nodes_) {
    if (n.first_child < 0 && n.member < 0) throw std::invalid_argument("suffix set is not complete");
  }
}

std::int32_t ContextTreeMap::allocate_block() {
  if (!free_blocks_.empty()) {
    const std::int32_t block = free_blocks_.back();
    free_blocks_.pop_back();
    std::fill_n(nodes_.begin() + block, alphabet_size_, Node{});
    return block;
  }
  const auto block = static_cast<std::int32_t>(nodes_.size());
  nodes_.resize(nodes_.size() + alphabet_size_);
  return block;
}

void ContextTreeMap::add_member(Context c, std::int32_t node) {
  nodes_[static_cast<std::size_t>(node)].member = static_cast<std::int32_t>(members_.size());
  members_.push_back(std::move(c));
  leaf_of_.push_back(node);
}

void ContextTreeMap::remove_member(std::int32_t m) {
  const auto i = static_cast<std::size_t>(m);
  nodes_[static_cast<std::size_t>(leaf_of_[i])].member = -1;
  const std::size_t last = members_.size() - 1;
  if (i != last) {
    members_[i] = std::move(members_[last]);
    leaf_of_[i] = leaf_of_[last];
    nodes_[static_cast<std::size_t>(leaf_of_[i])].member = m;
  }
  members_.pop_back();
  leaf_of_.pop_back();
}

std::int32_t ContextTreeMap::find_node(const Context& s) const {
  std::size_t node = 0;
  for (std::size_t i = s.size(); i-- > 0;) {
    if (s[i] >= alphabet_size_ || nodes_[node].first_child < 0) return -1;
    node = static_cast<std::size_t>(nodes_[node].first_child) + s[i];
  }
  return static_cast<std::int32_t>(node);
}

std::vector<Context> ContextTreeMap::sorted_members() const {
  std::vector<Context> out = members_;
  std::sort(out.begin(), out.end());
  return out;
}

bool ContextTreeMap::operator==(const ContextTreeMap& other) const {
  return alphabet_size_ == other.alphabet_size_ && size() == other.size() && sorted_members() == other.sorted_members();
}

bool ContextTreeMap::contains(const Context& s) const {
  const std::int32_t node = find_node(s);
  return node >= 0 && nodes_[static_cast<std::size_t>(node)].member >= 0;
}

std::size_t ContextTreeMap::member_index(std::span<const Symbol> observations) const {
  if (observations.empty()) throw std::invalid_argument("feature map needs at least one observation");
  const std::size_t t = observations.size();
  std::size_t node = 0;
  std::size_t depth = 0;
  while (nodes_[node].member < 0) {
    const Symbol o = depth < t ? observations[t - 1 - depth] : 0;
    node = static_cast<std::size_t>(nodes_[node].first_child) + o;
    ++depth;
  }
  return static_cast<std::size_t>(nodes_[node].member);
}

Context ContextTreeMap::apply(const History& h, std::size_t t) const {
  if (t == 0 || t > h.size()) throw std::out_of_range("feature map needs a prefix with at least one observation");
  return state(h.observations().first(t));
}

void ContextTreeMap::split_in_place(const Context& s) {
  const std::int32_t node = find_node(s);
  if (node < 0 || nodes_[static_cast<std::size_t>(node)].member < 0) {
    throw std::invalid_argument("split: state is not a member of the suffix set");
  }
  remove_member(nodes_[static_cast<std::size_t>(node)].member);
  const std::int32_t block = allocate_block();
  nodes_[static_cast<std::size_t>(node)].first_child = block;
  for (Symbol o = 0; o < alphabet_size_; ++o) {
    Context c{o};
    c.insert(c.end(), s.begin(), s.end());
    add_member(std::move(c), block + static_cast<std::int32_t>(o));
  }
}

bool ContextTreeMap::can_merge(const Context& s) const {
  const std::int32_t node = find_node(s);
  if (node < 0) return false;
  const std::int32_t block = nodes_[static_cast<std::size_t>(node)].first_child;
  if (block < 0) return false;
  for (std::size_t o = 0; o < alphabet_size_; ++o) {
    if (nodes_[static_cast<std::size_t>(block) + o].member < 0) return false;
  }
  return true;
}

void ContextTreeMap::merge_in_place(const Context& s) {
  if (!can_merge(s)) throw std::invalid_argument("merge: not every one-symbol extension of the state is a member");
  const auto node = static_cast<std::size_t>(find_node(s));
  const std::int32_t block = nodes_[node].first_child;
  for (std::size_t o = 0; o < alphabet_size_; ++o) remove_member(nodes_[static_cast<std::size_t>(block) + o].member);
  free_blocks_.push_back(block);
  nodes_[node].first_child = -1;
  add_member(s, static_cast<std::int32_t>(node));
}

void ContextTreeMap::apply_move_in_place(const Move& move) {
  switch (move.kind) {
    case MoveKind::Split: split_in_place(move.site); break;
    case MoveKind::Merge: merge_in_place(move.site); break;
    case MoveKind::None: break;
  }
}

ContextTreeMap ContextTreeMap::split(const Context& s) const {
  ContextTreeMap out(*this);
  out.split_in_place(s);
  return out;
}

ContextTreeMap ContextTreeMap::merge(const Context& s) const {
  ContextTreeMap out(*this);
  out.merge_in_place(s);
  return out;
}

ContextTreeMap ContextTreeMap::apply_move(const Move& move) const {
  ContextTreeMap out(*this);
  out.apply_move_in_place(move);
  return out;
}

Context state_of(const FeatureMap& phi, std::span<const Symbol> observations) {
  if (const auto* k = std::get_if<KOrderMap>(&phi)) {
    const std::size_t len = std::min(k->k, observations.size());
    return Context(observations.end() - static_cast<std::ptrdiff_t>(len), observations.end());
  }
  return std::get<ContextTreeMap>(phi).state(observations);
}

Context apply(const FeatureMap& phi, const History& h, std::size_t t) {
  if (t == 0 || t > h.size()) throw std::out_of_range("feature map needs a prefix with at least one observation");
  return state_of(phi, h.observations().first(t));
}

Move propose_move(const ContextTreeMap& phi, Rng& rng) {
  return propose_move_at(phi, phi.members()[uniform_index(rng, phi.size())], rng);
}

Move propose_move_at(const ContextTreeMap& phi, const Context& s, Rng& rng) {
  if (!phi.contains(s)) throw std::invalid_argument("proposal site is not a member of the suffix set");
  const double p = uniform_open_closed(rng);
  if (p > 0.5) return Move{MoveKind::Split, s};
  if (!s.empty()) {
    Context parent(s.begin() + 1, s.end());
    if (phi.can_merge(parent)) return Move{MoveKind::Merge, std::move(parent)};
  }
  return Move{};
}

Neighbor random_neighbor(const ContextTreeMap& phi, Rng& rng) {
  Move move = propose_move(phi, rng);
  // A None move can only come from the merge branch.
  const bool split_branch = move.kind == MoveKind::Split;
  return Neighbor{phi.apply_move(move), std::move(move), split_branch};
}

ContextTreeMap read_suffix_set(std::istream& in, const Alphabet& observations, const std::string& source) {
  std::vector<Context> members;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      members.push_back(parse_context(line, observations));
    } catch (const std::invalid_argument& e) {
      throw ParseError(source, lineno, e.what());
    }
  }
  try {
    return ContextTreeMap(observations.size(), std::move(members));
  } catch (const std::invalid_argument& e) {
    throw ParseError(source, 0, e.what());
  }
}

ContextTreeMap load_suffix_set(const std::string& path, const Alphabet& observations) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open suffix-set file '{}'", path));
  return read_suffix_set(in, observations, path);
}

void write_suffix_set(std::ostream& out, const ContextTreeMap& phi, const Alphabet& observations) {
  for (const auto& m : phi.sorted_members()) out << format_context(m, observations) << '\n';
}

}  // namespace phimdp
