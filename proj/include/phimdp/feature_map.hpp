#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "phimdp/history.hpp"
#include "phimdp/random.hpp"

namespace phimdp {

/// Observation string in temporal order (oldest symbol first). The empty
/// context is the root state.
using Context = std::vector<Symbol>;

struct ContextHash {
  std::size_t operator()(const Context& c) const noexcept;
};

/// Renders a context with observation labels; the empty context is "-".
/// Labels are concatenated when all are single characters, space separated otherwise.
std::string format_context(const Context& c, const Alphabet& observations);
/// Inverse of format_context.
Context parse_context(std::string_view text, const Alphabet& observations);

/// A state produced by a feature map, or the synthetic exploration state.
struct StateId {
  Context context;
  bool exploration = false;

  static StateId exploration_state() { return StateId{{}, true}; }
  bool operator==(const StateId&) const = default;
  auto operator<=>(const StateId&) const = default;
  std::string to_string(const Alphabet& observations) const;
};

/// Phi_k: the last k observations.
struct KOrderMap {
  std::size_t k = 0;
  bool operator==(const KOrderMap&) const = default;
};

enum class MoveKind { None, Split, Merge };

/// Split of a member or merge of a full sibling set into `site`.
struct Move {
  MoveKind kind = MoveKind::None;
  Context site;
  bool operator==(const Move&) const = default;
};

/// Context-tree feature map over a complete suffix-free set of observation strings.
///
/// The reversed members form the leaves of a full |O|-ary trie, so the state of a
/// history is found by walking its observations backwards from the most recent
/// one. When the history runs out before a leaf is reached the walk continues as
/// if the history were preceded by observation 0, so every step gets a member.
class ContextTreeMap {
 public:
  /// The single-state map {epsilon}.
  explicit ContextTreeMap(std::size_t alphabet_size);
  /// Validates completeness and suffix-freeness; throws std::invalid_argument.
  ContextTreeMap(std::size_t alphabet_size, std::vector<Context> members);
  /// All strings of length k (equivalent to Phi_k).
  static ContextTreeMap full_depth(std::size_t alphabet_size, std::size_t k);

  std::size_t alphabet_size() const { return alphabet_size_; }
  /// Members in a deterministic working order: lexicographic after construction,
  /// shuffled by in-place moves (removals swap the last member into the gap).
  const std::vector<Context>& members() const { return members_; }
  std::vector<Context> sorted_members() const;
  std::size_t size() const { return members_.size(); }
  bool contains(const Context& s) const;

  /// Index into members() of the state of o_1..o_t (t >= 1).
  std::size_t member_index(std::span<const Symbol> observations) const;
  const Context& state(std::span<const Symbol> observations) const { return members_[member_index(observations)]; }
  /// Phi_S(h_t) for the prefix of length t (1 <= t <= h.size()).
  Context apply(const History& h, std::size_t t) const;
  Context apply(const History& h) const { return apply(h, h.size()); }

  /// S \ {s} u {o s : o in O}. Throws std::invalid_argument when s is not a member.
  ContextTreeMap split(const Context& s) const;
  /// S \ {o s : o in O} u {s}. Throws std::invalid_argument unless every o s is a member.
  ContextTreeMap merge(const Context& s) const;
  bool can_merge(const Context& s) const;
  ContextTreeMap apply_move(const Move& move) const;
  /// Same moves, applied to this map. Cost is O(|O| + |s|).
  void split_in_place(const Context& s);
  void merge_in_place(const Context& s);
  void apply_move_in_place(const Move& move);

  /// Set equality; the working order of members() is ignored.
  bool operator==(const ContextTreeMap& other) const;

 private:
  struct Node {
    std::int32_t first_child = -1;  // children occupy [first_child, first_child + |O|)
    std::int32_t member = -1;       // index into members_ for leaves
  };

  void build();
  std::int32_t find_node(const Context& s) const;
  std::int32_t allocate_block();
  void add_member(Context c, std::int32_t node);
  void remove_member(std::int32_t m);

  std::size_t alphabet_size_;
  std::vector<Context> members_;
  std::vector<std::int32_t> leaf_of_;  // node of each member
  std::vector<Node> nodes_;
  std::vector<std::int32_t> free_blocks_;
};

/// Either of the concrete map families.
using FeatureMap = std::variant<KOrderMap, ContextTreeMap>;

/// State of o_1..o_t: the last min(k, t) observations for Phi_k, the matching
/// member for a context tree.
Context state_of(const FeatureMap& phi, std::span<const Symbol> observations);
Context apply(const FeatureMap& phi, const History& h, std::size_t t);
inline Context apply(const FeatureMap& phi, const History& h) { return apply(phi, h, h.size()); }

/// Draws the member uniformly and p from (0, 1]. p > 1/2 proposes a split of
/// the member; otherwise a merge at the member's parent context when all of
/// its siblings are members, else no move.
Move propose_move(const ContextTreeMap& phi, Rng& rng);
/// The same draw of p for a given member s.
Move propose_move_at(const ContextTreeMap& phi, const Context& s, Rng& rng);

struct Neighbor {
  ContextTreeMap map;
  Move move;
  bool split_branch;  // p > 1/2 was drawn
};
Neighbor random_neighbor(const ContextTreeMap& phi, Rng& rng);

/// Suffix-set file: one context per line, epsilon written as '-'. '#' starts a comment.
ContextTreeMap read_suffix_set(std::istream& in, const Alphabet& observations,
                               const std::string& source = "<suffix-set>");
ContextTreeMap load_suffix_set(const std::string& path, const Alphabet& observations);
void write_suffix_set(std::ostream& out, const ContextTreeMap& phi, const Alphabet& observations);

}  // namespace phimdp
