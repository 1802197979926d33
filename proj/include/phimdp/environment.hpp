#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "phimdp/history.hpp"
#include "phimdp/random.hpp"

namespace phimdp {

/// What the environment returns after an action: r_t and o_{t+1}.
struct Percept {
  Symbol observation;
  Symbol reward;
};

/// Finite environment driven by an external rng. Given the same rng state and
/// action sequence the percept sequence is identical.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual std::shared_ptr<const Alphabets> alphabets() const = 0;
  /// Restarts the environment and returns o_1.
  virtual Symbol reset(Rng& rng) = 0;
  virtual Percept step(Symbol action, Rng& rng) = 0;
};

/// Fair binary coin observations, single action, reward 2 o_{t-1} + o_t.
class TinyExampleEnv : public Environment {
 public:
  TinyExampleEnv();
  std::shared_ptr<const Alphabets> alphabets() const override { return alphabets_; }
  Symbol reset(Rng& rng) override;
  /// Throws std::invalid_argument for any action other than 0.
  Percept step(Symbol action, Rng& rng) override;

  Symbol previous() const { return previous_; }
  /// Forces the previous observation (test hook).
  void set_previous(Symbol o) { previous_ = o; }
  /// The reward law with observation labels equal to their values.
  static Symbol reward_for(Symbol previous, Symbol next) { return 2 * previous + next; }

 private:
  std::shared_ptr<const Alphabets> alphabets_;
  Symbol previous_ = 0;
};

/// Hidden-state MDP: transition rows, an observation per state and a reward
/// distribution per (s, a, s').
struct TabularModel {
  struct Outcome {
    std::size_t to;
    double probability;
  };
  struct RewardOutcome {
    Symbol reward;
    double probability;
  };

  std::vector<std::string> states;
  std::size_t start = 0;
  std::shared_ptr<const Alphabets> alphabets;
  std::vector<std::vector<Outcome>> transitions;  // index s * |A| + a
  std::vector<Symbol> observation;                // per state
  std::map<std::tuple<std::size_t, Symbol, std::size_t>, std::vector<RewardOutcome>> rewards;

  std::size_t num_actions() const { return alphabets->actions.size(); }
  /// Reward distribution of (s, a, s'); the reward labeled 0 when unlisted.
  std::vector<RewardOutcome> reward_distribution(std::size_t s, Symbol a, std::size_t to) const;
};

/// Sectioned text format:
///   [states]       one name per line
///   [actions]      one name per line (optional; default: order of first use)
///   [start]        initial state (optional; default: first state)
///   [transitions]  s,a,s',prob
///   [obs]          s,o
///   [rewards]      s,a,s',r[,prob]   unlisted transitions pay reward 0
/// '#' starts a comment. Errors are ParseError with the offending line.
TabularModel read_tabular_model(std::istream& in, const std::string& source = "<env>");
TabularModel load_tabular_model(const std::string& path);

class TabularEnv : public Environment {
 public:
  explicit TabularEnv(TabularModel model);
  std::shared_ptr<const Alphabets> alphabets() const override { return model_.alphabets; }
  Symbol reset(Rng& rng) override;
  Percept step(Symbol action, Rng& rng) override;

  const TabularModel& model() const { return model_; }
  std::size_t hidden_state() const { return state_; }

 private:
  TabularModel model_;
  std::size_t state_ = 0;
};

/// Text of a bundled fixture: "flip", "chain" or "bandit".
std::string_view builtin_env_text(std::string_view name);
TabularModel builtin_model(std::string_view name);

/// "tiny", a bundled fixture name, or "file:<path>".
std::unique_ptr<Environment> make_environment(std::string_view spec);

}  // namespace phimdp
