#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "phimdp/environment.hpp"
#include "phimdp/mdp.hpp"
#include "phimdp/planner.hpp"
#include "phimdp/search.hpp"

namespace phimdp {

/// Discount as a function of the number of past observations n.
struct GammaSchedule {
  enum class Kind { Default, Fixed };
  Kind kind = Kind::Default;
  double fixed = 0.9;

  /// Default: 1 - 1/(n + 1).
  double at(std::size_t n) const;
  /// "default" or a number in [0, 1).
  static GammaSchedule parse(std::string_view text);
};

struct AgentConfig {
  std::size_t improve_iters_per_step = 10;
  GammaSchedule gamma_schedule;
  /// c in Rmax_e = c (1 - gamma)^-1 |S x A| max R, floored at max R.
  double rmax_poly_coeff = 1.0;
  std::uint64_t seed = 0;
  Criterion criterion = Criterion::Cost;
  /// false drops the exploration state (plain certainty-equivalent planning).
  bool exploration = true;
  /// Planner tolerance relative to Rmax_e / (1 - gamma), the largest possible value.
  double planner_relative_tolerance = 1e-9;
  std::size_t planner_max_iterations = 100000;
  std::size_t reward_window = 100;
};

/// The online loop: improve Phi on h_n, take in r_n o_{n+1}, plan on the
/// estimated (and exploration-extended) MDP, act greedily.
class Agent {
 public:
  Agent(std::shared_ptr<const Alphabets> alphabets, AgentConfig config);

  /// Takes o_1 and returns a_1 (the n = 0 step: Phi = epsilon, one state).
  Symbol start(Symbol first_observation);
  /// Takes r_n and o_{n+1} and returns a_{n+1}.
  Symbol step(Symbol reward, Symbol observation);

  const AgentConfig& config() const { return config_; }
  const History& history() const { return search_->history(); }
  const ContextTreeMap& phi() const { return search_->phi(); }
  const SearchState& search() const { return *search_; }
  double cost_bits() const { return search_->model().cost().total; }

  /// States of the current partition with positive occupancy.
  std::vector<StateId> realized_states() const;
  StateId current_state() const;

  double gamma() const { return gamma_; }
  double rmax_e() const { return rmax_e_; }
  const MdpEstimate& mdp() const { return mdp_; }
  const ValueSolution& values() const { return values_; }

 private:
  Symbol plan();

  std::shared_ptr<const Alphabets> alphabets_;
  AgentConfig config_;
  Rng rng_;
  std::optional<SearchState> search_;
  Symbol last_action_ = 0;
  double gamma_ = 0.0;
  double rmax_e_ = 0.0;
  MdpEstimate mdp_;
  ValueSolution values_;
};

struct MetricsRow {
  std::size_t n;
  double avg_reward_window;
  std::size_t states;
  double cost_bits;
  double gamma;
  double rmax_e;
};

struct EpisodeResult {
  History history;
  std::vector<MetricsRow> metrics;
  ContextTreeMap final_phi{1};
  double final_cost = 0.0;

  /// Mean reward value of r_first..r_last (1-based, inclusive, clipped to the history).
  double average_reward(std::size_t first, std::size_t last) const;
};

/// Runs `steps` agent-environment cycles. The environment draws from
/// derive_rng(seed, 1), the agent from derive_rng(seed, 2).
EpisodeResult run_episode(Environment& env, std::size_t steps, const AgentConfig& config);

/// `n,avg_reward_window,states,cost_bits,gamma,Rmax_e`.
void write_metrics(std::ostream& out, const std::vector<MetricsRow>& rows);

}  // namespace phimdp
