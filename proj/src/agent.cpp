#include "phimdp/agent.hpp"

#include <algorithm>
#include <charconv>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace phimdp {

double GammaSchedule::at(std::size_t n) const {
  if (kind == Kind::Fixed) return fixed;
  return 1.0 - 1.0 / static_cast<double>(n + 1);
}

GammaSchedule GammaSchedule::parse(std::string_view text) {
  if (text == "default") return GammaSchedule{};
  double g = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), g);
  if (ec != std::errc() || ptr != text.data() + text.size() || !(g >= 0.0 && g < 1.0)) {
    throw std::invalid_argument(fmt::format("gamma schedule '{}' is neither 'default' nor a number in [0, 1)", text));
  }
  return GammaSchedule{Kind::Fixed, g};
}

Agent::Agent(std::shared_ptr<const Alphabets> alphabets, AgentConfig config)
    : alphabets_(std::move(alphabets)), config_(config), rng_(derive_rng(config.seed, 2)) {
  if (!(config_.rmax_poly_coeff > 0.0)) throw std::invalid_argument("rmax_poly_coeff must be positive");
  if (!(config_.planner_relative_tolerance > 0.0)) throw std::invalid_argument("planner tolerance must be positive");
}

Symbol Agent::start(Symbol first_observation) {
  if (search_) throw std::logic_error("agent already started");
  search_.emplace(History::start(alphabets_, first_observation), ContextTreeMap(alphabets_->observations.size()),
                  config_.criterion);
  return last_action_ = plan();
}

Symbol Agent::step(Symbol reward, Symbol observation) {
  if (!search_) throw std::logic_error("agent not started");
  for (std::size_t i = 0; i < config_.improve_iters_per_step; ++i) search_->improve(rng_);
  search_->extend(last_action_, reward, observation);
  return last_action_ = plan();
}

Symbol Agent::plan() {
  const auto& model = search_->model();
  const std::size_t n = model.history().size() - 1;
  gamma_ = config_.gamma_schedule.at(n);
  const auto& rewards = alphabets_->rewards;
  const double max_r = rewards.max_value();
  const std::size_t states = model.counts().realized_states().size();
  const double sa = static_cast<double>(states * alphabets_->actions.size());
  rmax_e_ = std::max(max_r, config_.rmax_poly_coeff / (1.0 - gamma_) * sa * max_r);

  // previous values by state, for the warm start
  std::unordered_map<Context, double, ContextHash> previous;
  double previous_e = 0.0;
  for (std::size_t i = 0; i < values_.states.size(); ++i) {
    if (values_.states[i].exploration) {
      previous_e = values_.V[i];
    } else {
      previous.emplace(values_.states[i].context, values_.V[i]);
    }
  }

  mdp_ = config_.exploration ? extend_for_exploration(model.counts(), rewards, rmax_e_, gamma_)
                             : build_mdp(model.counts(), rewards, gamma_);
  std::vector<double> warm(mdp_.num_states(), 0.0);
  for (std::size_t i = 0; i < mdp_.num_states(); ++i) {
    if (mdp_.states[i].exploration) {
      warm[i] = previous_e;
    } else if (auto it = previous.find(mdp_.states[i].context); it != previous.end()) {
      warm[i] = it->second;
    }
  }

  PlannerOptions options;
  const double scale = std::max(1.0, std::max(std::abs(rmax_e_), std::abs(max_r)) / (1.0 - gamma_));
  options.tolerance = config_.planner_relative_tolerance * scale;
  options.max_iterations = config_.planner_max_iterations;
  values_ = value_iteration(mdp_, options, warm);
  if (!values_.converged) {
    spdlog::warn("value iteration stopped at n={} after {} sweeps, residual {}", n, values_.iterations,
                 values_.residual);
  }

  const StateIndex current = model.current_state();
  const auto it = std::find(mdp_.tensor_index.begin(), mdp_.tensor_index.end(), current);
  if (it == mdp_.tensor_index.end()) throw std::logic_error("current state missing from the estimated MDP");
  const auto action = static_cast<Symbol>(greedy_action(values_, static_cast<std::size_t>(it - mdp_.tensor_index.begin())));
  spdlog::debug("n={} phi={} states={} gamma={} Rmax_e={} sweeps={} a={}", n, phi().size(), states, gamma_, rmax_e_,
                values_.iterations, alphabets_->actions.label(action));
  return action;
}

std::vector<StateId> Agent::realized_states() const {
  std::vector<StateId> out;
  const auto& counts = search_->model().counts();
  for (StateIndex s : counts.realized_states()) out.push_back(StateId{counts.states().context(s), false});
  return out;
}

StateId Agent::current_state() const {
  const auto& model = search_->model();
  return StateId{model.counts().states().context(model.current_state()), false};
}

double EpisodeResult::average_reward(std::size_t first, std::size_t last) const {
  last = std::min(last, history.transitions());
  if (first < 1) first = 1;
  if (first > last) return 0.0;
  double sum = 0.0;
  for (std::size_t t = first; t <= last; ++t) sum += history.alphabets().rewards.value(history.reward(t - 1));
  return sum / static_cast<double>(last - first + 1);
}

EpisodeResult run_episode(Environment& env, std::size_t steps, const AgentConfig& config) {
  if (steps < 1) throw std::invalid_argument("an episode needs at least one step");
  Rng env_rng = derive_rng(config.seed, 1);
  auto alphabets = env.alphabets();
  Agent agent(alphabets, config);
  Symbol action = agent.start(env.reset(env_rng));
  EpisodeResult result;
  result.metrics.reserve(steps);
  const std::size_t window = std::max<std::size_t>(1, config.reward_window);
  std::vector<double> recent;
  double window_sum = 0.0;
  for (std::size_t i = 1; i <= steps; ++i) {
    const Percept p = env.step(action, env_rng);
    action = agent.step(p.reward, p.observation);
    const double r = alphabets->rewards.value(p.reward);
    recent.push_back(r);
    window_sum += r;
    if (recent.size() > window) window_sum -= recent[recent.size() - window - 1];
    const std::size_t in_window = std::min(recent.size(), window);
    result.metrics.push_back(MetricsRow{i, window_sum / static_cast<double>(in_window),
                                        agent.realized_states().size(), agent.cost_bits(), agent.gamma(),
                                        agent.rmax_e()});
  }
  result.history = agent.history();
  result.final_phi = agent.phi();
  result.final_cost = agent.cost_bits();
  return result;
}

void write_metrics(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << "n,avg_reward_window,states,cost_bits,gamma,Rmax_e\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{},{},{}\n", r.n, r.avg_reward_window, r.states, r.cost_bits, r.gamma, r.rmax_e);
  }
}

}  // namespace phimdp
