#include "phimdp/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

namespace phimdp {

namespace {

constexpr double kRowSlack = 1e-9;

void check_rows(const MdpEstimate& mdp) {
  if (mdp.rows.size() != mdp.num_states() * mdp.num_actions) throw std::invalid_argument("MDP row table has wrong size");
  for (std::size_t i = 0; i < mdp.rows.size(); ++i) {
    double sum = 0.0;
    for (const auto& e : mdp.rows[i]) {
      if (e.to >= mdp.num_states()) throw std::invalid_argument("MDP successor out of range");
      if (!(e.probability >= 0.0)) throw std::invalid_argument("negative transition probability");
      if (!std::isfinite(e.reward)) throw std::invalid_argument("non-finite reward");
      sum += e.probability;
    }
    if (!mdp.rows[i].empty() && std::abs(sum - 1.0) > kRowSlack) {
      throw std::invalid_argument(fmt::format("row of state {} action {} sums to {}", i / mdp.num_actions,
                                              i % mdp.num_actions, sum));
    }
  }
}

}  // namespace

ValueSolution value_iteration(const MdpEstimate& mdp, const PlannerOptions& options, std::span<const double> initial) {
  const double gamma = mdp.gamma;
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument(fmt::format("discount {} outside [0, 1)", gamma));
  if (!(options.tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  check_rows(mdp);

  const std::size_t m = mdp.num_states();
  const std::size_t na = mdp.num_actions;
  ValueSolution sol;
  sol.states = mdp.states;
  sol.num_actions = na;
  sol.gamma = gamma;
  sol.V.assign(m, 0.0);
  if (!initial.empty()) {
    if (initial.size() != m) throw std::invalid_argument("warm start has wrong size");
    std::copy(initial.begin(), initial.end(), sol.V.begin());
  }

  // immediate expected reward and self-loop probability per row
  std::vector<double> base(m * na, 0.0);
  std::vector<double> self(m * na, 0.0);
  for (std::size_t s = 0; s < m; ++s) {
    for (std::size_t a = 0; a < na; ++a) {
      for (const auto& e : mdp.row(s, a)) {
        base[s * na + a] += e.probability * e.reward;
        if (e.to == s) self[s * na + a] += e.probability;
      }
    }
  }

  const double threshold = options.tolerance * (gamma > 0.0 ? std::min(1.0, (1.0 - gamma) / gamma) : 1.0);
  std::vector<double> next(m, 0.0);
  sol.residual = std::numeric_limits<double>::infinity();
  while (sol.iterations < options.max_iterations) {
    double change = 0.0;
    for (std::size_t s = 0; s < m; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < na; ++a) {
        const auto row = mdp.row(s, a);
        double q = base[s * na + a];
        if (options.self_loop_elimination) {
          for (const auto& e : row) {
            if (e.to != s) q += gamma * e.probability * sol.V[e.to];
          }
          q /= 1.0 - gamma * self[s * na + a];
        } else {
          for (const auto& e : row) q += gamma * e.probability * sol.V[e.to];
        }
        best = std::max(best, q);
      }
      if (na == 0) best = 0.0;
      next[s] = best;
      change = std::max(change, std::abs(best - sol.V[s]));
    }
    sol.V.swap(next);
    ++sol.iterations;
    sol.residual = change;
    if (options.record_residuals) sol.residuals.push_back(change);
    if (change <= threshold) {
      sol.converged = true;
      break;
    }
  }
  if (m == 0) {
    sol.residual = 0.0;
    sol.converged = true;
  }

  sol.Q.assign(m * na, 0.0);
  for (std::size_t s = 0; s < m; ++s) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < na; ++a) {
      double q = base[s * na + a];
      for (const auto& e : mdp.row(s, a)) q += gamma * e.probability * sol.V[e.to];
      sol.Q[s * na + a] = q;
      best = std::max(best, q);
    }
    next[s] = na == 0 ? 0.0 : best;
  }
  sol.V.swap(next);
  return sol;
}

std::size_t greedy_action(const ValueSolution& sol, std::size_t state) {
  if (state >= sol.states.size()) throw std::out_of_range("state outside the solution");
  if (sol.num_actions == 0) throw std::invalid_argument("solution has no actions");
  const auto row = sol.q_row(state);
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

std::size_t greedy_action(const ValueSolution& sol, const StateId& s) {
  for (std::size_t i = 0; i < sol.states.size(); ++i) {
    if (sol.states[i] == s) return greedy_action(sol, i);
  }
  throw std::out_of_range("state not registered with the planner");
}

void write_values_csv(std::ostream& out, const ValueSolution& sol, const Alphabets& alphabets) {
  out << "s,V";
  for (std::size_t a = 0; a < sol.num_actions; ++a) out << ",Q_" << alphabets.actions.label(static_cast<Symbol>(a));
  out << '\n';
  for (std::size_t s = 0; s < sol.states.size(); ++s) {
    out << sol.states[s].to_string(alphabets.observations) << fmt::format(",{}", sol.V[s]);
    for (std::size_t a = 0; a < sol.num_actions; ++a) out << fmt::format(",{}", sol.q(s, a));
    out << '\n';
  }
}

}  // namespace phimdp
