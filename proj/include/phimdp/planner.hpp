#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "phimdp/mdp.hpp"

namespace phimdp {

struct PlannerOptions {
  /// Bound on the sup-norm distance of the returned V to the fixed point.
  double tolerance = 1e-6;
  std::size_t max_iterations = 100000;
  /// Solve each state's self-loop in closed form inside the sweep
  /// (Jacobi value iteration). Same fixed point, never slower to contract.
  bool self_loop_elimination = true;
  bool record_residuals = false;
};

struct ValueSolution {
  std::vector<StateId> states;
  std::size_t num_actions = 0;
  std::vector<double> V;
  std::vector<double> Q;  // index s * num_actions + a
  double gamma = 0.0;
  std::size_t iterations = 0;
  /// Sup-norm change of the last sweep.
  double residual = 0.0;
  bool converged = false;
  std::vector<double> residuals;  // per sweep, when recorded

  double q(std::size_t s, std::size_t a) const { return Q.at(s * num_actions + a); }
  std::span<const double> q_row(std::size_t s) const {
    return std::span<const double>(Q).subspan(s * num_actions, num_actions);
  }
};

/// Synchronous sweeps of Q_s^a = sum_s' T_ss'^a [R_ss'^a + gamma V_s'], V_s = max_a Q_s^a.
///
/// Stops once a sweep changes V by at most tol * min(1, (1 - gamma) / gamma),
/// which bounds the distance to the fixed point by tol; V and Q come from one
/// final plain backup so V_s = max_a Q_s^a holds exactly. Rows must sum to 1 or
/// be empty (treated as terminal). `initial` warm-starts V.
ValueSolution value_iteration(const MdpEstimate& mdp, const PlannerOptions& options = {},
                              std::span<const double> initial = {});

/// Argmax of Q_s over actions, lowest index on ties.
std::size_t greedy_action(const ValueSolution& sol, std::size_t state);
/// Throws std::out_of_range when s is not one of the solution's states.
std::size_t greedy_action(const ValueSolution& sol, const StateId& s);

/// Debug dump `s,V,Q_0,...`.
void write_values_csv(std::ostream& out, const ValueSolution& sol, const Alphabets& alphabets);

}  // namespace phimdp
