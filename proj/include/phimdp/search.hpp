#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "phimdp/cost_model.hpp"
#include "phimdp/feature_map.hpp"
#include "phimdp/history.hpp"
#include "phimdp/icost.hpp"
#include "phimdp/random.hpp"

namespace phimdp {

enum class Criterion { Cost, ICost };

Criterion parse_criterion(std::string_view text);
std::string_view to_string(Criterion c);

/// Metropolis rule in bits: accept iff current - proposed > log2 q.
bool metropolis_accept(double current, double proposed, double q);

/// Owns a CostModel and evaluates the chosen criterion on it.
class SearchState {
 public:
  SearchState(History h, ContextTreeMap phi, Criterion criterion = Criterion::Cost,
              PenaltyMode penalty = PenaltyMode::Observed);

  CostModel& model() { return model_; }
  const CostModel& model() const { return model_; }
  const ContextTreeMap& phi() const { return model_.phi(); }
  const History& history() const { return model_.history(); }
  Criterion criterion() const { return criterion_; }

  /// Criterion value of the current map.
  double value();
  /// Grows the history by one cycle.
  void extend(Symbol action, Symbol reward, Symbol observation);

  struct Step {
    Move move;
    double current = 0.0;
    double proposed = 0.0;
    bool accepted = false;
  };
  /// One improvement step: draws s, p and q from rng and applies the Metropolis rule.
  Step improve(Rng& rng);

 private:
  CostModel model_;
  Criterion criterion_;
  PenaltyMode penalty_;
  std::optional<double> cached_;
};

/// Functional single step on (phi, h); returns the accepted or the original map.
ContextTreeMap phi_improve(const ContextTreeMap& phi, const History& h, Rng& rng,
                           Criterion criterion = Criterion::Cost);

struct SearchConfig {
  std::size_t iterations = 1000;
  Criterion criterion = Criterion::Cost;
  std::uint64_t seed = 0;
  std::size_t log_every = 1;
};

struct SearchTraceRow {
  std::size_t iteration;
  double cost;  // chain value after the step
  bool accepted;
  double incumbent_cost;
};

struct AnnealResult {
  ContextTreeMap final_map;
  ContextTreeMap incumbent;
  double final_cost;
  double incumbent_cost;
  double initial_cost;
  std::vector<SearchTraceRow> trace;  // every log_every-th iteration
};

/// Runs cfg.iterations improvement steps from phi0, keeping the best map seen.
AnnealResult anneal(const ContextTreeMap& phi0, const History& h, const SearchConfig& cfg);

/// `iter,cost,accepted`.
void write_search_log(std::ostream& out, const AnnealResult& result);

}  // namespace phimdp
