#pragma once

// Power and type-I-error sweeps over the scenario grid. Replicates are the
// unit of parallelism; every replicate seed derives from (master seed, cell
// index, replicate index), so tables are identical for any worker count.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "htmmiow/mediation.hpp"
#include "htmmiow/reduce.hpp"
#include "htmmiow/simulate.hpp"

namespace htmmiow {

enum class TaxaRule { EqualN, DoubleN };

std::string to_string(TaxaRule rule);
TaxaRule parse_taxa_rule(const std::string& name);

struct SweepConfig {
  std::vector<int> n_grid{50, 70, 100, 150, 300, 500};
  TaxaRule p_rule = TaxaRule::EqualN;
  std::vector<double> effect_grid{0.5, 1, 5};
  std::vector<int> t_grid{1, 5, 10};
  std::vector<OutcomeFamily> families{OutcomeFamily::Continuous, OutcomeFamily::Dichotomous};
  std::vector<ReductionStrategy> strategies{ReductionStrategy::Umap};
  int n_sims = 200;
  int n_permutations = 200;
  std::vector<double> alpha_grid{0.05, 0.01};
  int n_components = 2;
  double pseudocount = 0.5;
  double frac_associated = 0.5;
  double exposure_mediator_effect = 3.0;
  double exposure_outcome_effect = 5.0;
  std::uint64_t master_seed = 0;
  int n_workers = 1;

  void validate() const;
};

struct PowerRow {
  int n = 0;
  int p = 0;
  int t = 0;
  double effect = 0;
  OutcomeFamily family = OutcomeFamily::Continuous;
  ReductionStrategy strategy = ReductionStrategy::Umap;
  double alpha = 0;
  double rejection_rate = 0;
  int n_sims_completed = 0;
  int n_failures = 0;
};

using PowerTable = std::vector<PowerRow>;

// One permutation test per replicate across the full grid; the rejection
// rate per alpha is the fraction of completed replicates with p <= alpha.
// progress, when non-null, receives one line per finished cell.
PowerTable run_power_sweep(const SweepConfig& config, std::ostream* progress = nullptr);

// Same machinery under the global null; rows carry t = 0 and effect = 0.
PowerTable run_type1_sweep(const SweepConfig& config, std::ostream* progress = nullptr);

// Long-format delimited text, fixed header, lexicographic row order;
// byte-identical across reruns with the same inputs.
void emit_results(const PowerTable& table, std::ostream& out);
PowerTable parse_results(std::istream& in);

}  // namespace htmmiow
