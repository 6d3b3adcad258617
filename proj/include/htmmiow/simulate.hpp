#pragma once

// Synthetic (exposure, microbiome, outcome) triples. Counts follow a
// per-taxon zero-inflated log-normal; a configurable fraction of taxa shift
// on the log scale with exposure; the outcome is driven by exposure plus
// standardized relative abundances of randomly chosen true mediator taxa.
// Everything is a pure function of (scenario, seed).

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "htmmiow/compositional.hpp"
#include "htmmiow/mediation.hpp"

namespace htmmiow {

struct SimScenario {
  int n_samples = 100;
  int n_taxa = 100;
  int n_true_mediators = 5;
  double frac_associated = 0.5;
  double exposure_mediator_effect = 3.0;
  double exposure_outcome_effect = 5.0;
  double mediator_outcome_effect = 1.0;
  OutcomeFamily family = OutcomeFamily::Continuous;
  // Forces the global null: all three effects treated as zero and no true
  // mediators, so exposure, microbiome, and outcome are mutually independent.
  bool null_scenario = false;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TaxonParams {
  double zero_prob;  // in [0, 1]
  double log_mean;
  double log_sd;  // > 0
};

struct SyntheticDataset {
  Eigen::VectorXd exposure;
  CountMatrix counts;
  Eigen::VectorXd outcome;
  std::vector<int> true_mediator_ids;  // subset of associated_ids
  std::vector<int> associated_ids;
};

// Bernoulli(0.5) draws, redrawn while a single class comes up.
Eigen::VectorXd simulate_exposure(int n, std::uint64_t seed);

// Returns the count matrix and the indices of exposure-associated taxa
// (ceil(frac_associated * p) of them).
std::pair<CountMatrix, std::vector<int>> simulate_microbiome(const Eigen::VectorXd& exposure,
                                                             const SimScenario& scenario,
                                                             std::uint64_t seed);

Eigen::VectorXd simulate_outcome(const Eigen::VectorXd& exposure, const CountMatrix& counts,
                                 const std::vector<int>& true_mediator_ids,
                                 const SimScenario& scenario, std::uint64_t seed);

SyntheticDataset generate(const SimScenario& scenario);

}  // namespace htmmiow
