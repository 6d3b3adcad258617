#pragma once

// The mediation test itself. Model (1) gives the total effect of exposure
// on outcome; a logistic model of exposure on the reduced mediators gives
// inverse-odds weights; the weighted model (3) gives the direct effect.
// T_obs = beta1 - gamma1 is referred to a permutation null built by
// shuffling mediator rows against fixed exposure/outcome/covariates.

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "htmmiow/glm.hpp"
#include "htmmiow/reduce.hpp"

namespace htmmiow {

enum class OutcomeFamily { Continuous, Dichotomous };

std::string to_string(OutcomeFamily family);
OutcomeFamily parse_family(const std::string& name);

struct MediationInput {
  Eigen::VectorXd exposure;  // n, binary 0/1
  Eigen::VectorXd outcome;   // n, real or binary per family
  OutcomeFamily family = OutcomeFamily::Continuous;
  Eigen::MatrixXd mediators;   // n x c (the reduced components U)
  Eigen::MatrixXd covariates;  // n x q, q may be 0

  void validate() const;
};

struct IowWeights {
  Eigen::VectorXd values;  // n, strictly positive; exactly 1 for unexposed
};

struct MediationResult {
  double beta1 = 0;   // total effect
  double gamma1 = 0;  // direct effect
  double t_obs = 0;   // indirect effect, beta1 - gamma1
  double p_value = 0;
  int n_permutations = 0;          // requested B
  std::vector<double> null_stats;  // T(j) for successful permutations, in index order
  int n_failed_permutations = 0;
  std::uint64_t seed = 0;
};

// Model (1): outcome on intercept, exposure, covariates. The family picks
// the link (continuous -> identity, dichotomous -> logit).
GlmFit fit_total_effect(const MediationInput& input);

// Model (2): logistic exposure on mediators and covariates; exposed weight
// is the inverse predicted odds, unexposed weight is exactly 1.
IowWeights compute_iow_weights(const MediationInput& input);

// Model (3): weighted fit of outcome on intercept, exposure, covariates.
// The mediators never enter this model.
GlmFit fit_direct_effect(const MediationInput& input, const IowWeights& weights);

// beta1 - gamma1 from two fits sharing link and design layout.
double indirect_effect(const GlmFit& total, const GlmFit& direct);

// Strict-exceedance permutation p-value; exposed for direct checks.
double permutation_p_value(const std::vector<double>& null_stats, double t_obs, bool smoothed);

struct PermutationOptions {
  int n_permutations = 1000;
  std::uint64_t seed = 0;
  bool smoothed_p = false;  // (1 + count) / (1 + B) instead of count / B
  int n_workers = 1;
};

MediationResult permutation_test(const MediationInput& input, const PermutationOptions& options);

struct SobelResult {
  double statistic = 0;
  double p_value = 0;
  double b1 = 0;  // mediator-on-exposure slope
  double c2 = 0;  // outcome-on-mediator slope given exposure
  double se_b1 = 0;
  double se_c2 = 0;
};

// Classic single-mediator test of H0: b1*c2 = 0, continuous mediator and
// outcome, delta-method standard error, two-sided normal p-value.
SobelResult sobel_test(const Eigen::VectorXd& exposure, const Eigen::VectorXd& mediator,
                       const Eigen::VectorXd& outcome);

struct Interval {
  double lower = 0;
  double upper = 0;
};

struct BootstrapIntervals {
  Interval beta1;
  Interval gamma1;
  Interval t_obs;
  double level = 0;
  int n_resamples = 0;
};

// Nonparametric case-resampling percentile intervals for the three effects.
// Resamples with a one-class exposure (or a failed weight model) are redrawn
// a bounded number of times.
BootstrapIntervals bootstrap_ci(const MediationInput& input, int n_resamples, double level,
                                std::uint64_t seed);

}  // namespace htmmiow
