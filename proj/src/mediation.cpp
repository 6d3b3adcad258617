#include "htmmiow/mediation.hpp"

#include <algorithm>
#include <cmath>

#include "htmmiow/rng.hpp"
#include "htmmiow/util.hpp"

namespace htmmiow {

std::string to_string(OutcomeFamily family) {
  return family == OutcomeFamily::Continuous ? "continuous" : "dichotomous";
}

OutcomeFamily parse_family(const std::string& name) {
  if (name == "continuous") return OutcomeFamily::Continuous;
  if (name == "dichotomous") return OutcomeFamily::Dichotomous;
  throw InvalidArgument("unknown outcome family: " + name);
}

void MediationInput::validate() const {
  const Eigen::Index n = exposure.size();
  if (n < 3) throw ShapeError("mediation input needs at least 3 subjects");
  if (((exposure.array() != 0.0) && (exposure.array() != 1.0)).any()) {
    throw DataError("exposure must be exactly 0 or 1");
  }
  double esum = exposure.sum();
  if (esum == 0 || esum == static_cast<double>(n)) {
    throw DataError("exposure must contain both classes");
  }
  if (outcome.size() != n) throw ShapeError("outcome length does not match exposure");
  if (!outcome.allFinite()) throw DataError("outcome has non-finite values");
  if (family == OutcomeFamily::Dichotomous &&
      ((outcome.array() != 0.0) && (outcome.array() != 1.0)).any()) {
    throw DataError("dichotomous outcome must be exactly 0 or 1");
  }
  if (mediators.rows() != n) throw ShapeError("mediator rows do not match exposure length");
  if (mediators.cols() < 1) throw ShapeError("mediation needs at least one mediator component");
  if (!mediators.allFinite()) throw DataError("mediators have non-finite values");
  if (covariates.size() > 0 && covariates.rows() != n) {
    throw ShapeError("covariate rows do not match exposure length");
  }
}

namespace {

DesignMatrix outcome_design(const MediationInput& input) {
  return design_with_intercept({{"E", input.exposure}}, input.covariates);
}

GlmFit fit_outcome_model(const MediationInput& input,
                         const std::optional<Eigen::VectorXd>& weights) {
  DesignMatrix design = outcome_design(input);
  if (input.family == OutcomeFamily::Continuous) {
    return fit_ols(design, input.outcome, weights);
  }
  return fit_logistic(design, input.outcome, weights);
}

IowWeights weights_for_mediators(const Eigen::VectorXd& exposure,
                                 const Eigen::MatrixXd& mediators,
                                 const Eigen::MatrixXd& covariates) {
  std::vector<std::pair<std::string, Eigen::VectorXd>> terms;
  terms.reserve(static_cast<std::size_t>(mediators.cols()));
  for (Eigen::Index j = 0; j < mediators.cols(); ++j) {
    terms.emplace_back("u" + std::to_string(j + 1), mediators.col(j));
  }
  DesignMatrix design = design_with_intercept(terms, covariates);

  GlmFit fit;
  try {
    fit = fit_logistic(design, exposure);
  } catch (const Separation& err) {
    throw WeightModelFailure(std::string("weight model separation: ") + err.what());
  }
  if (!fit.converged) {
    throw WeightModelFailure("weight model did not converge");
  }

  Eigen::VectorXd eta = design.values * fit.coefficients;
  IowWeights weights;
  weights.values.resize(exposure.size());
  for (Eigen::Index i = 0; i < exposure.size(); ++i) {
    if (exposure[i] == 1.0) {
      double w = std::exp(-eta[i]);  // 1 / odds
      if (!(w > 0) || !std::isfinite(w)) {
        throw WeightModelFailure("inverse-odds weight underflowed or is non-finite");
      }
      weights.values[i] = w;
    } else {
      weights.values[i] = 1.0;
    }
  }
  return weights;
}

}  // namespace

GlmFit fit_total_effect(const MediationInput& input) {
  input.validate();
  return fit_outcome_model(input, std::nullopt);
}

IowWeights compute_iow_weights(const MediationInput& input) {
  input.validate();
  return weights_for_mediators(input.exposure, input.mediators, input.covariates);
}

GlmFit fit_direct_effect(const MediationInput& input, const IowWeights& weights) {
  input.validate();
  if (weights.values.size() != input.exposure.size()) {
    throw ShapeError("weight length does not match input");
  }
  return fit_outcome_model(input, weights.values);
}

double indirect_effect(const GlmFit& total, const GlmFit& direct) {
  if (total.link != direct.link) {
    throw InvalidArgument("indirect effect needs fits sharing a link function");
  }
  if (total.coefficients.size() != direct.coefficients.size()) {
    throw ShapeError("indirect effect needs fits sharing a design layout");
  }
  return total.coefficients[1] - direct.coefficients[1];
}

double permutation_p_value(const std::vector<double>& null_stats, double t_obs, bool smoothed) {
  if (null_stats.empty()) throw TestFailure("no successful permutations to form a p-value");
  std::size_t count = 0;
  for (double t : null_stats) {
    if (std::abs(t) > std::abs(t_obs)) ++count;
  }
  if (smoothed) {
    return static_cast<double>(1 + count) / static_cast<double>(1 + null_stats.size());
  }
  return static_cast<double>(count) / static_cast<double>(null_stats.size());
}

MediationResult permutation_test(const MediationInput& input, const PermutationOptions& options) {
  input.validate();
  if (options.n_permutations < 1) throw InvalidArgument("permutation count must be >= 1");

  MediationResult result;
  result.n_permutations = options.n_permutations;
  result.seed = options.seed;

  // Model (1) never involves the mediators, so it is shared by the observed
  // statistic and every permutation.
  GlmFit total;
  GlmFit direct;
  try {
    total = fit_total_effect(input);
    IowWeights weights = compute_iow_weights(input);
    direct = fit_direct_effect(input, weights);
  } catch (const NumericalError& err) {
    throw TestFailure(std::string("observed-data fit failed: ") + err.what());
  }
  result.beta1 = total.coefficients[1];
  result.gamma1 = direct.coefficients[1];
  result.t_obs = result.beta1 - result.gamma1;

  const auto n = static_cast<int>(input.exposure.size());
  const auto B = static_cast<std::size_t>(options.n_permutations);
  std::vector<double> stats(B, std::numeric_limits<double>::quiet_NaN());

  parallel_for(B, options.n_workers, [&](std::size_t j) {
    Rng rng(derive_seed(options.seed, j + 1));
    std::vector<int> perm = rng.permutation(n);
    Eigen::MatrixXd shuffled(input.mediators.rows(), input.mediators.cols());
    for (int i = 0; i < n; ++i) shuffled.row(i) = input.mediators.row(perm[i]);
    try {
      IowWeights weights =
          weights_for_mediators(input.exposure, shuffled, input.covariates);
      GlmFit permuted_direct = fit_direct_effect(input, weights);
      stats[j] = result.beta1 - permuted_direct.coefficients[1];
    } catch (const NumericalError&) {
      // failed permutation: dropped from numerator and denominator
    }
  });

  result.null_stats.reserve(B);
  for (double t : stats) {
    if (std::isnan(t)) {
      ++result.n_failed_permutations;
    } else {
      result.null_stats.push_back(t);
    }
  }
  result.p_value = permutation_p_value(result.null_stats, result.t_obs, options.smoothed_p);
  return result;
}

namespace {

double normal_two_sided_p(double z) {
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

}  // namespace

SobelResult sobel_test(const Eigen::VectorXd& exposure, const Eigen::VectorXd& mediator,
                       const Eigen::VectorXd& outcome) {
  if (exposure.size() != mediator.size() || exposure.size() != outcome.size()) {
    throw ShapeError("sobel test: input lengths differ");
  }
  DesignMatrix m_design = design_with_intercept({{"E", exposure}});
  GlmFit m_fit = fit_ols(m_design, mediator);

  DesignMatrix y_design = design_with_intercept({{"E", exposure}, {"M", mediator}});
  GlmFit y_fit = fit_ols(y_design, outcome);

  SobelResult result;
  result.b1 = m_fit.coefficients[1];
  result.se_b1 = m_fit.standard_errors[1];
  result.c2 = y_fit.coefficients[2];
  result.se_c2 = y_fit.standard_errors[2];
  double se = std::sqrt(result.b1 * result.b1 * result.se_c2 * result.se_c2 +
                        result.c2 * result.c2 * result.se_b1 * result.se_b1);
  if (!(se > 0)) throw NumericalError("sobel test: zero delta-method standard error");
  result.statistic = result.b1 * result.c2 / se;
  result.p_value = normal_two_sided_p(result.statistic);
  return result;
}

BootstrapIntervals bootstrap_ci(const MediationInput& input, int n_resamples, double level,
                                std::uint64_t seed) {
  input.validate();
  if (n_resamples < 100) throw InvalidArgument("bootstrap needs at least 100 resamples");
  if (!(level > 0) || !(level < 1)) throw InvalidArgument("bootstrap level outside (0, 1)");

  const auto n = static_cast<int>(input.exposure.size());
  constexpr int kMaxRetries = 100;

  std::vector<double> beta1s, gamma1s, ts;
  beta1s.reserve(static_cast<std::size_t>(n_resamples));
  gamma1s.reserve(static_cast<std::size_t>(n_resamples));
  ts.reserve(static_cast<std::size_t>(n_resamples));

  for (int r = 0; r < n_resamples; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r) + 1));
    bool done = false;
    for (int attempt = 0; attempt < kMaxRetries && !done; ++attempt) {
      MediationInput sample = input;
      for (int i = 0; i < n; ++i) {
        auto pick = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        sample.exposure[i] = input.exposure[pick];
        sample.outcome[i] = input.outcome[pick];
        sample.mediators.row(i) = input.mediators.row(pick);
        if (sample.covariates.size() > 0) sample.covariates.row(i) = input.covariates.row(pick);
      }
      double esum = sample.exposure.sum();
      if (esum == 0 || esum == static_cast<double>(n)) continue;
      try {
        GlmFit total = fit_total_effect(sample);
        IowWeights weights = compute_iow_weights(sample);
        GlmFit direct = fit_direct_effect(sample, weights);
        beta1s.push_back(total.coefficients[1]);
        gamma1s.push_back(direct.coefficients[1]);
        ts.push_back(total.coefficients[1] - direct.coefficients[1]);
        done = true;
      } catch (const NumericalError&) {
        // degenerate resample; redraw
      }
    }
    if (!done) throw BootstrapFailure("bootstrap resampling kept producing degenerate draws");
  }

  auto interval = [&](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    Interval ci;
    ci.lower = quantile_sorted(v, (1.0 - level) / 2.0);
    ci.upper = quantile_sorted(v, 1.0 - (1.0 - level) / 2.0);
    return ci;
  };

  BootstrapIntervals out;
  out.level = level;
  out.n_resamples = n_resamples;
  out.beta1 = interval(beta1s);
  out.gamma1 = interval(gamma1s);
  out.t_obs = interval(ts);
  return out;
}

}  // namespace htmmiow
