#include "htmmiow/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "htmmiow/rng.hpp"

namespace htmmiow {

namespace {

constexpr int kMaxRetries = 100;

// documented priors for the per-taxon zero-inflated log-normal
TaxonParams draw_taxon_params(Rng& rng) {
  TaxonParams params;
  params.zero_prob = 0.3 + 0.4 * rng.uniform();
  params.log_mean = 2.0 + rng.normal();
  params.log_sd = 0.5 + rng.uniform();
  return params;
}

}  // namespace

void SimScenario::validate() const {
  if (n_samples < 10) throw InvalidArgument("scenario needs at least 10 samples");
  if (n_taxa < 2) throw InvalidArgument("scenario needs at least 2 taxa");
  if (frac_associated < 0 || frac_associated > 1) {
    throw InvalidArgument("frac_associated outside [0, 1]");
  }
  int n_assoc = static_cast<int>(std::ceil(frac_associated * n_taxa));
  if (n_true_mediators < 0 ||
      (!null_scenario && n_true_mediators > n_assoc)) {
    throw InvalidArgument("true mediator count exceeds the associated taxa count");
  }
  if (!null_scenario && n_true_mediators == 0) {
    throw InvalidArgument("non-null scenario needs at least one true mediator");
  }
  if (!std::isfinite(exposure_mediator_effect) || !std::isfinite(exposure_outcome_effect) ||
      !std::isfinite(mediator_outcome_effect)) {
    throw InvalidArgument("scenario effects must be finite");
  }
}

Eigen::VectorXd simulate_exposure(int n, std::uint64_t seed) {
  if (n < 10) throw InvalidArgument("exposure simulation needs n >= 10");
  Rng rng(seed);
  Eigen::VectorXd exposure(n);
  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    for (int i = 0; i < n; ++i) exposure[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    double s = exposure.sum();
    if (s > 0 && s < static_cast<double>(n)) return exposure;
  }
  throw DegenerateOutcome("exposure simulation kept producing a single class");
}

std::pair<CountMatrix, std::vector<int>> simulate_microbiome(const Eigen::VectorXd& exposure,
                                                             const SimScenario& scenario,
                                                             std::uint64_t seed) {
  scenario.validate();
  const auto n = static_cast<int>(exposure.size());
  const int p = scenario.n_taxa;
  const double effect = scenario.null_scenario ? 0.0 : scenario.exposure_mediator_effect;

  Rng param_rng(derive_seed(seed, 1));
  std::vector<TaxonParams> params;
  params.reserve(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) params.push_back(draw_taxon_params(param_rng));

  Rng assoc_rng(derive_seed(seed, 2));
  int n_assoc = static_cast<int>(std::ceil(scenario.frac_associated * p));
  std::vector<int> order = assoc_rng.permutation(p);
  std::vector<int> associated(order.begin(), order.begin() + n_assoc);
  std::sort(associated.begin(), associated.end());
  std::vector<bool> is_associated(static_cast<std::size_t>(p), false);
  for (int j : associated) is_associated[static_cast<std::size_t>(j)] = true;

  Rng count_rng(derive_seed(seed, 3));
  CountMatrix counts;
  counts.values.resize(n, p);
  counts.sample_ids.reserve(static_cast<std::size_t>(n));
  counts.taxa_ids.reserve(static_cast<std::size_t>(p));
  for (int i = 0; i < n; ++i) counts.sample_ids.push_back("S" + std::to_string(i + 1));
  for (int j = 0; j < p; ++j) counts.taxa_ids.push_back("taxon" + std::to_string(j + 1));

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) {
      const TaxonParams& tp = params[static_cast<std::size_t>(j)];
      if (count_rng.uniform() < tp.zero_prob) {
        counts.values(i, j) = 0.0;
        continue;
      }
      double shift = is_associated[static_cast<std::size_t>(j)] ? effect * exposure[i] : 0.0;
      double log_abundance = tp.log_mean + shift + tp.log_sd * count_rng.normal();
      counts.values(i, j) = std::round(std::exp(log_abundance));
    }
  }
  return {std::move(counts), std::move(associated)};
}

Eigen::VectorXd simulate_outcome(const Eigen::VectorXd& exposure, const CountMatrix& counts,
                                 const std::vector<int>& true_mediator_ids,
                                 const SimScenario& scenario, std::uint64_t seed) {
  scenario.validate();
  const auto n = static_cast<int>(exposure.size());
  if (counts.values.rows() != n) throw ShapeError("count rows do not match exposure length");
  if (true_mediator_ids.empty() && !scenario.null_scenario) {
    throw InvalidArgument("outcome simulation needs true mediators unless under the null");
  }

  const double exposure_effect = scenario.null_scenario ? 0.0 : scenario.exposure_outcome_effect;
  const double mediator_effect = scenario.null_scenario ? 0.0 : scenario.mediator_outcome_effect;

  // standardized relative abundances of the true mediator taxa
  Eigen::VectorXd mediator_sum = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd row_sums = counts.values.rowwise().sum();
  for (int j : true_mediator_ids) {
    if (j < 0 || j >= counts.values.cols()) throw ShapeError("true mediator index out of range");
    Eigen::VectorXd rel(n);
    for (int i = 0; i < n; ++i) {
      rel[i] = row_sums[i] > 0 ? counts.values(i, j) / row_sums[i] : 0.0;
    }
    double mean = rel.mean();
    double sd = std::sqrt((rel.array() - mean).square().sum() / static_cast<double>(n - 1));
    if (sd > 0) {
      mediator_sum += ((rel.array() - mean) / sd).matrix();
    }
  }

  Rng rng(seed);
  Eigen::VectorXd eta(n);
  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    for (int i = 0; i < n; ++i) {
      eta[i] = exposure_effect * exposure[i] + mediator_effect * mediator_sum[i] + rng.normal();
    }
    if (scenario.family == OutcomeFamily::Continuous) return eta;

    // center at the median so neither class degenerates at strong effects
    std::vector<double> sorted(eta.data(), eta.data() + n);
    std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
    double median = sorted[static_cast<std::size_t>(n) / 2];
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      double prob = 1.0 / (1.0 + std::exp(-(eta[i] - median)));
      y[i] = rng.bernoulli(prob) ? 1.0 : 0.0;
    }
    double s = y.sum();
    if (s > 0 && s < static_cast<double>(n)) return y;
  }
  throw DegenerateOutcome("outcome simulation kept producing a single class");
}

SyntheticDataset generate(const SimScenario& scenario) {
  scenario.validate();
  SyntheticDataset data;
  data.exposure = simulate_exposure(scenario.n_samples, derive_seed(scenario.seed, 11));

  auto [counts, associated] =
      simulate_microbiome(data.exposure, scenario, derive_seed(scenario.seed, 12));
  data.counts = std::move(counts);
  data.associated_ids = std::move(associated);

  int t = scenario.null_scenario ? std::min(scenario.n_true_mediators,
                                            static_cast<int>(data.associated_ids.size()))
                                 : scenario.n_true_mediators;
  Rng truth_rng(derive_seed(scenario.seed, 13));
  std::vector<int> order = truth_rng.permutation(static_cast<int>(data.associated_ids.size()));
  data.true_mediator_ids.reserve(static_cast<std::size_t>(t));
  for (int idx = 0; idx < t; ++idx) {
    data.true_mediator_ids.push_back(data.associated_ids[static_cast<std::size_t>(order[idx])]);
  }
  std::sort(data.true_mediator_ids.begin(), data.true_mediator_ids.end());

  data.outcome = simulate_outcome(data.exposure, data.counts, data.true_mediator_ids, scenario,
                                  derive_seed(scenario.seed, 14));
  return data;
}

}  // namespace htmmiow
