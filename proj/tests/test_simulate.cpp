#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "htmmiow/simulate.hpp"
#include "support.hpp"

using namespace htmmiow;

namespace {

SimScenario base_scenario() {
  SimScenario s;
  s.n_samples = 100;
  s.n_taxa = 100;
  s.n_true_mediators = 5;
  s.seed = 7;
  return s;
}

}  // namespace

TEST_CASE("exposure simulation") {
  Eigen::VectorXd big = simulate_exposure(100000, 3);
  double mean = big.mean();
  CHECK(mean >= 0.49);
  CHECK(mean <= 0.51);

  Eigen::VectorXd small = simulate_exposure(10, 5);
  double s = small.sum();
  CHECK(s > 0);
  CHECK(s < 10);

  Eigen::VectorXd again = simulate_exposure(10, 5);
  CHECK(small.cwiseEqual(again).all());

  CHECK_THROWS_AS(simulate_exposure(5, 1), InvalidArgument);
}

TEST_CASE("microbiome simulation marks the requested associated fraction") {
  SimScenario scenario = base_scenario();
  Eigen::VectorXd exposure = simulate_exposure(scenario.n_samples, 11);
  auto [counts, associated] = simulate_microbiome(exposure, scenario, 13);
  CHECK(counts.values.rows() == 100);
  CHECK(counts.values.cols() == 100);
  CHECK(associated.size() == 50);  // ceil(0.5 * 100)
  CHECK((counts.values.array() >= 0).all());
}

TEST_CASE("associated taxa shift with exposure") {
  SimScenario scenario = base_scenario();
  scenario.n_samples = 500;
  Eigen::VectorXd exposure = simulate_exposure(500, 17);
  auto [counts, associated] = simulate_microbiome(exposure, scenario, 19);

  // two-sample t on mean log1p counts over associated taxa
  std::vector<double> exposed, unexposed;
  for (int i = 0; i < 500; ++i) {
    double m = 0;
    for (int j : associated) m += std::log1p(counts.values(i, j));
    m /= static_cast<double>(associated.size());
    (exposure[i] == 1.0 ? exposed : unexposed).push_back(m);
  }
  CHECK(testsupport::welch_t(exposed, unexposed) > 2.33);  // 99% one-sided
}

TEST_CASE("null scenario removes the exposure-microbiome association") {
  SimScenario scenario = base_scenario();
  scenario.n_samples = 500;
  scenario.null_scenario = true;
  Eigen::VectorXd exposure = simulate_exposure(500, 23);
  auto [counts, associated] = simulate_microbiome(exposure, scenario, 29);

  std::vector<double> exposed, unexposed;
  for (int i = 0; i < 500; ++i) {
    double m = 0;
    for (int j : associated) m += std::log1p(counts.values(i, j));
    m /= static_cast<double>(associated.size());
    (exposure[i] == 1.0 ? exposed : unexposed).push_back(m);
  }
  CHECK(std::abs(testsupport::welch_t(exposed, unexposed)) < 3.0);
}

TEST_CASE("zero fraction stays inside the design band") {
  SimScenario scenario = base_scenario();
  scenario.n_samples = 200;
  Eigen::VectorXd exposure = simulate_exposure(200, 31);
  auto [counts, associated] = simulate_microbiome(exposure, scenario, 37);
  double zeros = (counts.values.array() == 0.0).count();
  double frac = zeros / static_cast<double>(counts.values.size());
  CHECK(frac >= 0.2);
  CHECK(frac <= 0.8);
}

TEST_CASE("outcome simulation") {
  SimScenario scenario = base_scenario();
  scenario.n_samples = 500;
  Eigen::VectorXd exposure = simulate_exposure(500, 41);
  auto [counts, associated] = simulate_microbiome(exposure, scenario, 43);
  std::vector<int> true_ids(associated.begin(), associated.begin() + 5);

  SUBCASE("standardized relative abundances have mean 0 and unit sd") {
    Eigen::VectorXd row_sums = counts.values.rowwise().sum();
    int j = true_ids[0];
    Eigen::VectorXd rel(500);
    for (int i = 0; i < 500; ++i) rel[i] = counts.values(i, j) / row_sums[i];
    double mean = rel.mean();
    double sd = std::sqrt((rel.array() - mean).square().sum() / 499.0);
    Eigen::VectorXd z = (rel.array() - mean) / sd;
    CHECK(std::abs(z.mean()) < 1e-12);
    CHECK(std::abs(std::sqrt(z.array().square().sum() / 499.0) - 1.0) < 1e-12);
  }

  SUBCASE("stronger mediator effects drive stronger correlation") {
    // correlation between the mediator signal and Y, ordered by effect size
    Eigen::VectorXd row_sums = counts.values.rowwise().sum();
    Eigen::VectorXd signal = Eigen::VectorXd::Zero(500);
    for (int j : true_ids) {
      Eigen::VectorXd rel(500);
      for (int i = 0; i < 500; ++i) rel[i] = counts.values(i, j) / row_sums[i];
      double mean = rel.mean();
      double sd = std::sqrt((rel.array() - mean).square().sum() / 499.0);
      signal += ((rel.array() - mean) / sd).matrix();
    }
    scenario.mediator_outcome_effect = 5.0;
    Eigen::VectorXd strong = simulate_outcome(exposure, counts, true_ids, scenario, 47);
    scenario.mediator_outcome_effect = 0.5;
    Eigen::VectorXd weak = simulate_outcome(exposure, counts, true_ids, scenario, 47);
    CHECK(testsupport::correlation(signal, strong) > testsupport::correlation(signal, weak));
  }

  SUBCASE("null scenario outcome is independent noise") {
    scenario.null_scenario = true;
    Eigen::VectorXd y = simulate_outcome(exposure, counts, {}, scenario, 53);
    CHECK(std::abs(testsupport::correlation(exposure, y)) < 0.15);
  }

  SUBCASE("dichotomous outcomes keep both classes") {
    scenario.family = OutcomeFamily::Dichotomous;
    scenario.exposure_outcome_effect = 5.0;
    Eigen::VectorXd y = simulate_outcome(exposure, counts, true_ids, scenario, 59);
    double s = y.sum();
    CHECK(s > 0);
    CHECK(s < 500);
    CHECK(((y.array() == 0.0) || (y.array() == 1.0)).all());
  }
}

TEST_CASE("generate composes the pieces") {
  SimScenario scenario = base_scenario();
  scenario.n_true_mediators = 1;
  SyntheticDataset data = generate(scenario);
  CHECK(data.exposure.size() == 100);
  CHECK(data.counts.values.rows() == 100);
  CHECK(data.counts.values.cols() == 100);
  CHECK(data.outcome.size() == 100);
  CHECK(data.true_mediator_ids.size() == 1);

  // truth containment
  for (int id : data.true_mediator_ids) {
    CHECK(std::find(data.associated_ids.begin(), data.associated_ids.end(), id) !=
          data.associated_ids.end());
  }

  // seed determinism, bitwise
  SyntheticDataset again = generate(scenario);
  CHECK(data.exposure.cwiseEqual(again.exposure).all());
  CHECK(data.counts.values.cwiseEqual(again.counts.values).all());
  CHECK(data.outcome.cwiseEqual(again.outcome).all());
  CHECK(data.true_mediator_ids == again.true_mediator_ids);
  CHECK(data.associated_ids == again.associated_ids);

  SimScenario other = scenario;
  other.seed = scenario.seed + 1;
  SyntheticDataset different = generate(other);
  CHECK(!data.counts.values.cwiseEqual(different.counts.values).all());
}

TEST_CASE("scenario validation") {
  SimScenario bad = base_scenario();
  bad.n_true_mediators = 60;  // more than ceil(0.5 * 100)
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);

  SimScenario tiny = base_scenario();
  tiny.n_samples = 5;
  CHECK_THROWS_AS(tiny.validate(), InvalidArgument);

  SimScenario no_mediators = base_scenario();
  no_mediators.n_true_mediators = 0;
  CHECK_THROWS_AS(no_mediators.validate(), InvalidArgument);
  no_mediators.null_scenario = true;
  CHECK_NOTHROW(no_mediators.validate());
}
