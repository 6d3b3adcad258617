#pragma once

// Weighted linear and logistic fits behind the mediation models. OLS goes
// through an orthogonal decomposition of the sqrt(w)-scaled system; logistic
// fits use IRLS with step halving. Case weights multiply likelihood
// contributions and must be strictly positive.

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "htmmiow/errors.hpp"

namespace htmmiow {

enum class Link { Identity, Logit };

struct DesignMatrix {
  Eigen::MatrixXd values;            // n x (1+k), first column all ones
  std::vector<std::string> columns;  // "(intercept)", then term names
};

// Builds [1 | named columns | covariate columns]. The covariate block may be
// empty (0 columns); its columns are labeled prefix1, prefix2, ...
DesignMatrix design_with_intercept(
    const std::vector<std::pair<std::string, Eigen::VectorXd>>& terms,
    const Eigen::MatrixXd& covariates = Eigen::MatrixXd(),
    const std::string& covariate_prefix = "x");

struct GlmFit {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd standard_errors;
  Link link = Link::Identity;
  bool converged = false;
  int iterations = 0;
  bool weighted = false;
};

GlmFit fit_ols(const DesignMatrix& design, const Eigen::VectorXd& y,
               const std::optional<Eigen::VectorXd>& weights = std::nullopt);

// y must be exactly 0/1 with both classes present. Throws Separation when
// coefficients diverge or fitted probabilities pin an entire class.
GlmFit fit_logistic(const DesignMatrix& design, const Eigen::VectorXd& y,
                    const std::optional<Eigen::VectorXd>& weights = std::nullopt);

Eigen::VectorXd predict_linear(const GlmFit& fit, const DesignMatrix& design);

// exp(X beta), the fitted odds. Requires a logit-link fit.
Eigen::VectorXd predict_odds(const GlmFit& fit, const DesignMatrix& design);

// Weighted Bernoulli log-likelihood and its gradient at beta, exposed for
// step control and finite-difference checks.
double logistic_log_likelihood(const DesignMatrix& design, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& weights, const Eigen::VectorXd& beta);
Eigen::VectorXd logistic_score(const DesignMatrix& design, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& weights, const Eigen::VectorXd& beta);

}  // namespace htmmiow
