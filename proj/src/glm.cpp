#include "htmmiow/glm.hpp"

#include <cmath>

namespace htmmiow {

namespace {

constexpr double kCoefTolerance = 1e-8;
constexpr int kMaxIterations = 100;
constexpr int kMaxHalvings = 10;
constexpr double kSeparationNorm = 1e4;
constexpr double kPinnedProb = 1e-10;

double expit(double eta) {
  if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
  double e = std::exp(eta);
  return e / (1.0 + e);
}

// log(1 + exp(eta)) without overflow
double softplus(double eta) {
  return std::max(eta, 0.0) + std::log1p(std::exp(-std::abs(eta)));
}

void check_inputs(const DesignMatrix& design, const Eigen::VectorXd& y,
                  const std::optional<Eigen::VectorXd>& weights) {
  const Eigen::Index n = design.values.rows();
  if (n == 0 || design.values.cols() == 0) throw ShapeError("empty design matrix");
  if (!design.values.allFinite()) throw DataError("design matrix has non-finite entries");
  if ((design.values.col(0).array() != 1.0).any()) {
    throw DataError("design matrix must carry an all-ones intercept column");
  }
  if (y.size() != n) throw ShapeError("response length does not match design rows");
  if (!y.allFinite()) throw DataError("response has non-finite entries");
  if (weights) {
    if (weights->size() != n) throw ShapeError("weight length does not match design rows");
    if (!weights->allFinite() || (weights->array() <= 0).any()) {
      throw DataError("case weights must be strictly positive and finite");
    }
  }
}

void check_full_rank(const Eigen::MatrixXd& X) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < X.cols()) throw SingularDesign("design matrix is rank deficient");
}

}  // namespace

DesignMatrix design_with_intercept(
    const std::vector<std::pair<std::string, Eigen::VectorXd>>& terms,
    const Eigen::MatrixXd& covariates, const std::string& covariate_prefix) {
  if (terms.empty() && covariates.rows() == 0) {
    throw InvalidArgument("design needs at least one term or covariate block");
  }
  Eigen::Index n = terms.empty() ? covariates.rows() : terms.front().second.size();
  Eigen::Index q = covariates.size() == 0 ? 0 : covariates.cols();
  DesignMatrix design;
  design.values.resize(n, 1 + static_cast<Eigen::Index>(terms.size()) + q);
  design.values.col(0).setOnes();
  design.columns.push_back("(intercept)");
  Eigen::Index col = 1;
  for (const auto& [name, v] : terms) {
    if (v.size() != n) throw ShapeError("design term '" + name + "' has wrong length");
    design.values.col(col++) = v;
    design.columns.push_back(name);
  }
  if (q > 0) {
    if (covariates.rows() != n) throw ShapeError("covariate block has wrong row count");
    for (Eigen::Index j = 0; j < q; ++j) {
      design.values.col(col++) = covariates.col(j);
      design.columns.push_back(covariate_prefix + std::to_string(j + 1));
    }
  }
  return design;
}

GlmFit fit_ols(const DesignMatrix& design, const Eigen::VectorXd& y,
               const std::optional<Eigen::VectorXd>& weights) {
  check_inputs(design, y, weights);
  const Eigen::MatrixXd& X = design.values;
  const Eigen::Index n = X.rows();
  const Eigen::Index k = X.cols();
  if (n <= k) throw SingularDesign("OLS needs more observations than columns");

  Eigen::VectorXd w = weights ? *weights : Eigen::VectorXd::Ones(n);
  Eigen::ArrayXd sw = w.array().sqrt();
  Eigen::MatrixXd Xs = X.array().colwise() * sw;
  Eigen::VectorXd ys = y.array() * sw;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xs);
  if (qr.rank() < k) throw SingularDesign("design matrix is rank deficient");

  GlmFit fit;
  fit.link = Link::Identity;
  fit.converged = true;
  fit.iterations = 1;
  fit.weighted = weights.has_value();
  fit.coefficients = qr.solve(ys);

  Eigen::VectorXd resid = y - X * fit.coefficients;
  double rss = (w.array() * resid.array().square()).sum();
  double sigma2 = rss / static_cast<double>(n - k);
  Eigen::MatrixXd xtwx_inv = (Xs.transpose() * Xs).ldlt().solve(Eigen::MatrixXd::Identity(k, k));
  fit.standard_errors = (sigma2 * xtwx_inv.diagonal().array()).max(0.0).sqrt();
  return fit;
}

double logistic_log_likelihood(const DesignMatrix& design, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& weights, const Eigen::VectorXd& beta) {
  Eigen::VectorXd eta = design.values * beta;
  double ll = 0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    ll += weights[i] * (y[i] * eta[i] - softplus(eta[i]));
  }
  return ll;
}

Eigen::VectorXd logistic_score(const DesignMatrix& design, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& weights, const Eigen::VectorXd& beta) {
  Eigen::VectorXd eta = design.values * beta;
  Eigen::VectorXd p = eta.unaryExpr([](double e) { return expit(e); });
  return design.values.transpose() * (weights.array() * (y - p).array()).matrix();
}

GlmFit fit_logistic(const DesignMatrix& design, const Eigen::VectorXd& y,
                    const std::optional<Eigen::VectorXd>& weights) {
  check_inputs(design, y, weights);
  const Eigen::MatrixXd& X = design.values;
  const Eigen::Index n = X.rows();
  const Eigen::Index k = X.cols();
  if (((y.array() != 0.0) && (y.array() != 1.0)).any()) {
    throw DataError("logistic response must be exactly 0 or 1");
  }
  double ysum = y.sum();
  if (ysum == 0 || ysum == static_cast<double>(n)) {
    throw DegenerateOutcome("logistic response has a single class");
  }
  check_full_rank(X);

  Eigen::VectorXd w = weights ? *weights : Eigen::VectorXd::Ones(n);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
  double ll = logistic_log_likelihood(design, y, w, beta);

  GlmFit fit;
  fit.link = Link::Logit;
  fit.weighted = weights.has_value();

  Eigen::MatrixXd info(k, k);
  for (int iter = 1; iter <= kMaxIterations; ++iter) {
    Eigen::VectorXd eta = X * beta;
    Eigen::VectorXd p = eta.unaryExpr([](double e) { return expit(e); });
    Eigen::ArrayXd s = w.array() * p.array() * (1.0 - p.array());
    Eigen::VectorXd grad = X.transpose() * (w.array() * (y - p).array()).matrix();
    info = X.transpose() * (X.array().colwise() * s).matrix();

    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    Eigen::VectorXd delta;
    bool solved = ldlt.info() == Eigen::Success;
    if (solved) {
      delta = ldlt.solve(grad);
      solved = delta.allFinite();
    }
    if (!solved) {
      if (beta.norm() > 1.0 || s.maxCoeff() < 1e-12) {
        throw Separation("logistic fit: information matrix collapsed (separation)");
      }
      throw SingularDesign("logistic fit: information matrix is singular");
    }

    // step halving keeps the likelihood non-decreasing
    double step = 1.0;
    Eigen::VectorXd cand;
    double llc = ll;
    for (int h = 0; h <= kMaxHalvings; ++h) {
      cand = beta + step * delta;
      llc = logistic_log_likelihood(design, y, w, cand);
      if (std::isfinite(llc) && llc >= ll - 1e-12) break;
      step *= 0.5;
    }
    double moved = (cand - beta).cwiseAbs().maxCoeff();
    beta = cand;
    ll = llc;
    fit.iterations = iter;
    if (beta.norm() > kSeparationNorm) {
      throw Separation("logistic fit: coefficient norm diverged");
    }
    if (moved <= kCoefTolerance) {
      fit.converged = true;
      break;
    }
  }

  // A class whose fitted probabilities are all pinned means quasi-separation.
  {
    Eigen::VectorXd p = (X * beta).unaryExpr([](double e) { return expit(e); });
    bool ones_pinned = true, zeros_pinned = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (y[i] == 1.0 && p[i] <= 1.0 - kPinnedProb) ones_pinned = false;
      if (y[i] == 0.0 && p[i] >= kPinnedProb) zeros_pinned = false;
    }
    if (ones_pinned || zeros_pinned) {
      throw Separation("logistic fit: fitted probabilities pinned for an entire class");
    }
  }

  fit.coefficients = beta;
  Eigen::MatrixXd cov = info.ldlt().solve(Eigen::MatrixXd::Identity(k, k));
  fit.standard_errors = cov.diagonal().array().max(0.0).sqrt();
  return fit;
}

Eigen::VectorXd predict_linear(const GlmFit& fit, const DesignMatrix& design) {
  if (design.values.cols() != fit.coefficients.size()) {
    throw ShapeError("prediction design does not match coefficient count");
  }
  return design.values * fit.coefficients;
}

Eigen::VectorXd predict_odds(const GlmFit& fit, const DesignMatrix& design) {
  if (fit.link != Link::Logit) throw InvalidArgument("predict_odds needs a logit-link fit");
  if (design.values.cols() != fit.coefficients.size()) {
    throw ShapeError("prediction design does not match coefficient count");
  }
  return (design.values * fit.coefficients).array().exp();
}

}  // namespace htmmiow
