#include "htmmiow/pca.hpp"

#include <algorithm>
#include <cmath>

namespace htmmiow {

PcaModel pca_fit(const Eigen::MatrixXd& X, const PcaSelector& selector) {
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  if (n < 2 || d < 1) throw ShapeError("pca needs at least 2 rows and 1 column");
  if (!X.allFinite()) throw DataError("pca input has non-finite entries");

  Eigen::VectorXd means = X.colwise().mean();
  Eigen::MatrixXd centered = X.rowwise() - means.transpose();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] <= 0) {
    throw DataError("pca input has rank zero (all rows identical)");
  }

  double rank_tol = static_cast<double>(std::max(n, d)) *
                    std::numeric_limits<double>::epsilon() * sv[0];
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv[rank] > rank_tol) ++rank;

  Eigen::VectorXd variances = sv.array().square() / static_cast<double>(n - 1);
  double total = variances.sum();

  Eigen::Index k = 0;
  if (const auto* count = std::get_if<ComponentCount>(&selector)) {
    if (count->value < 1 || count->value > std::min(n, d)) {
      throw InvalidArgument("pca component count outside [1, min(n, d)]");
    }
    k = std::min<Eigen::Index>(count->value, rank);
  } else {
    double tau = std::get<VarianceThreshold>(selector).value;
    if (!(tau > 0) || tau > 1) throw InvalidArgument("pca variance threshold outside (0, 1]");
    double cum = 0;
    for (k = 0; k < rank; ++k) {
      cum += variances[k] / total;
      if (cum >= tau - 1e-9) {
        ++k;
        break;
      }
    }
  }

  PcaModel model;
  model.column_means = means;
  model.loadings = svd.matrixV().leftCols(k);
  model.explained_variance = variances.head(k);
  model.explained_variance_ratio = variances.head(k) / total;
  return model;
}

Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& X) {
  if (X.cols() != model.loadings.rows()) {
    throw ShapeError("pca transform: column count does not match model");
  }
  return (X.rowwise() - model.column_means.transpose()) * model.loadings;
}

}  // namespace htmmiow
