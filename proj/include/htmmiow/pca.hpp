#pragma once

// Principal components via SVD of the centered data matrix. Component
// selection is either a fixed count (capped at the numerical rank) or the
// smallest count whose cumulative explained-variance ratio reaches a
// threshold.

#include <Eigen/Dense>
#include <variant>

#include "htmmiow/errors.hpp"

namespace htmmiow {

struct ComponentCount {
  int value;
};
struct VarianceThreshold {
  double value;  // in (0, 1]
};
using PcaSelector = std::variant<ComponentCount, VarianceThreshold>;

struct PcaModel {
  Eigen::MatrixXd loadings;                  // d x k, orthonormal columns
  Eigen::VectorXd explained_variance;        // k, non-increasing
  Eigen::VectorXd explained_variance_ratio;  // k, fractions of total variance
  Eigen::VectorXd column_means;              // d
};

PcaModel pca_fit(const Eigen::MatrixXd& X, const PcaSelector& selector);

// Centered projection onto the loadings: (X - mean) * loadings.
Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& X);

}  // namespace htmmiow
