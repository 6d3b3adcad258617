#pragma once

// Shared test oracles, independent of the library implementation paths
// they check.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace testsupport {

// One-sample Kolmogorov-Smirnov statistic against Uniform(0, 1).
inline double ks_uniform(std::vector<double> sample) {
  std::sort(sample.begin(), sample.end());
  const auto n = static_cast<double>(sample.size());
  double d = 0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    double fx = std::clamp(sample[i], 0.0, 1.0);
    d = std::max(d, fx - static_cast<double>(i) / n);
    d = std::max(d, static_cast<double>(i + 1) / n - fx);
  }
  return d;
}

// Welch two-sample t statistic.
inline double welch_t(const std::vector<double>& a, const std::vector<double>& b) {
  auto moments = [](const std::vector<double>& v) {
    double mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size() - 1);
    return std::pair<double, double>(mean, var);
  };
  auto [ma, va] = moments(a);
  auto [mb, vb] = moments(b);
  double se = std::sqrt(va / static_cast<double>(a.size()) + vb / static_cast<double>(b.size()));
  return (ma - mb) / se;
}

// Fraction of points whose nearest embedded neighbor shares their label.
inline double nn_purity(const Eigen::MatrixXd& embedding, const std::vector<int>& labels) {
  const Eigen::Index n = embedding.rows();
  int pure = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index best_j = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      double d = (embedding.row(i) - embedding.row(j)).squaredNorm();
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    if (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(best_j)]) ++pure;
  }
  return static_cast<double>(pure) / static_cast<double>(n);
}

// Sample Pearson correlation.
inline double correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  double mx = x.mean(), my = y.mean();
  Eigen::ArrayXd cx = x.array() - mx;
  Eigen::ArrayXd cy = y.array() - my;
  return (cx * cy).sum() / std::sqrt((cx * cx).sum() * (cy * cy).sum());
}

}  // namespace testsupport
