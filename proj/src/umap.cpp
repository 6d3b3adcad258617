#include "htmmiow/umap.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "htmmiow/rng.hpp"

namespace htmmiow {

namespace {

constexpr double kSmoothTolerance = 1e-5;
constexpr int kBisectionIterations = 64;
constexpr double kMinBandwidthScale = 1e-3;
constexpr double kRepulsionStrength = 1.0;
constexpr double kGradientClip = 4.0;

double clip(double x) { return std::clamp(x, -kGradientClip, kGradientClip); }

double membership_sum(const Eigen::VectorXd& dists, double rho, double sigma) {
  double sum = 0;
  for (Eigen::Index j = 0; j < dists.size(); ++j) {
    double gap = dists[j] - rho;
    sum += gap <= 0 ? 1.0 : std::exp(-gap / sigma);
  }
  return sum;
}

}  // namespace

FuzzyGraph fuzzy_knn_graph(const Eigen::MatrixXd& X, int n_neighbors) {
  const auto n = static_cast<int>(X.rows());
  if (n < 2) throw ShapeError("fuzzy graph needs at least 2 points");
  if (n_neighbors < 2) throw InvalidArgument("n_neighbors must be at least 2");
  if (n_neighbors >= n) throw InvalidArgument("n_neighbors must be below the point count");
  if (!X.allFinite()) throw DataError("fuzzy graph input has non-finite entries");
  const int k = n_neighbors;

  FuzzyGraph graph;
  graph.n_points = n;
  graph.n_neighbors = k;
  graph.neighbor_index.resize(n, k);
  graph.neighbor_dist.resize(n, k);
  graph.rho.resize(n);
  graph.sigma.resize(n);

  const double target = std::log2(static_cast<double>(k));
  std::vector<std::pair<double, int>> order(static_cast<std::size_t>(n) - 1);

  for (int i = 0; i < n; ++i) {
    // exact k nearest by Euclidean distance, ties broken by index
    std::size_t m = 0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      order[m++] = {(X.row(i) - X.row(j)).norm(), j};
    }
    std::partial_sort(order.begin(), order.begin() + k, order.end());

    Eigen::VectorXd dists(k);
    for (int j = 0; j < k; ++j) {
      graph.neighbor_index(i, j) = order[static_cast<std::size_t>(j)].second;
      dists[j] = order[static_cast<std::size_t>(j)].first;
      graph.neighbor_dist(i, j) = dists[j];
    }
    graph.rho[i] = dists[0];

    // bisection on the bandwidth so the membership sum hits log2(k)
    double lo = 0.0, hi = std::numeric_limits<double>::infinity(), mid = 1.0;
    for (int it = 0; it < kBisectionIterations; ++it) {
      double psum = membership_sum(dists, graph.rho[i], mid);
      if (std::abs(psum - target) < kSmoothTolerance) break;
      if (psum > target) {
        hi = mid;
        mid = 0.5 * (lo + hi);
      } else {
        lo = mid;
        mid = std::isinf(hi) ? mid * 2.0 : 0.5 * (lo + hi);
      }
    }
    double mean_dist = dists.mean();
    if (mean_dist > 0) mid = std::max(mid, kMinBandwidthScale * mean_dist);
    graph.sigma[i] = mid;
  }

  // probabilistic union over the two directions
  std::map<std::pair<int, int>, double> sym;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) {
      int other = graph.neighbor_index(i, j);
      double w = graph.directed_membership(i, other);
      auto key = std::minmax(i, other);
      auto [it, inserted] = sym.emplace(std::pair<int, int>(key.first, key.second), w);
      if (!inserted) it->second = it->second + w - it->second * w;
    }
  }
  graph.edges.reserve(sym.size());
  for (const auto& [key, w] : sym) {
    graph.edges.push_back({key.first, key.second, w});
  }
  return graph;
}

double FuzzyGraph::directed_membership(int i, int j) const {
  for (int c = 0; c < n_neighbors; ++c) {
    if (neighbor_index(i, c) == j) {
      double gap = neighbor_dist(i, c) - rho[i];
      return gap <= 0 ? 1.0 : std::exp(-gap / sigma[i]);
    }
  }
  return 0.0;
}

std::pair<double, double> fit_rate_curve(double min_dist) {
  if (min_dist < 0) throw InvalidArgument("min_dist must be non-negative");
  const int m = 300;
  Eigen::VectorXd xs(m), ys(m);
  for (int i = 0; i < m; ++i) {
    double x = 3.0 * static_cast<double>(i) / (m - 1);
    xs[i] = x;
    ys[i] = x <= min_dist ? 1.0 : std::exp(-(x - min_dist));
  }

  auto sse_at = [&](double a, double b) {
    double sse = 0;
    for (int i = 0; i < m; ++i) {
      double f = 1.0 / (1.0 + a * std::pow(xs[i], 2.0 * b));
      sse += (f - ys[i]) * (f - ys[i]);
    }
    return sse;
  };

  // Levenberg-Marquardt on (a, b)
  double a = 1.0, b = 1.0, lambda = 1e-3;
  double sse = sse_at(a, b);
  for (int iter = 0; iter < 200; ++iter) {
    Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
    Eigen::Vector2d jtr = Eigen::Vector2d::Zero();
    for (int i = 0; i < m; ++i) {
      double x = xs[i];
      double p = x > 0 ? std::pow(x, 2.0 * b) : 0.0;
      double denom = 1.0 + a * p;
      double f = 1.0 / denom;
      double r = f - ys[i];
      double dfda = -p / (denom * denom);
      double dfdb = x > 0 ? -2.0 * a * p * std::log(x) / (denom * denom) : 0.0;
      Eigen::Vector2d grad(dfda, dfdb);
      jtj += grad * grad.transpose();
      jtr += grad * r;
    }
    Eigen::Matrix2d damped = jtj;
    damped(0, 0) += lambda * jtj(0, 0);
    damped(1, 1) += lambda * jtj(1, 1);
    Eigen::Vector2d delta = damped.ldlt().solve(-jtr);
    double a_new = a + delta[0];
    double b_new = b + delta[1];
    if (a_new > 0 && b_new > 0) {
      double sse_new = sse_at(a_new, b_new);
      if (sse_new < sse) {
        double improvement = sse - sse_new;
        a = a_new;
        b = b_new;
        sse = sse_new;
        lambda = std::max(lambda / 3.0, 1e-12);
        if (improvement < 1e-14 && delta.norm() < 1e-10) break;
        continue;
      }
    }
    lambda *= 3.0;
    if (lambda > 1e12) break;
  }
  return {a, b};
}

Eigen::MatrixXd umap_embed(const Eigen::MatrixXd& X, const UmapConfig& cfg) {
  const auto n = static_cast<int>(X.rows());
  if (cfg.n_components < 1) throw InvalidArgument("n_components must be at least 1");
  if (cfg.n_epochs < 1) throw InvalidArgument("n_epochs must be at least 1");
  if (cfg.negative_sample_rate < 0) throw InvalidArgument("negative_sample_rate must be >= 0");
  if (!(cfg.learning_rate > 0)) throw InvalidArgument("learning_rate must be positive");

  FuzzyGraph graph = fuzzy_knn_graph(X, cfg.n_neighbors);
  auto [a, b] = fit_rate_curve(cfg.min_dist);
  const int dim = cfg.n_components;

  Rng rng(cfg.seed);
  Eigen::MatrixXd Y(n, dim);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < dim; ++d) Y(i, d) = rng.uniform() * 20.0 - 10.0;
  }

  // directed schedule: each symmetric edge is sampled from both endpoints,
  // proportionally to its membership weight
  double w_max = 0;
  for (const auto& e : graph.edges) w_max = std::max(w_max, e.weight);
  if (w_max <= 0) throw NumericalError("fuzzy graph has no positive edge weights");

  struct Directed {
    int head;
    int tail;
    double epochs_per_sample;
    double next_sample;
  };
  std::vector<Directed> schedule;
  schedule.reserve(graph.edges.size() * 2);
  for (const auto& e : graph.edges) {
    double eps = w_max / e.weight;
    schedule.push_back({e.a, e.b, eps, eps});
    schedule.push_back({e.b, e.a, eps, eps});
  }

  const int ns = cfg.negative_sample_rate;
  for (int epoch = 1; epoch <= cfg.n_epochs; ++epoch) {
    double alpha = cfg.learning_rate *
                   (1.0 - static_cast<double>(epoch - 1) / static_cast<double>(cfg.n_epochs));
    for (auto& edge : schedule) {
      if (edge.next_sample > static_cast<double>(epoch)) continue;
      edge.next_sample += edge.epochs_per_sample;

      auto yi = Y.row(edge.head);
      auto yj = Y.row(edge.tail);
      double d2 = (yi - yj).squaredNorm();
      if (d2 > 0) {
        double coeff = (-2.0 * a * b * std::pow(d2, b - 1.0)) / (1.0 + a * std::pow(d2, b));
        for (int d = 0; d < dim; ++d) {
          double g = clip(coeff * (yi[d] - yj[d]));
          yi[d] += alpha * g;
          yj[d] -= alpha * g;
        }
      }

      for (int t = 0; t < ns; ++t) {
        int other = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        auto yk = Y.row(other);
        double dn2 = (yi - yk).squaredNorm();
        if (dn2 > 0) {
          double coeff =
              (2.0 * kRepulsionStrength * b) / ((0.001 + dn2) * (1.0 + a * std::pow(dn2, b)));
          for (int d = 0; d < dim; ++d) yi[d] += alpha * clip(coeff * (yi[d] - yk[d]));
        } else if (other != edge.head) {
          // coincident distinct point: kick apart
          for (int d = 0; d < dim; ++d) yi[d] += alpha * kGradientClip;
        }
      }
    }
  }

  if (!Y.allFinite()) throw NumericalError("umap: non-finite values in the embedding forces");
  return Y;
}

}  // namespace htmmiow
