#pragma once

// UMAP: a fuzzy k-nearest-neighbor graph calibrated per point, then a
// stochastic-gradient layout that matches its topology in c dimensions.
// Neighbor search is exact brute force (desk-scale n), and the SGD runs
// single-threaded with a fixed sampling schedule so a seed pins the
// embedding bit-for-bit.

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "htmmiow/errors.hpp"

namespace htmmiow {

struct UmapConfig {
  int n_neighbors = 15;
  double min_dist = 0.1;
  int n_components = 2;
  int n_epochs = 200;
  std::uint64_t seed = 0;
  double learning_rate = 1.0;
  int negative_sample_rate = 5;
};

struct FuzzyGraph {
  int n_points = 0;
  int n_neighbors = 0;
  Eigen::MatrixXi neighbor_index;  // n x k, ascending by distance
  Eigen::MatrixXd neighbor_dist;   // n x k
  Eigen::VectorXd rho;             // nearest-neighbor distance per point
  Eigen::VectorXd sigma;           // calibrated bandwidth per point

  struct Edge {
    int a;
    int b;
    double weight;
  };
  std::vector<Edge> edges;  // a < b, weights after probabilistic union

  // Pre-union membership of j as seen from i: exp(-max(0, d_ij - rho_i) / sigma_i)
  // for j among i's neighbors, 0 otherwise.
  double directed_membership(int i, int j) const;
};

// Per-point bandwidths are found by bisection so that the membership sum
// hits log2(k); memberships are then symmetrized by a + b - a*b.
FuzzyGraph fuzzy_knn_graph(const Eigen::MatrixXd& X, int n_neighbors);

// Least-squares fit of 1/(1 + a d^(2b)) to the min_dist offset-exponential
// target curve; returns (a, b).
std::pair<double, double> fit_rate_curve(double min_dist);

Eigen::MatrixXd umap_embed(const Eigen::MatrixXd& X, const UmapConfig& cfg);

}  // namespace htmmiow
