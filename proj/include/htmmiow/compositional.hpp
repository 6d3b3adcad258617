#pragma once

// Compositional count data and log-ratio transforms. Raw counts get a
// pseudocount for zeros, are closed onto the simplex, and map to Euclidean
// coordinates through an ilr basis built from a sequential binary partition
// of the taxa. ilr preserves Aitchison distance; clr is kept as the
// independent route for checking that isometry.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "htmmiow/errors.hpp"

namespace htmmiow {

struct CountMatrix {
  Eigen::MatrixXd values;               // n x p, entries >= 0
  std::vector<std::string> sample_ids;  // n labels, unique
  std::vector<std::string> taxa_ids;    // p labels, unique

  Eigen::Index n_samples() const { return values.rows(); }
  Eigen::Index n_taxa() const { return values.cols(); }
  void validate() const;
};

// Strictly positive rows, each summing to 1.
struct CompositionMatrix {
  Eigen::MatrixXd values;
};

// One balance: numerator taxa (left) against denominator taxa (right).
struct Contrast {
  std::vector<int> left;
  std::vector<int> right;
};

struct BalancePartition {
  int n_parts = 0;
  std::vector<Contrast> contrasts;  // exactly n_parts - 1
};

// Checks that the contrasts form a sequential binary partition of
// {0, ..., n_parts-1}: each contrast splits one currently active block.
void validate_partition(const BalancePartition& partition);

struct IlrMatrix {
  Eigen::MatrixXd values;  // n x (p-1)
  BalancePartition partition;
};

// Replaces every zero entry with pseudo; nonzero entries are untouched.
CountMatrix impute_pseudocount(const CountMatrix& counts, double pseudo = 0.5);

// Divides each row by its sum. All entries must be strictly positive.
CompositionMatrix close_composition(const Eigen::MatrixXd& values);

double geometric_mean(const Eigen::VectorXd& v);

// sqrt(r*s/(r+s)) * log(g(row[left]) / g(row[right]))
double ilr_balance(const Eigen::VectorXd& composition_row, const std::vector<int>& left,
                   const std::vector<int>& right);

// Pivot partition: contrast k is {k} against {k+1, ..., p-1}.
BalancePartition default_partition(int p);

IlrMatrix ilr_transform(const CompositionMatrix& comp, const BalancePartition& partition);

// log(x_j / g(row)) per entry; output rows sum to zero.
Eigen::MatrixXd clr_transform(const CompositionMatrix& comp);

// Euclidean distance between clr(a) and clr(b).
double aitchison_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace htmmiow
