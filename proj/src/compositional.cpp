#include "htmmiow/compositional.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

namespace htmmiow {

void CountMatrix::validate() const {
  if (values.rows() < 1 || values.cols() < 2) {
    throw ShapeError("count matrix needs at least 1 sample and 2 taxa");
  }
  if ((values.array() < 0).any() || !values.allFinite()) {
    throw DataError("count matrix entries must be finite and non-negative");
  }
  if (static_cast<Eigen::Index>(sample_ids.size()) != values.rows()) {
    throw ShapeError("sample id count does not match row count");
  }
  if (static_cast<Eigen::Index>(taxa_ids.size()) != values.cols()) {
    throw ShapeError("taxa id count does not match column count");
  }
  std::unordered_set<std::string> seen;
  for (const auto& id : sample_ids) {
    if (!seen.insert(id).second) throw DataError("duplicate sample id: " + id);
  }
  seen.clear();
  for (const auto& id : taxa_ids) {
    if (!seen.insert(id).second) throw DataError("duplicate taxa id: " + id);
  }
}

CountMatrix impute_pseudocount(const CountMatrix& counts, double pseudo) {
  if (!(pseudo > 0)) throw InvalidArgument("pseudocount must be positive");
  CountMatrix out = counts;
  out.values = (counts.values.array() == 0.0).select(pseudo, counts.values);
  return out;
}

CompositionMatrix close_composition(const Eigen::MatrixXd& values) {
  if ((values.array() <= 0).any() || !values.allFinite()) {
    throw DataError("closure requires strictly positive finite entries");
  }
  CompositionMatrix out;
  out.values = values;
  // renormalize to a fixpoint so row sums are exactly 1 and closure is
  // exactly idempotent (division by a sum of exactly 1.0 is the identity)
  for (Eigen::Index i = 0; i < out.values.rows(); ++i) {
    for (int pass = 0; pass < 10; ++pass) {
      double sum = out.values.row(i).sum();
      if (sum == 1.0) break;
      out.values.row(i) /= sum;
    }
  }
  return out;
}

double geometric_mean(const Eigen::VectorXd& v) {
  if (v.size() == 0) throw InvalidArgument("geometric mean of an empty vector");
  if ((v.array() <= 0).any()) throw DataError("geometric mean requires positive entries");
  return std::exp(v.array().log().mean());
}

namespace {

// Sums the logs of the selected parts in ascending value order, so the
// result depends only on the multiset of values. This makes ilr exactly
// equivariant under taxa permutations paired with the permuted partition.
double log_sum_over(const Eigen::VectorXd& row, const std::vector<int>& idx,
                    std::vector<double>& scratch) {
  scratch.clear();
  for (int j : idx) {
    if (j < 0 || j >= row.size()) throw ShapeError("contrast index out of range");
    double x = row[j];
    if (!(x > 0)) throw DataError("ilr balance requires positive parts");
    scratch.push_back(std::log(x));
  }
  std::sort(scratch.begin(), scratch.end());
  double s = 0;
  for (double v : scratch) s += v;
  return s;
}

double mean_log_over(const Eigen::VectorXd& row, const std::vector<int>& idx) {
  std::vector<double> scratch;
  return log_sum_over(row, idx, scratch) / static_cast<double>(idx.size());
}

void check_contrast(const std::vector<int>& left, const std::vector<int>& right) {
  if (left.empty() || right.empty()) {
    throw InvalidArgument("balance contrast sides must be non-empty");
  }
  std::unordered_set<int> seen(left.begin(), left.end());
  if (seen.size() != left.size()) throw InvalidArgument("balance contrast repeats an index");
  for (int j : right) {
    if (!seen.insert(j).second) throw InvalidArgument("balance contrast sides overlap");
  }
}

}  // namespace

double ilr_balance(const Eigen::VectorXd& composition_row, const std::vector<int>& left,
                   const std::vector<int>& right) {
  check_contrast(left, right);
  auto r = static_cast<double>(left.size());
  auto s = static_cast<double>(right.size());
  double coef = std::sqrt(r * s / (r + s));
  return coef * (mean_log_over(composition_row, left) - mean_log_over(composition_row, right));
}

BalancePartition default_partition(int p) {
  if (p < 2) throw InvalidArgument("partition needs at least 2 parts");
  BalancePartition partition;
  partition.n_parts = p;
  partition.contrasts.reserve(static_cast<std::size_t>(p) - 1);
  for (int k = 0; k + 1 < p; ++k) {
    Contrast c;
    c.left = {k};
    c.right.reserve(static_cast<std::size_t>(p - k) - 1);
    for (int j = k + 1; j < p; ++j) c.right.push_back(j);
    partition.contrasts.push_back(std::move(c));
  }
  return partition;
}

void validate_partition(const BalancePartition& partition) {
  int p = partition.n_parts;
  if (p < 2) throw InvalidArgument("partition needs at least 2 parts");
  if (partition.contrasts.size() != static_cast<std::size_t>(p) - 1) {
    throw InvalidArgument("partition must carry exactly p-1 contrasts");
  }
  // Active blocks, each kept sorted; every contrast must split one of them.
  std::vector<std::vector<int>> blocks;
  {
    std::vector<int> all(static_cast<std::size_t>(p));
    for (int j = 0; j < p; ++j) all[static_cast<std::size_t>(j)] = j;
    blocks.push_back(std::move(all));
  }
  for (const auto& c : partition.contrasts) {
    check_contrast(c.left, c.right);
    std::vector<int> combined;
    combined.reserve(c.left.size() + c.right.size());
    combined.insert(combined.end(), c.left.begin(), c.left.end());
    combined.insert(combined.end(), c.right.begin(), c.right.end());
    std::sort(combined.begin(), combined.end());
    auto it = std::find(blocks.begin(), blocks.end(), combined);
    if (it == blocks.end()) {
      throw InvalidArgument("contrast does not split an active block of the partition");
    }
    blocks.erase(it);
    auto sorted_copy = [](const std::vector<int>& v) {
      std::vector<int> out(v);
      std::sort(out.begin(), out.end());
      return out;
    };
    if (c.left.size() > 1) blocks.push_back(sorted_copy(c.left));
    if (c.right.size() > 1) blocks.push_back(sorted_copy(c.right));
  }
}

IlrMatrix ilr_transform(const CompositionMatrix& comp, const BalancePartition& partition) {
  validate_partition(partition);
  const Eigen::Index n = comp.values.rows();
  const Eigen::Index p = comp.values.cols();
  if (partition.n_parts != p) {
    throw ShapeError("partition size does not match composition columns");
  }
  IlrMatrix out;
  out.partition = partition;
  out.values.resize(n, p - 1);
  std::vector<double> scratch;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd row = comp.values.row(i);
    for (std::size_t k = 0; k < partition.contrasts.size(); ++k) {
      const auto& c = partition.contrasts[k];
      double left_sum = log_sum_over(row, c.left, scratch);
      double right_sum = log_sum_over(row, c.right, scratch);
      auto r = static_cast<double>(c.left.size());
      auto s = static_cast<double>(c.right.size());
      double coef = std::sqrt(r * s / (r + s));
      out.values(i, static_cast<Eigen::Index>(k)) = coef * (left_sum / r - right_sum / s);
    }
  }
  if (!out.values.allFinite()) throw NumericalError("ilr transform produced non-finite values");
  return out;
}

Eigen::MatrixXd clr_transform(const CompositionMatrix& comp) {
  if ((comp.values.array() <= 0).any()) {
    throw DataError("clr requires strictly positive entries");
  }
  Eigen::MatrixXd logs = comp.values.array().log();
  return logs.colwise() - logs.rowwise().mean();
}

double aitchison_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw ShapeError("aitchison distance: length mismatch");
  if ((a.array() <= 0).any() || (b.array() <= 0).any()) {
    throw DataError("aitchison distance requires positive entries");
  }
  Eigen::ArrayXd la = a.array().log();
  Eigen::ArrayXd lb = b.array().log();
  Eigen::ArrayXd diff = (la - la.mean()) - (lb - lb.mean());
  return std::sqrt((diff * diff).sum());
}

}  // namespace htmmiow
