#include "htmmiow/reduce.hpp"

#include <algorithm>

namespace htmmiow {

std::string to_string(ReductionStrategy strategy) {
  switch (strategy) {
    case ReductionStrategy::Umap:
      return "umap";
    case ReductionStrategy::PcaThenUmap:
      return "pca_umap";
    case ReductionStrategy::PcaFull:
      return "pca_full";
    case ReductionStrategy::Pca80:
      return "pca80";
  }
  throw InvalidArgument("unknown reduction strategy");
}

ReductionStrategy parse_strategy(const std::string& name) {
  if (name == "umap") return ReductionStrategy::Umap;
  if (name == "pca_umap") return ReductionStrategy::PcaThenUmap;
  if (name == "pca_full") return ReductionStrategy::PcaFull;
  if (name == "pca80") return ReductionStrategy::Pca80;
  throw InvalidArgument("unknown reduction strategy: " + name);
}

namespace {

UmapConfig umap_defaults(Eigen::Index n, int n_components, std::uint64_t seed) {
  UmapConfig cfg;
  cfg.n_neighbors = std::min<int>(15, static_cast<int>(n) - 1);
  cfg.n_components = n_components;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

EmbeddingMatrix reduce(const IlrMatrix& ilr_data, ReductionStrategy strategy, int n_components,
                       std::uint64_t seed) {
  const Eigen::MatrixXd& X = ilr_data.values;
  const Eigen::Index n = X.rows();
  if (n_components < 1) throw InvalidArgument("n_components must be at least 1");

  EmbeddingMatrix out;
  out.strategy = strategy;
  switch (strategy) {
    case ReductionStrategy::Umap: {
      out.values = umap_embed(X, umap_defaults(n, n_components, seed));
      break;
    }
    case ReductionStrategy::PcaThenUmap: {
      auto count = static_cast<int>(std::min<Eigen::Index>(n, X.cols()));
      PcaModel model = pca_fit(X, ComponentCount{count});
      Eigen::MatrixXd scores = pca_transform(model, X);
      out.values = umap_embed(scores, umap_defaults(n, n_components, seed));
      break;
    }
    case ReductionStrategy::PcaFull: {
      PcaModel model = pca_fit(X, VarianceThreshold{1.0});
      out.values = pca_transform(model, X);
      break;
    }
    case ReductionStrategy::Pca80: {
      PcaModel model = pca_fit(X, VarianceThreshold{0.8});
      out.values = pca_transform(model, X);
      break;
    }
  }
  return out;
}

}  // namespace htmmiow
