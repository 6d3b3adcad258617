#pragma once

// Dispatch over the four mediator-reduction strategies: plain UMAP,
// PCA-then-UMAP, PCA keeping all variance, and PCA at the 80% threshold.

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "htmmiow/compositional.hpp"
#include "htmmiow/pca.hpp"
#include "htmmiow/umap.hpp"

namespace htmmiow {

enum class ReductionStrategy { Umap, PcaThenUmap, PcaFull, Pca80 };

std::string to_string(ReductionStrategy strategy);
ReductionStrategy parse_strategy(const std::string& name);

struct EmbeddingMatrix {
  Eigen::MatrixXd values;  // n x c mediator components
  ReductionStrategy strategy = ReductionStrategy::Umap;
};

// n_components applies to the UMAP paths; the PCA-threshold strategies
// determine their own component count from the data. UMAP hyperparameters
// take library defaults with n_neighbors capped at n-1.
EmbeddingMatrix reduce(const IlrMatrix& ilr_data, ReductionStrategy strategy, int n_components,
                       std::uint64_t seed);

}  // namespace htmmiow
