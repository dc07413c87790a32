#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "chemclip/embeddings.hpp"
#include "chemclip/matrix.hpp"

namespace chemclip {

enum class ProjectionMethod { kPca, kTsne };

struct Projection2D {
  Matrix coordinates;  // n x 2
  ProjectionMethod method = ProjectionMethod::kPca;
  double perplexity = 0.0;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
};

// Mean-centred projection onto the two leading covariance eigenvectors found
// by power iteration with deflation. Each axis is signed so that its
// largest-magnitude loading is positive.
Projection2D pca_2d(const Matrix& data);

struct TsneParams {
  double perplexity = 30.0;
  std::size_t iterations = 1000;
  std::uint64_t seed = 0;
  double learning_rate = 200.0;
  double early_exaggeration = 12.0;
  std::size_t exaggeration_iterations = 250;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  std::size_t momentum_switch = 250;
};

struct TsneResult {
  Projection2D projection;
  double initial_kl = 0.0;  // KL(P || Q) after the first update
  double final_kl = 0.0;    // after the last update
};

// Exact O(n^2) t-SNE. Throws Error(kPerplexityTooLarge) unless n > 3 * perplexity.
TsneResult tsne_2d(const Matrix& data, const TsneParams& params = {});

// Conditional affinities P(j|i) with per-row precision found by bisection so
// that the row entropy matches log(perplexity). Exposed for testing.
Matrix conditional_affinities(const Matrix& squared_distances, double perplexity);

// Scatter plot: inorganic records as squares (red), organic as circles
// (blue); dark fill for active, light for inactive. Output bytes depend only
// on the inputs.
std::string render_scatter_svg(const Projection2D& projection, std::span<const Domain> domains,
                               std::span<const bool> active, const std::string& title = "");

void write_projection_csv(const std::filesystem::path& path, const Projection2D& projection,
                          const EmbeddingTable& table);

}  // namespace chemclip
