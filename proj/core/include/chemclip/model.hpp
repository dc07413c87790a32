#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "chemclip/fingerprint.hpp"
#include "chemclip/matrix.hpp"
#include "chemclip/nn.hpp"

namespace chemclip {

struct ModelDims {
  std::size_t inorganic_input = kInorganicFeatureCount;
  std::size_t organic_input = kFingerprintBits;
  std::size_t hidden = 512;
  std::size_t embed = 256;
};

// Two projection heads into a shared embedding space. Both heads have the
// same shape apart from the input width; outputs are L2-normalised before any
// similarity is taken.
struct ChemClipModel {
  Mlp inorganic_head;
  Mlp organic_head;
  double temperature = 0.07;

  std::size_t embed_dim() const { return organic_head.output_dim(); }
  ModelDims dims() const;
  std::vector<Matrix*> parameters();  // inorganic head first, then organic
  std::vector<const Matrix*> parameters() const;
};

ChemClipModel make_model(const ModelDims& dims, std::uint64_t seed, double dropout_rate, double temperature = 0.07);

// Unit-norm embeddings, dropout off.
Matrix embed_inorganic(const ChemClipModel& model, const Matrix& features);
Matrix embed_organic(const ChemClipModel& model, const Matrix& features);

struct InfoNceResult {
  double loss = 0.0;
  Matrix grad_inorganic;
  Matrix grad_organic;
};

// Symmetric InfoNCE over S = Zi Zo^T / tau with the diagonal as targets:
// the mean of the row-wise and column-wise softmax cross-entropies.
InfoNceResult info_nce_loss(const Matrix& inorganic, const Matrix& organic, double temperature);

struct TripletResult {
  double loss = 0.0;
  Matrix grad_anchor;
  Matrix grad_positive;
  Matrix grad_negative;
  std::size_t violations = 0;
};

// mean_t max(0, a.n - a.p + margin) over unit vectors; empty input gives 0.
TripletResult triplet_loss(const Matrix& anchors, const Matrix& positives, const Matrix& negatives, double margin);

struct LossInputs {
  Matrix inorganic;              // B x inorganic_input
  Matrix organic;                // B x organic_input, row i paired with inorganic row i
  std::vector<std::size_t> anchors;  // inorganic rows that own a triplet
  Matrix positives;              // T x organic_input
  Matrix negatives;              // T x organic_input
};

struct TotalLoss {
  double loss = 0.0;
  double info_nce = 0.0;
  double triplet = 0.0;
  std::vector<Matrix> grads;  // matches ChemClipModel::parameters()
};

// InfoNCE + triplet loss with equal weight, backpropagated through the row
// normalisation and both heads. `rng` drives dropout when training.
TotalLoss total_loss(const ChemClipModel& model, const LossInputs& inputs, double margin, bool training,
                     SplitMix64* rng = nullptr);

}  // namespace chemclip
