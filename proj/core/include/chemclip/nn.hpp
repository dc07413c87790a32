#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "chemclip/matrix.hpp"
#include "chemclip/rng.hpp"

namespace chemclip {

struct DenseLayer {
  Matrix weight;  // fan_in x fan_out
  Matrix bias;    // 1 x fan_out
};

// Feed-forward stack: affine -> ReLU -> dropout on every hidden layer, plain
// affine on the last one.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<DenseLayer> layers, double dropout_rate);

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  double dropout_rate() const { return dropout_rate_; }
  void set_dropout_rate(double p);

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::vector<std::size_t> dims() const;

  // Parameter order: layer0.weight, layer0.bias, layer1.weight, ...
  std::vector<Matrix*> parameters();
  std::vector<const Matrix*> parameters() const;

 private:
  std::vector<DenseLayer> layers_;
  double dropout_rate_ = 0.0;
};

// Glorot-uniform weights and zero biases from a splitmix64 stream.
Mlp init_mlp(std::span<const std::size_t> dims, std::uint64_t seed, double dropout_rate = 0.0);

struct MlpCache {
  std::vector<Matrix> layer_inputs;  // input seen by each layer
  std::vector<Matrix> pre_activations;  // hidden layers only
  std::vector<Matrix> dropout_scale;    // hidden layers only; empty when dropout was off
};

struct MlpForward {
  Matrix output;
  MlpCache cache;
};

// Inverted dropout: kept units are scaled by 1/(1-p) during training, so
// inference is a plain pass. `rng` is only consulted when training with p > 0.
MlpForward mlp_forward(const Mlp& mlp, const Matrix& input, bool training, SplitMix64* rng = nullptr);
Matrix mlp_predict(const Mlp& mlp, const Matrix& input);

struct MlpGradients {
  std::vector<Matrix> parameters;  // same order as Mlp::parameters()
  Matrix input;                    // empty unless requested
};

MlpGradients mlp_backward(const Mlp& mlp, const MlpCache& cache, const Matrix& upstream, bool want_input_grad = true);

inline constexpr double kNormalizeEpsilon = 1e-12;

// Each row divided by max(||row||, 1e-12).
Matrix l2_normalize_rows(const Matrix& m);
// Vector-Jacobian product of l2_normalize_rows at `input`. Zero rows get a
// zero gradient.
Matrix l2_normalize_rows_backward(const Matrix& input, const Matrix& upstream);

// Global L2 norm over all gradients; rescales in place when it exceeds
// max_norm. Returns the norm before clipping.
double clip_grad_norm(std::span<Matrix> grads, double max_norm);

struct AdamWConfig {
  double lr = 1e-3;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Decoupled weight decay (param -= lr * wd * param) followed by the
// bias-corrected Adam update.
class AdamW {
 public:
  explicit AdamW(AdamWConfig config = {}) : config_(config) {}

  void step(std::span<Matrix* const> params, std::span<const Matrix> grads);

  std::uint64_t steps() const { return step_; }
  const AdamWConfig& config() const { return config_; }

 private:
  AdamWConfig config_;
  std::uint64_t step_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

}  // namespace chemclip
