#include "chemclip/nn.hpp"

#include <cmath>
#include <string>

#include "chemclip/error.hpp"

namespace chemclip {

Mlp::Mlp(std::vector<DenseLayer> layers, double dropout_rate) : layers_(std::move(layers)) {
  set_dropout_rate(dropout_rate);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.bias.rows() != 1 || l.bias.cols() != l.weight.cols()) {
      throw Error(ErrorCode::kDimensionMismatch, "bias shape does not match layer " + std::to_string(i));
    }
    if (i > 0 && layers_[i - 1].weight.cols() != l.weight.rows()) {
      throw Error(ErrorCode::kDimensionMismatch, "layer " + std::to_string(i) + " does not chain");
    }
  }
}

void Mlp::set_dropout_rate(double p) {
  if (!(p >= 0.0 && p < 1.0)) throw Error(ErrorCode::kInvalidArgument, "dropout rate must be in [0, 1)");
  dropout_rate_ = p;
}

std::size_t Mlp::input_dim() const { return layers_.empty() ? 0 : layers_.front().weight.rows(); }
std::size_t Mlp::output_dim() const { return layers_.empty() ? 0 : layers_.back().weight.cols(); }

std::vector<std::size_t> Mlp::dims() const {
  std::vector<std::size_t> d;
  if (layers_.empty()) return d;
  d.push_back(input_dim());
  for (const auto& l : layers_) d.push_back(l.weight.cols());
  return d;
}

std::vector<Matrix*> Mlp::parameters() {
  std::vector<Matrix*> out;
  for (auto& l : layers_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

std::vector<const Matrix*> Mlp::parameters() const {
  std::vector<const Matrix*> out;
  for (const auto& l : layers_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

Mlp init_mlp(std::span<const std::size_t> dims, std::uint64_t seed, double dropout_rate) {
  if (dims.size() < 2) throw Error(ErrorCode::kInvalidArgument, "an MLP needs at least input and output dims");
  SplitMix64 rng(seed);
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const double limit = std::sqrt(6.0 / static_cast<double>(dims[i] + dims[i + 1]));
    DenseLayer layer{Matrix(dims[i], dims[i + 1]), Matrix(1, dims[i + 1])};
    for (double& w : layer.weight.values()) w = rng.uniform(-limit, limit);
    layers.push_back(std::move(layer));
  }
  return Mlp(std::move(layers), dropout_rate);
}

MlpForward mlp_forward(const Mlp& mlp, const Matrix& input, bool training, SplitMix64* rng) {
  if (input.cols() != mlp.input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "input has " + std::to_string(input.cols()) + " columns, network expects " +
                                                   std::to_string(mlp.input_dim()));
  }
  const double p = mlp.dropout_rate();
  const bool drop = training && p > 0.0;
  if (drop && rng == nullptr) throw Error(ErrorCode::kInvalidArgument, "training-mode dropout needs an rng");

  MlpForward result;
  Matrix x = input;
  const auto& layers = mlp.layers();
  for (std::size_t li = 0; li < layers.size(); ++li) {
    Matrix z = matmul(x, layers[li].weight);
    const auto bias = layers[li].bias.row(0);
    for (std::size_t r = 0; r < z.rows(); ++r) {
      auto zr = z.row(r);
      for (std::size_t c = 0; c < z.cols(); ++c) zr[c] += bias[c];
    }
    result.cache.layer_inputs.push_back(std::move(x));
    if (li + 1 == layers.size()) {
      x = std::move(z);
      break;
    }
    Matrix h = z;
    for (double& v : h.values()) v = v > 0.0 ? v : 0.0;
    if (drop) {
      Matrix scale(h.rows(), h.cols());
      const double keep_scale = 1.0 / (1.0 - p);
      for (double& s : scale.values()) s = rng->uniform() < p ? 0.0 : keep_scale;
      for (std::size_t i = 0; i < h.size(); ++i) h.values()[i] *= scale.values()[i];
      result.cache.dropout_scale.push_back(std::move(scale));
    }
    result.cache.pre_activations.push_back(std::move(z));
    x = std::move(h);
  }
  result.output = std::move(x);
  return result;
}

Matrix mlp_predict(const Mlp& mlp, const Matrix& input) { return mlp_forward(mlp, input, false).output; }

MlpGradients mlp_backward(const Mlp& mlp, const MlpCache& cache, const Matrix& upstream, bool want_input_grad) {
  const auto& layers = mlp.layers();
  if (cache.layer_inputs.size() != layers.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "cache does not belong to this network");
  }
  if (upstream.cols() != mlp.output_dim() || upstream.rows() != cache.layer_inputs.front().rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "upstream gradient shape mismatch");
  }
  MlpGradients grads;
  grads.parameters.resize(2 * layers.size());
  Matrix delta = upstream;
  for (std::size_t li = layers.size(); li-- > 0;) {
    const Matrix& x = cache.layer_inputs[li];
    grads.parameters[2 * li] = matmul_transpose_a(x, delta);
    Matrix db(1, delta.cols());
    for (std::size_t r = 0; r < delta.rows(); ++r) {
      const auto dr = delta.row(r);
      for (std::size_t c = 0; c < delta.cols(); ++c) db(0, c) += dr[c];
    }
    grads.parameters[2 * li + 1] = std::move(db);
    if (li == 0 && !want_input_grad) break;

    Matrix dx = matmul_transpose_b(delta, layers[li].weight);
    if (li == 0) {
      grads.input = std::move(dx);
      break;
    }
    const std::size_t hidden = li - 1;
    const Matrix& z = cache.pre_activations[hidden];
    const bool dropped = !cache.dropout_scale.empty();
    for (std::size_t i = 0; i < dx.size(); ++i) {
      double g = dx.values()[i];
      if (dropped) g *= cache.dropout_scale[hidden].values()[i];
      dx.values()[i] = z.values()[i] > 0.0 ? g : 0.0;
    }
    delta = std::move(dx);
  }
  return grads;
}

Matrix l2_normalize_rows(const Matrix& m) {
  Matrix out = m;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    const double norm = std::max(std::sqrt(squared_norm(row)), kNormalizeEpsilon);
    for (double& v : row) v /= norm;
  }
  return out;
}

Matrix l2_normalize_rows_backward(const Matrix& input, const Matrix& upstream) {
  if (input.rows() != upstream.rows() || input.cols() != upstream.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "normalize backward shape mismatch");
  }
  Matrix grad(input.rows(), input.cols());
  for (std::size_t r = 0; r < input.rows(); ++r) {
    const auto x = input.row(r);
    const auto g = upstream.row(r);
    auto out = grad.row(r);
    const double norm = std::sqrt(squared_norm(x));
    if (norm == 0.0) continue;
    if (norm <= kNormalizeEpsilon) {
      for (std::size_t c = 0; c < x.size(); ++c) out[c] = g[c] / kNormalizeEpsilon;
      continue;
    }
    // d(x/|x|) = (g - y (y . g)) / |x|, y = x/|x|
    const double yg = dot(x, g) / norm;
    for (std::size_t c = 0; c < x.size(); ++c) out[c] = (g[c] - (x[c] / norm) * yg) / norm;
  }
  return grad;
}

double clip_grad_norm(std::span<Matrix> grads, double max_norm) {
  double total = 0.0;
  for (const auto& g : grads) total += squared_norm(g.values());
  const double norm = std::sqrt(total);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (auto& g : grads) {
      for (double& v : g.values()) v *= scale;
    }
  }
  return norm;
}

void AdamW::step(std::span<Matrix* const> params, std::span<const Matrix> grads) {
  if (params.size() != grads.size()) throw Error(ErrorCode::kDimensionMismatch, "parameter/gradient count mismatch");
  if (m_.empty()) {
    for (const Matrix* p : params) {
      m_.emplace_back(p->rows(), p->cols());
      v_.emplace_back(p->rows(), p->cols());
    }
  }
  if (m_.size() != params.size()) throw Error(ErrorCode::kDimensionMismatch, "optimizer state size mismatch");
  ++step_;
  const double t = static_cast<double>(step_);
  const double bc1 = 1.0 - std::pow(config_.beta1, t);
  const double bc2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i]->values();
    const auto g = grads[i].values();
    auto m = m_[i].values();
    auto v = v_[i].values();
    if (p.size() != g.size() || p.size() != m.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "gradient shape mismatch for parameter " + std::to_string(i));
    }
    for (std::size_t k = 0; k < p.size(); ++k) {
      p[k] -= config_.lr * config_.weight_decay * p[k];
      m[k] = config_.beta1 * m[k] + (1.0 - config_.beta1) * g[k];
      v[k] = config_.beta2 * v[k] + (1.0 - config_.beta2) * g[k] * g[k];
      const double m_hat = m[k] / bc1;
      const double v_hat = v[k] / bc2;
      p[k] -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.eps);
    }
  }
}

}  // namespace chemclip
