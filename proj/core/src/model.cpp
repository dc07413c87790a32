#include "chemclip/model.hpp"

#include <algorithm>
#include <cmath>

#include "chemclip/error.hpp"

namespace chemclip {

ModelDims ChemClipModel::dims() const {
  ModelDims d;
  d.inorganic_input = inorganic_head.input_dim();
  d.organic_input = organic_head.input_dim();
  d.hidden = organic_head.layers().size() > 1 ? organic_head.layers().front().weight.cols() : 0;
  d.embed = embed_dim();
  return d;
}

std::vector<Matrix*> ChemClipModel::parameters() {
  auto out = inorganic_head.parameters();
  auto org = organic_head.parameters();
  out.insert(out.end(), org.begin(), org.end());
  return out;
}

std::vector<const Matrix*> ChemClipModel::parameters() const {
  auto out = inorganic_head.parameters();
  auto org = organic_head.parameters();
  out.insert(out.end(), org.begin(), org.end());
  return out;
}

ChemClipModel make_model(const ModelDims& dims, std::uint64_t seed, double dropout_rate, double temperature) {
  if (!(temperature > 0.0)) throw Error(ErrorCode::kInvalidArgument, "temperature must be positive");
  SplitMix64 root(seed);
  const std::size_t inorg_dims[] = {dims.inorganic_input, dims.hidden, dims.embed};
  const std::size_t org_dims[] = {dims.organic_input, dims.hidden, dims.embed};
  ChemClipModel model;
  model.inorganic_head = init_mlp(inorg_dims, root(), dropout_rate);
  model.organic_head = init_mlp(org_dims, root(), dropout_rate);
  model.temperature = temperature;
  return model;
}

Matrix embed_inorganic(const ChemClipModel& model, const Matrix& features) {
  return l2_normalize_rows(mlp_predict(model.inorganic_head, features));
}

Matrix embed_organic(const ChemClipModel& model, const Matrix& features) {
  return l2_normalize_rows(mlp_predict(model.organic_head, features));
}

InfoNceResult info_nce_loss(const Matrix& zi, const Matrix& zo, double temperature) {
  if (!(temperature > 0.0)) throw Error(ErrorCode::kInvalidArgument, "temperature must be positive");
  if (zi.rows() != zo.rows() || zi.cols() != zo.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "InfoNCE needs equally shaped embedding batches");
  }
  const std::size_t b = zi.rows();
  InfoNceResult result;
  result.grad_inorganic = Matrix(b, zi.cols());
  result.grad_organic = Matrix(b, zo.cols());
  if (b == 0) return result;

  Matrix logits = matmul_transpose_b(zi, zo);
  for (double& v : logits.values()) v /= temperature;

  // dS accumulates softmax - onehot for both directions, each scaled by 1/(2B).
  Matrix dlogits(b, b);
  const double scale = 0.5 / static_cast<double>(b);
  double row_loss = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    const auto row = logits.row(i);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double v : row) sum += std::exp(v - mx);
    const double lse = mx + std::log(sum);
    row_loss += lse - row[i];
    for (std::size_t j = 0; j < b; ++j) dlogits(i, j) += scale * std::exp(row[j] - lse);
    dlogits(i, i) -= scale;
  }
  double col_loss = 0.0;
  for (std::size_t j = 0; j < b; ++j) {
    double mx = logits(0, j);
    for (std::size_t i = 1; i < b; ++i) mx = std::max(mx, logits(i, j));
    double sum = 0.0;
    for (std::size_t i = 0; i < b; ++i) sum += std::exp(logits(i, j) - mx);
    const double lse = mx + std::log(sum);
    col_loss += lse - logits(j, j);
    for (std::size_t i = 0; i < b; ++i) dlogits(i, j) += scale * std::exp(logits(i, j) - lse);
    dlogits(j, j) -= scale;
  }
  result.loss = 0.5 * (row_loss + col_loss) / static_cast<double>(b);

  for (double& v : dlogits.values()) v /= temperature;
  result.grad_inorganic = matmul(dlogits, zo);
  result.grad_organic = matmul_transpose_a(dlogits, zi);
  return result;
}

TripletResult triplet_loss(const Matrix& anchors, const Matrix& positives, const Matrix& negatives, double margin) {
  if (anchors.rows() != positives.rows() || anchors.rows() != negatives.rows() ||
      anchors.cols() != positives.cols() || anchors.cols() != negatives.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "triplet inputs must share a shape");
  }
  const std::size_t t = anchors.rows();
  TripletResult result;
  result.grad_anchor = Matrix(t, anchors.cols());
  result.grad_positive = Matrix(t, anchors.cols());
  result.grad_negative = Matrix(t, anchors.cols());
  if (t == 0) return result;
  const double inv = 1.0 / static_cast<double>(t);
  double total = 0.0;
  for (std::size_t k = 0; k < t; ++k) {
    const auto a = anchors.row(k);
    const auto p = positives.row(k);
    const auto n = negatives.row(k);
    const double hinge = dot(a, n) - dot(a, p) + margin;
    if (hinge <= 0.0) continue;
    total += hinge;
    ++result.violations;
    auto ga = result.grad_anchor.row(k);
    auto gp = result.grad_positive.row(k);
    auto gn = result.grad_negative.row(k);
    for (std::size_t c = 0; c < a.size(); ++c) {
      ga[c] = (n[c] - p[c]) * inv;
      gp[c] = -a[c] * inv;
      gn[c] = a[c] * inv;
    }
  }
  result.loss = total * inv;
  return result;
}

TotalLoss total_loss(const ChemClipModel& model, const LossInputs& in, double margin, bool training, SplitMix64* rng) {
  const std::size_t b = in.inorganic.rows();
  const std::size_t t = in.anchors.size();
  if (in.organic.rows() != b) throw Error(ErrorCode::kDimensionMismatch, "paired batches differ in size");
  if (in.positives.rows() != t || in.negatives.rows() != t) {
    throw Error(ErrorCode::kDimensionMismatch, "triplet rows do not match anchor count");
  }

  const MlpForward inorg = mlp_forward(model.inorganic_head, in.inorganic, training, rng);
  const Matrix organic_in = t > 0 ? vstack(std::vector<Matrix>{in.organic, in.positives, in.negatives}) : in.organic;
  const MlpForward org = mlp_forward(model.organic_head, organic_in, training, rng);

  const Matrix zi = l2_normalize_rows(inorg.output);
  const Matrix z_all = l2_normalize_rows(org.output);
  Matrix zo(b, z_all.cols()), zp(t, z_all.cols()), zn(t, z_all.cols());
  for (std::size_t r = 0; r < b; ++r) std::copy(z_all.row(r).begin(), z_all.row(r).end(), zo.row(r).begin());
  for (std::size_t r = 0; r < t; ++r) {
    std::copy(z_all.row(b + r).begin(), z_all.row(b + r).end(), zp.row(r).begin());
    std::copy(z_all.row(b + t + r).begin(), z_all.row(b + t + r).end(), zn.row(r).begin());
  }
  const Matrix za = gather_rows(zi, in.anchors);

  const InfoNceResult nce = info_nce_loss(zi, zo, model.temperature);
  const TripletResult trip = triplet_loss(za, zp, zn, margin);

  Matrix dzi = nce.grad_inorganic;
  for (std::size_t k = 0; k < t; ++k) {
    auto dst = dzi.row(in.anchors[k]);
    const auto src = trip.grad_anchor.row(k);
    for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
  }
  Matrix dz_all(z_all.rows(), z_all.cols());
  for (std::size_t r = 0; r < b; ++r) std::copy(nce.grad_organic.row(r).begin(), nce.grad_organic.row(r).end(), dz_all.row(r).begin());
  for (std::size_t r = 0; r < t; ++r) {
    std::copy(trip.grad_positive.row(r).begin(), trip.grad_positive.row(r).end(), dz_all.row(b + r).begin());
    std::copy(trip.grad_negative.row(r).begin(), trip.grad_negative.row(r).end(), dz_all.row(b + t + r).begin());
  }

  const Matrix dhi = l2_normalize_rows_backward(inorg.output, dzi);
  const Matrix dho = l2_normalize_rows_backward(org.output, dz_all);
  MlpGradients gi = mlp_backward(model.inorganic_head, inorg.cache, dhi, false);
  MlpGradients go = mlp_backward(model.organic_head, org.cache, dho, false);

  TotalLoss out;
  out.info_nce = nce.loss;
  out.triplet = trip.loss;
  out.loss = nce.loss + trip.loss;
  out.grads = std::move(gi.parameters);
  for (auto& g : go.parameters) out.grads.push_back(std::move(g));
  return out;
}

}  // namespace chemclip
