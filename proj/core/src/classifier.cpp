#include "chemclip/classifier.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "chemclip/checkpoint.hpp"
#include "chemclip/error.hpp"
#include "chemclip/rng.hpp"

namespace chemclip {

void ClassifierConfig::validate() const {
  if (epochs == 0 || batch_size == 0) throw Error(ErrorCode::kInvalidArgument, "classifier epochs and batch_size must be positive");
  if (!(lr > 0.0) || weight_decay < 0.0) throw Error(ErrorCode::kInvalidArgument, "classifier lr/weight_decay out of range");
  for (std::size_t h : hidden) {
    if (h == 0) throw Error(ErrorCode::kInvalidArgument, "hidden widths must be positive");
  }
}

std::string classifier_config_to_json(const ClassifierConfig& c) {
  return nlohmann::json{{"epochs", c.epochs},   {"batch_size", c.batch_size}, {"lr", c.lr},
                        {"weight_decay", c.weight_decay}, {"patience", c.patience},   {"hidden", c.hidden},
                        {"seed", c.seed}}
      .dump();
}

ClassifierConfig classifier_config_from_json(const std::string& text) {
  ClassifierConfig c;
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_object()) throw Error(ErrorCode::kFormatError, "classifier config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (key == "epochs") c.epochs = value.get<std::size_t>();
      else if (key == "batch_size") c.batch_size = value.get<std::size_t>();
      else if (key == "lr") c.lr = value.get<double>();
      else if (key == "weight_decay") c.weight_decay = value.get<double>();
      else if (key == "patience") c.patience = value.get<std::size_t>();
      else if (key == "hidden") c.hidden = value.get<std::vector<std::size_t>>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else throw Error(ErrorCode::kFormatError, "unknown classifier config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("classifier config: ") + e.what());
  }
  c.validate();
  return c;
}

double pos_weight(std::span<const int> labels) {
  std::size_t positives = 0;
  for (int l : labels) positives += l != 0;
  if (positives == 0) throw Error(ErrorCode::kUndefined, "pos_weight needs at least one active sample");
  return static_cast<double>(labels.size() - positives) / static_cast<double>(positives);
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

BceResult weighted_bce(std::span<const double> logits, std::span<const int> labels, double w) {
  if (logits.size() != labels.size()) throw Error(ErrorCode::kDimensionMismatch, "logits and labels differ in length");
  BceResult r;
  r.grad.resize(logits.size());
  if (logits.empty()) return r;
  const double inv = 1.0 / static_cast<double>(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double z = logits[i];
    const double y = labels[i] != 0 ? 1.0 : 0.0;
    // -log s(z) = softplus(-z); -log(1 - s(z)) = softplus(z)
    r.loss += w * y * softplus(-z) + (1.0 - y) * softplus(z);
    const double s = sigmoid(z);
    r.grad[i] = (w * y * (s - 1.0) + (1.0 - y) * s) * inv;
  }
  r.loss *= inv;
  return r;
}

std::vector<double> predict_scores(const ClassifierModel& model, const Matrix& embeddings) {
  const Matrix logits = mlp_predict(model.mlp, embeddings);
  std::vector<double> scores(logits.rows());
  for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = sigmoid(logits(i, 0));
  return scores;
}

ClassifierModel train_classifier(const Matrix& train_x, std::span<const int> train_y, const Matrix& val_x,
                                 std::span<const int> val_y, const ClassifierConfig& config) {
  config.validate();
  if (train_x.rows() != train_y.size() || val_x.rows() != val_y.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "embedding rows and labels differ");
  }
  if (train_x.rows() == 0) throw Error(ErrorCode::kMissingInput, "no classifier training samples");

  SplitMix64 root(config.seed);
  std::vector<std::size_t> dims = {train_x.cols()};
  dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
  dims.push_back(1);

  ClassifierModel model;
  model.pos_weight = pos_weight(train_y);
  model.mlp = init_mlp(dims, root(), 0.0);
  SplitMix64 sampler = root.fork(1);
  AdamW optimizer(AdamWConfig{config.lr, config.weight_decay, 0.9, 0.999, 1e-8});

  bool val_defined = val_x.rows() > 0;
  if (val_defined) {
    std::size_t pos = 0;
    for (int l : val_y) pos += l != 0;
    val_defined = pos > 0 && pos < val_y.size();
  }

  Mlp best_mlp = model.mlp;
  double best_auc = -1.0;
  std::size_t since_best = 0;
  std::vector<std::size_t> order(train_x.rows());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle(std::span<std::size_t>(order), sampler);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const Matrix xb = gather_rows(train_x, idx);
      std::vector<int> yb(idx.size());
      for (std::size_t k = 0; k < idx.size(); ++k) yb[k] = train_y[idx[k]];
      const MlpForward fwd = mlp_forward(model.mlp, xb, true);
      const BceResult bce = weighted_bce(fwd.output.values(), yb, model.pos_weight);
      const Matrix upstream(bce.grad.size(), 1, bce.grad);
      const MlpGradients grads = mlp_backward(model.mlp, fwd.cache, upstream, false);
      const auto params = model.mlp.parameters();
      optimizer.step(params, grads.parameters);
    }
    model.epochs_trained = epoch;
    if (!val_defined) continue;
    const double auc = auc_roc(predict_scores(model, val_x), val_y);
    if (auc > best_auc) {
      best_auc = auc;
      best_mlp = model.mlp;
      model.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  if (val_defined) {
    model.mlp = std::move(best_mlp);
  } else {
    model.best_epoch = model.epochs_trained;
  }

  if (val_x.rows() > 0) {
    model.threshold = best_f1_threshold(predict_scores(model, val_x), val_y);
  }
  return model;
}

ClassificationReport evaluate_classifier(const ClassifierModel& model, const Matrix& embeddings,
                                         std::span<const int> labels) {
  return classification_metrics(predict_scores(model, embeddings), labels, model.threshold);
}

void save_classifier(const std::filesystem::path& path, const ClassifierModel& model, const ClassifierConfig& config) {
  Container c;
  c.tensors = mlp_tensors(model.mlp, "classifier");
  c.json = nlohmann::json{{"kind", "chemclip-classifier"},
                          {"threshold", model.threshold},
                          {"pos_weight", model.pos_weight},
                          {"epochs_trained", model.epochs_trained},
                          {"best_epoch", model.best_epoch},
                          {"config", nlohmann::json::parse(classifier_config_to_json(config))}}
               .dump();
  write_container(path, c);
}

ClassifierModel load_classifier(const std::filesystem::path& path) {
  const Container c = read_container(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(c.json);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("classifier trailer: ") + e.what());
  }
  if (!j.is_object() || j.value("kind", "") != "chemclip-classifier") {
    throw Error(ErrorCode::kFormatError, "not a classifier container");
  }
  ClassifierModel m;
  m.mlp = mlp_from_tensors(c.tensors, "classifier", 0.0);
  m.threshold = j.value("threshold", 0.5);
  m.pos_weight = j.value("pos_weight", 1.0);
  m.epochs_trained = j.value("epochs_trained", std::size_t{0});
  m.best_epoch = j.value("best_epoch", std::size_t{0});
  return m;
}

}  // namespace chemclip
