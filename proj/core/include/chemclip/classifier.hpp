#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "chemclip/matrix.hpp"
#include "chemclip/metrics.hpp"
#include "chemclip/nn.hpp"

namespace chemclip {

struct ClassifierConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 128;
  double lr = 1e-3;
  double weight_decay = 0.01;
  std::size_t patience = 10;  // epochs without validation-AUC improvement
  std::vector<std::size_t> hidden = {128, 64};
  std::uint64_t seed = 0;

  void validate() const;
};

std::string classifier_config_to_json(const ClassifierConfig& config);
ClassifierConfig classifier_config_from_json(const std::string& json);

struct ClassifierModel {
  Mlp mlp;  // embed_dim -> hidden... -> 1 logit
  double threshold = 0.5;  // on sigmoid scores
  double pos_weight = 1.0;
  std::size_t epochs_trained = 0;
  std::size_t best_epoch = 0;
};

// (#inactive) / (#active). Throws Error(kUndefined) without actives.
double pos_weight(std::span<const int> labels);

struct BceResult {
  double loss = 0.0;
  std::vector<double> grad;  // d loss / d logit
};

// Mean of -[w y log s(z) + (1-y) log(1-s(z))], evaluated through softplus so
// large |z| stays finite.
BceResult weighted_bce(std::span<const double> logits, std::span<const int> labels, double pos_weight);

double sigmoid(double z);

// Embeddings are read-only inputs. The decision threshold is chosen on the
// validation scores by best_f1_threshold.
ClassifierModel train_classifier(const Matrix& train_embeddings, std::span<const int> train_labels,
                                 const Matrix& val_embeddings, std::span<const int> val_labels,
                                 const ClassifierConfig& config);

std::vector<double> predict_scores(const ClassifierModel& model, const Matrix& embeddings);

ClassificationReport evaluate_classifier(const ClassifierModel& model, const Matrix& embeddings,
                                         std::span<const int> labels);

void save_classifier(const std::filesystem::path& path, const ClassifierModel& model, const ClassifierConfig& config);
ClassifierModel load_classifier(const std::filesystem::path& path);

}  // namespace chemclip
