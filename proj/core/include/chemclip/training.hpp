#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chemclip/dataset.hpp"
#include "chemclip/model.hpp"

namespace chemclip {

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 128;
  double lr = 1e-3;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double clip_norm = 1.0;
  double dropout = 0.1;
  double temperature = 0.07;
  double triplet_margin = 0.2;
  bool pair_prefer_activity = true;
  std::size_t hidden_dim = 512;
  std::size_t embed_dim = 256;
  std::uint64_t seed = 0;

  void validate() const;  // throws Error(kInvalidArgument)
};

// JSON object with every field; from_json rejects unknown keys and fills
// missing ones with defaults.
std::string train_config_to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const std::string& json);

// Dense feature rows, one per unique compound (sorted by compound id).
struct FeatureTable {
  std::map<std::string, std::size_t> row_of;
  Matrix features;

  std::span<const double> row(const std::string& compound_id) const { return features.row(row_of.at(compound_id)); }
};

FeatureTable build_feature_table(std::span<const ActivityRecord> records, Domain domain);

// Training-side view of the two record lists with per-cell-line indices used
// for pairing and triplet mining.
class TrainingCorpus {
 public:
  TrainingCorpus(std::vector<ActivityRecord> inorganic, std::vector<ActivityRecord> organic);

  const std::vector<ActivityRecord>& inorganic() const { return inorganic_; }
  const std::vector<ActivityRecord>& organic() const { return organic_; }
  const FeatureTable& inorganic_features() const { return inorganic_features_; }
  const FeatureTable& organic_features() const { return organic_features_; }

  // Organic record indices for a cell line; `active` filters by label.
  std::span<const std::size_t> organic_in_line(const std::string& cell_line) const;
  std::span<const std::size_t> organic_in_line(const std::string& cell_line, bool active) const;

 private:
  std::vector<ActivityRecord> inorganic_;
  std::vector<ActivityRecord> organic_;
  FeatureTable inorganic_features_;
  FeatureTable organic_features_;
  std::map<std::string, std::vector<std::size_t>> by_line_;
  std::map<std::string, std::vector<std::size_t>> active_by_line_;
  std::map<std::string, std::vector<std::size_t>> inactive_by_line_;
};

// One shuffled pass over [0, n) cut into batches of batch_size (last batch
// may be short).
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size, SplitMix64& rng);

struct PairBatch {
  std::vector<std::size_t> inorganic;  // corpus inorganic record indices
  std::vector<std::size_t> organic;    // partner for each row, same cell line
};

// Draws one same-cell-line organic partner per inorganic record. With
// prefer_activity, partners sharing the anchor's label are preferred when the
// cell line has any. Records whose cell line has no organic record are
// skipped with a warning.
PairBatch sample_pair_batch(const TrainingCorpus& corpus, std::span<const std::size_t> inorganic_records,
                            bool prefer_activity, SplitMix64& rng);

struct TripletSet {
  std::vector<std::size_t> anchor_rows;  // row positions inside the PairBatch
  std::vector<std::size_t> positives;    // organic record indices, active, same cell line
  std::vector<std::size_t> negatives;    // organic record indices, inactive, same cell line
};

// One triplet per active inorganic anchor whose cell line offers both an
// active and an inactive organic record.
TripletSet mine_hard_triplets(const TrainingCorpus& corpus, const PairBatch& batch, SplitMix64& rng);

LossInputs make_loss_inputs(const TrainingCorpus& corpus, const PairBatch& batch, const TripletSet& triplets);

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_info_nce = 0.0;
  double train_triplet = 0.0;
  // Validation losses are NaN when no validation pairs exist.
  double val_loss = std::numeric_limits<double>::quiet_NaN();
  double val_info_nce = std::numeric_limits<double>::quiet_NaN();
  double val_triplet = std::numeric_limits<double>::quiet_NaN();
  std::size_t batches = 0;
  std::size_t triplets = 0;
};

struct TrainOptions {
  std::optional<std::filesystem::path> checkpoint_dir;  // last.cclp each epoch, best.cclp on improvement
  bool verbose = false;
};

struct TrainResult {
  ChemClipModel best;
  ChemClipModel last;
  std::size_t best_epoch = 0;
  double initial_train_loss = 0.0;  // eval-mode total loss before the first update
  double final_train_loss = 0.0;    // same measurement for the last model
  std::vector<EpochStats> history;
};

struct LossSummary {
  double total = 0.0;
  double info_nce = 0.0;
  double triplet = 0.0;
  std::size_t batches = 0;
};

// Eval-mode losses averaged over batches, with pairs and triplets drawn from
// a generator seeded by `seed` so repeated calls see identical batches.
// Returns NaN fields when no inorganic record can be paired.
LossSummary evaluate_loss(const ChemClipModel& model, const TrainingCorpus& corpus, const TrainConfig& config,
                          std::uint64_t seed);

TrainResult train(const TrainConfig& config, const TrainingCorpus& train_corpus,
                  const TrainingCorpus* val_corpus = nullptr, const TrainOptions& options = {});

}  // namespace chemclip
