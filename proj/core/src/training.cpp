#include "chemclip/training.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "chemclip/checkpoint.hpp"
#include "chemclip/error.hpp"
#include "chemclip/log.hpp"

namespace chemclip {

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::kInvalidArgument, what);
  };
  require(epochs > 0, "epochs must be positive");
  require(batch_size > 0, "batch_size must be positive");
  require(lr > 0.0, "lr must be positive");
  require(weight_decay >= 0.0, "weight_decay must be non-negative");
  require(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0, "betas must lie in (0, 1)");
  require(clip_norm > 0.0, "clip_norm must be positive");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0, 1)");
  require(temperature > 0.0, "temperature must be positive");
  require(triplet_margin >= 0.0, "triplet_margin must be non-negative");
  require(hidden_dim > 0 && embed_dim > 0, "hidden_dim and embed_dim must be positive");
}

std::string train_config_to_json(const TrainConfig& c) {
  nlohmann::json j = {{"epochs", c.epochs},
                      {"batch_size", c.batch_size},
                      {"lr", c.lr},
                      {"weight_decay", c.weight_decay},
                      {"betas", {c.beta1, c.beta2}},
                      {"clip_norm", c.clip_norm},
                      {"dropout", c.dropout},
                      {"temperature", c.temperature},
                      {"triplet_margin", c.triplet_margin},
                      {"pair_prefer_activity", c.pair_prefer_activity},
                      {"hidden_dim", c.hidden_dim},
                      {"embed_dim", c.embed_dim},
                      {"seed", c.seed}};
  return j.dump();
}

TrainConfig train_config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("train config: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kFormatError, "train config must be a JSON object");
  TrainConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "epochs") c.epochs = value.get<std::size_t>();
      else if (key == "batch_size") c.batch_size = value.get<std::size_t>();
      else if (key == "lr") c.lr = value.get<double>();
      else if (key == "weight_decay") c.weight_decay = value.get<double>();
      else if (key == "betas") {
        if (!value.is_array() || value.size() != 2) throw Error(ErrorCode::kFormatError, "betas must be a pair");
        c.beta1 = value[0].get<double>();
        c.beta2 = value[1].get<double>();
      } else if (key == "clip_norm") c.clip_norm = value.get<double>();
      else if (key == "dropout") c.dropout = value.get<double>();
      else if (key == "temperature") c.temperature = value.get<double>();
      else if (key == "triplet_margin") c.triplet_margin = value.get<double>();
      else if (key == "pair_prefer_activity") c.pair_prefer_activity = value.get<bool>();
      else if (key == "hidden_dim") c.hidden_dim = value.get<std::size_t>();
      else if (key == "embed_dim") c.embed_dim = value.get<std::size_t>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else throw Error(ErrorCode::kFormatError, "unknown train config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

FeatureTable build_feature_table(std::span<const ActivityRecord> records, Domain domain) {
  std::map<std::string, const ActivityRecord*> first;
  for (const auto& r : records) {
    if (r.domain != domain) throw Error(ErrorCode::kInvalidArgument, "record " + r.record_id + " has the wrong domain");
    first.emplace(r.compound_id, &r);
  }
  const std::size_t width = domain == Domain::kOrganic ? kFingerprintBits : kInorganicFeatureCount;
  FeatureTable table;
  table.features = Matrix(first.size(), width);
  std::size_t row = 0;
  for (const auto& [id, rec] : first) {
    const FeatureVector fv = domain == Domain::kOrganic
                                 ? featurize_organic(rec->smiles)
                                 : featurize_inorganic(rec->smiles, rec->metal.value_or(""), rec->oxidation_state.value_or(0));
    std::copy(fv.values.begin(), fv.values.end(), table.features.row(row).begin());
    table.row_of.emplace(id, row++);
  }
  return table;
}

TrainingCorpus::TrainingCorpus(std::vector<ActivityRecord> inorganic, std::vector<ActivityRecord> organic)
    : inorganic_(std::move(inorganic)), organic_(std::move(organic)) {
  inorganic_features_ = build_feature_table(inorganic_, Domain::kInorganic);
  organic_features_ = build_feature_table(organic_, Domain::kOrganic);
  for (std::size_t i = 0; i < organic_.size(); ++i) {
    by_line_[organic_[i].cell_line].push_back(i);
    (organic_[i].active ? active_by_line_ : inactive_by_line_)[organic_[i].cell_line].push_back(i);
  }
}

namespace {

std::span<const std::size_t> lookup(const std::map<std::string, std::vector<std::size_t>>& index, const std::string& key) {
  const auto it = index.find(key);
  if (it == index.end()) return {};
  return it->second;
}

}  // namespace

std::span<const std::size_t> TrainingCorpus::organic_in_line(const std::string& cell_line) const {
  return lookup(by_line_, cell_line);
}

std::span<const std::size_t> TrainingCorpus::organic_in_line(const std::string& cell_line, bool active) const {
  return lookup(active ? active_by_line_ : inactive_by_line_, cell_line);
}

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size, SplitMix64& rng) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  shuffle(std::span<std::size_t>(order), rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

PairBatch sample_pair_batch(const TrainingCorpus& corpus, std::span<const std::size_t> inorganic_records,
                            bool prefer_activity, SplitMix64& rng) {
  PairBatch batch;
  for (std::size_t idx : inorganic_records) {
    const ActivityRecord& anchor = corpus.inorganic().at(idx);
    std::span<const std::size_t> pool = corpus.organic_in_line(anchor.cell_line);
    if (pool.empty()) {
      log_warning("EmptyCellLine: no organic record for cell line '" + anchor.cell_line + "'; skipping record " +
                  anchor.record_id);
      continue;
    }
    if (prefer_activity) {
      const auto matched = corpus.organic_in_line(anchor.cell_line, anchor.active);
      if (!matched.empty()) pool = matched;
    }
    batch.inorganic.push_back(idx);
    batch.organic.push_back(pool[rng.below(pool.size())]);
  }
  return batch;
}

TripletSet mine_hard_triplets(const TrainingCorpus& corpus, const PairBatch& batch, SplitMix64& rng) {
  TripletSet set;
  for (std::size_t row = 0; row < batch.inorganic.size(); ++row) {
    const ActivityRecord& anchor = corpus.inorganic()[batch.inorganic[row]];
    if (!anchor.active) continue;
    const auto actives = corpus.organic_in_line(anchor.cell_line, true);
    const auto inactives = corpus.organic_in_line(anchor.cell_line, false);
    if (actives.empty() || inactives.empty()) continue;
    set.anchor_rows.push_back(row);
    set.positives.push_back(actives[rng.below(actives.size())]);
    set.negatives.push_back(inactives[rng.below(inactives.size())]);
  }
  return set;
}

namespace {

Matrix gather_features(const FeatureTable& table, const std::vector<ActivityRecord>& records,
                       std::span<const std::size_t> indices) {
  Matrix out(indices.size(), table.features.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto src = table.row(records[indices[i]].compound_id);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace

LossInputs make_loss_inputs(const TrainingCorpus& corpus, const PairBatch& batch, const TripletSet& triplets) {
  LossInputs in;
  in.inorganic = gather_features(corpus.inorganic_features(), corpus.inorganic(), batch.inorganic);
  in.organic = gather_features(corpus.organic_features(), corpus.organic(), batch.organic);
  in.anchors = triplets.anchor_rows;
  in.positives = gather_features(corpus.organic_features(), corpus.organic(), triplets.positives);
  in.negatives = gather_features(corpus.organic_features(), corpus.organic(), triplets.negatives);
  return in;
}

LossSummary evaluate_loss(const ChemClipModel& model, const TrainingCorpus& corpus, const TrainConfig& config,
                          std::uint64_t seed) {
  SplitMix64 rng(seed);
  LossSummary summary;
  const auto batches = epoch_batches(corpus.inorganic().size(), config.batch_size, rng);
  for (const auto& indices : batches) {
    const PairBatch batch = sample_pair_batch(corpus, indices, config.pair_prefer_activity, rng);
    if (batch.inorganic.empty()) continue;
    const TripletSet triplets = mine_hard_triplets(corpus, batch, rng);
    const TotalLoss loss = total_loss(model, make_loss_inputs(corpus, batch, triplets), config.triplet_margin, false);
    summary.total += loss.loss;
    summary.info_nce += loss.info_nce;
    summary.triplet += loss.triplet;
    ++summary.batches;
  }
  if (summary.batches == 0) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan, nan, 0};
  }
  const double n = static_cast<double>(summary.batches);
  summary.total /= n;
  summary.info_nce /= n;
  summary.triplet /= n;
  return summary;
}

TrainResult train(const TrainConfig& config, const TrainingCorpus& train_corpus, const TrainingCorpus* val_corpus,
                  const TrainOptions& options) {
  config.validate();
  if (train_corpus.inorganic().empty() || train_corpus.organic().empty()) {
    throw Error(ErrorCode::kMissingInput, "training needs both inorganic and organic records");
  }
  SplitMix64 root(config.seed);
  ModelDims dims;
  dims.hidden = config.hidden_dim;
  dims.embed = config.embed_dim;
  ChemClipModel model = make_model(dims, root(), config.dropout, config.temperature);
  SplitMix64 sampler = root.fork(1);
  SplitMix64 dropout_rng = root.fork(2);
  const std::uint64_t eval_seed = root();

  AdamW optimizer(AdamWConfig{config.lr, config.weight_decay, config.beta1, config.beta2, 1e-8});
  if (options.checkpoint_dir) std::filesystem::create_directories(*options.checkpoint_dir);

  TrainResult result;
  result.initial_train_loss = evaluate_loss(model, train_corpus, config, eval_seed).total;
  double best_score = std::numeric_limits<double>::infinity();

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    EpochStats stats;
    stats.epoch = epoch;
    const auto batches = epoch_batches(train_corpus.inorganic().size(), config.batch_size, sampler);
    for (const auto& indices : batches) {
      const PairBatch batch = sample_pair_batch(train_corpus, indices, config.pair_prefer_activity, sampler);
      if (batch.inorganic.empty()) continue;
      const TripletSet triplets = mine_hard_triplets(train_corpus, batch, sampler);
      TotalLoss loss = total_loss(model, make_loss_inputs(train_corpus, batch, triplets), config.triplet_margin,
                                  true, &dropout_rng);
      clip_grad_norm(loss.grads, config.clip_norm);
      const auto params = model.parameters();
      optimizer.step(params, loss.grads);
      stats.train_loss += loss.loss;
      stats.train_info_nce += loss.info_nce;
      stats.train_triplet += loss.triplet;
      stats.triplets += triplets.anchor_rows.size();
      ++stats.batches;
    }
    if (stats.batches > 0) {
      const double n = static_cast<double>(stats.batches);
      stats.train_loss /= n;
      stats.train_info_nce /= n;
      stats.train_triplet /= n;
    }
    if (val_corpus != nullptr) {
      const LossSummary val = evaluate_loss(model, *val_corpus, config, eval_seed);
      stats.val_loss = val.total;
      stats.val_info_nce = val.info_nce;
      stats.val_triplet = val.triplet;
    }
    const double score = std::isnan(stats.val_loss) ? stats.train_loss : stats.val_loss;
    result.history.push_back(stats);

    if (options.checkpoint_dir) save_checkpoint(*options.checkpoint_dir / "last.cclp", model, config, epoch);
    if (score < best_score) {
      best_score = score;
      result.best = model;
      result.best_epoch = epoch;
      if (options.checkpoint_dir) save_checkpoint(*options.checkpoint_dir / "best.cclp", model, config, epoch);
    }
    if (options.verbose) {
      std::ostringstream msg;
      msg << "epoch " << epoch << "/" << config.epochs << " train_loss=" << stats.train_loss
          << " val_loss=" << stats.val_loss << " val_info_nce=" << stats.val_info_nce
          << " val_triplet=" << stats.val_triplet;
      log_info(msg.str());
    }
  }
  if (result.best_epoch == 0) {
    result.best = model;
    result.best_epoch = config.epochs;
  }
  result.last = std::move(model);
  result.final_train_loss = evaluate_loss(result.last, train_corpus, config, eval_seed).total;
  return result;
}

}  // namespace chemclip
