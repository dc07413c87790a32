#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "chemclip/checkpoint.hpp"
#include "chemclip/embeddings.hpp"
#include "chemclip/error.hpp"
#include "chemclip/training.hpp"
#include "records.hpp"
#include "temp_dir.hpp"

using namespace chemclip;
using chemclip::test_support::inorganic_record;
using chemclip::test_support::organic_record;
using chemclip::test_support::slurp;
using chemclip::test_support::TempDir;

namespace {

const char* const kActiveSmiles[] = {"CCN(=O)=O", "CCCN(=O)=O", "c1ccccc1N(=O)=O", "CC(C)N(=O)=O",
                                     "C1CCCCC1N(=O)=O", "CCCCN(=O)=O", "c1ccc(C)cc1N(=O)=O", "CC(C)(C)N(=O)=O"};
const char* const kInactiveSmiles[] = {"CCO", "CCCO", "c1ccccc1O", "CC(C)O", "C1CCCCC1O", "CCCCO", "c1ccc(C)cc1O",
                                       "CC(C)(C)O"};

// 64 records: 16 inorganic compounds and 48 organic records over two lines,
// with the nitro group marking activity on both sides.
TrainingCorpus small_corpus() {
  std::vector<ActivityRecord> inorganic, organic;
  const char* lines[] = {"A549", "MCF7"};
  for (int i = 0; i < 16; ++i) {
    const bool active = i % 2 == 0;
    const char* smiles = active ? kActiveSmiles[i / 2] : kInactiveSmiles[i / 2];
    inorganic.push_back(inorganic_record("I" + std::to_string(i), smiles, i % 4 < 2 ? "Ru" : "Pt", 2, lines[i % 4 / 2],
                                         active));
  }
  for (int i = 0; i < 24; ++i) {
    const bool active = i % 2 == 0;
    const char* smiles = active ? kActiveSmiles[i / 2 % 8] : kInactiveSmiles[i / 2 % 8];
    for (const char* line : lines)
      organic.push_back(organic_record("O" + std::to_string(i), std::string(smiles) + std::string(i / 16, 'C'), line,
                                       active));
  }
  return TrainingCorpus(std::move(inorganic), std::move(organic));
}

TrainConfig small_config() {
  TrainConfig c;
  c.epochs = 2;
  c.batch_size = 8;
  c.hidden_dim = 32;
  c.embed_dim = 16;
  c.seed = 11;
  return c;
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

}  // namespace

TEST(EpochBatches, CoverEveryIndexOnce) {
  SplitMix64 rng(1);
  const auto batches = epoch_batches(21, 8, rng);
  ASSERT_EQ(batches.size(), 3u);
  EXPECT_EQ(batches.back().size(), 5u);
  std::multiset<std::size_t> seen;
  for (const auto& b : batches) seen.insert(b.begin(), b.end());
  EXPECT_EQ(seen.size(), 21u);
  for (std::size_t i = 0; i < 21; ++i) EXPECT_EQ(seen.count(i), 1u);
}

TEST(SamplePairs, SingleCandidateIsAlwaysChosen) {
  const TrainingCorpus corpus({inorganic_record("I", "CCO", "Pt", 2, "A549", true)},
                              {organic_record("O", "CCN", "A549", false)});
  SplitMix64 rng(2);
  const std::size_t rows[] = {0};
  for (int i = 0; i < 20; ++i) {
    const PairBatch b = sample_pair_batch(corpus, rows, true, rng);
    ASSERT_EQ(b.organic.size(), 1u);
    EXPECT_EQ(b.organic[0], 0u);
  }
}

TEST(SamplePairs, PreferActivityMatchedPartners) {
  const TrainingCorpus corpus = small_corpus();
  SplitMix64 rng(3);
  const auto rows = all_rows(corpus.inorganic().size());
  for (int draw = 0; draw < 1000 / 16 + 1; ++draw) {
    const PairBatch b = sample_pair_batch(corpus, rows, true, rng);
    ASSERT_EQ(b.inorganic.size(), rows.size());
    for (std::size_t i = 0; i < b.inorganic.size(); ++i) {
      const auto& a = corpus.inorganic()[b.inorganic[i]];
      const auto& o = corpus.organic()[b.organic[i]];
      EXPECT_EQ(a.cell_line, o.cell_line);
      EXPECT_EQ(a.active, o.active);
    }
  }
}

TEST(SamplePairs, LiteralReadingMixesLabels) {
  const TrainingCorpus corpus = small_corpus();
  SplitMix64 rng(4);
  const auto rows = all_rows(corpus.inorganic().size());
  std::size_t mismatched = 0;
  for (int draw = 0; draw < 50; ++draw) {
    const PairBatch b = sample_pair_batch(corpus, rows, false, rng);
    for (std::size_t i = 0; i < b.inorganic.size(); ++i)
      mismatched += corpus.inorganic()[b.inorganic[i]].active != corpus.organic()[b.organic[i]].active;
  }
  EXPECT_GT(mismatched, 0u);
}

TEST(SamplePairs, FallsBackAndSkips) {
  const TrainingCorpus corpus({inorganic_record("I1", "CCO", "Pt", 2, "A549", true),
                               inorganic_record("I2", "CCO", "Pt", 2, "HELA", true)},
                              {organic_record("O", "CCN", "A549", false)});
  SplitMix64 rng(5);
  const std::size_t rows[] = {0, 1};
  const PairBatch b = sample_pair_batch(corpus, rows, true, rng);
  ASSERT_EQ(b.inorganic.size(), 1u);
  EXPECT_EQ(b.inorganic[0], 0u);
  EXPECT_EQ(b.organic[0], 0u);  // the only same-line record, although inactive
}

TEST(MineTriplets, LabelAudit) {
  const TrainingCorpus corpus = small_corpus();
  SplitMix64 rng(6);
  const auto rows = all_rows(corpus.inorganic().size());
  std::size_t audited = 0;
  while (audited < 1000) {
    const PairBatch b = sample_pair_batch(corpus, rows, true, rng);
    const TripletSet t = mine_hard_triplets(corpus, b, rng);
    ASSERT_EQ(t.anchor_rows.size(), 8u);  // every active anchor is eligible
    for (std::size_t k = 0; k < t.anchor_rows.size(); ++k, ++audited) {
      const auto& a = corpus.inorganic()[b.inorganic[t.anchor_rows[k]]];
      const auto& p = corpus.organic()[t.positives[k]];
      const auto& n = corpus.organic()[t.negatives[k]];
      EXPECT_TRUE(a.active);
      EXPECT_TRUE(p.active);
      EXPECT_FALSE(n.active);
      EXPECT_EQ(a.cell_line, p.cell_line);
      EXPECT_EQ(a.cell_line, n.cell_line);
    }
  }
}

TEST(MineTriplets, IneligibleAnchorsContributeNothing) {
  SplitMix64 rng(7);
  const TrainingCorpus no_active({inorganic_record("I", "CCO", "Pt", 2, "A549", false)},
                                 {organic_record("O1", "CCN", "A549", true), organic_record("O2", "CC", "A549", false)});
  const std::size_t row[] = {0};
  EXPECT_TRUE(mine_hard_triplets(no_active, sample_pair_batch(no_active, row, true, rng), rng).anchor_rows.empty());

  const TrainingCorpus no_inactive({inorganic_record("I", "CCO", "Pt", 2, "A549", true)},
                                   {organic_record("O1", "CCN", "A549", true)});
  EXPECT_TRUE(mine_hard_triplets(no_inactive, sample_pair_batch(no_inactive, row, true, rng), rng).anchor_rows.empty());
}

TEST(TotalLoss, WithoutTripletsEqualsInfoNce) {
  const TrainingCorpus corpus = small_corpus();
  const ChemClipModel model = make_model({kInorganicFeatureCount, kFingerprintBits, 16, 8}, 1, 0.0);
  SplitMix64 rng(8);
  const auto rows = all_rows(8);
  const PairBatch b = sample_pair_batch(corpus, rows, true, rng);
  const LossInputs in = make_loss_inputs(corpus, b, TripletSet{});
  const TotalLoss l = total_loss(model, in, 0.2, false);
  EXPECT_EQ(l.triplet, 0.0);
  EXPECT_EQ(l.loss, l.info_nce);
  const auto nce = info_nce_loss(embed_inorganic(model, in.inorganic), embed_organic(model, in.organic), 0.07);
  EXPECT_NEAR(l.info_nce, nce.loss, 1e-12);
}

TEST(TotalLoss, DuplicatedTripletsLeaveMeanUnchanged) {
  const TrainingCorpus corpus = small_corpus();
  const ChemClipModel model = make_model({kInorganicFeatureCount, kFingerprintBits, 16, 8}, 2, 0.0);
  SplitMix64 rng(9);
  const auto rows = all_rows(8);
  const PairBatch b = sample_pair_batch(corpus, rows, true, rng);
  TripletSet t = mine_hard_triplets(corpus, b, rng);
  ASSERT_FALSE(t.anchor_rows.empty());
  const double once = total_loss(model, make_loss_inputs(corpus, b, t), 0.2, false).triplet;
  TripletSet twice = t;
  twice.anchor_rows.insert(twice.anchor_rows.end(), t.anchor_rows.begin(), t.anchor_rows.end());
  twice.positives.insert(twice.positives.end(), t.positives.begin(), t.positives.end());
  twice.negatives.insert(twice.negatives.end(), t.negatives.begin(), t.negatives.end());
  EXPECT_NEAR(total_loss(model, make_loss_inputs(corpus, b, twice), 0.2, false).triplet, once, 1e-15);
}

TEST(Train, SmokeRunHasFiniteLosses) {
  const TrainingCorpus corpus = small_corpus();
  const TrainResult r = train(small_config(), corpus, &corpus);
  ASSERT_EQ(r.history.size(), 2u);
  for (const EpochStats& s : r.history) {
    EXPECT_TRUE(std::isfinite(s.train_loss));
    EXPECT_TRUE(std::isfinite(s.val_loss));
    EXPECT_TRUE(std::isfinite(s.val_info_nce));
    EXPECT_GT(s.batches, 0u);
  }
  EXPECT_GE(r.best_epoch, 1u);
  EXPECT_LE(r.best_epoch, 2u);
}

TEST(Train, PlantedSignalReducesLoss) {
  const TrainingCorpus corpus = small_corpus();
  TrainConfig c = small_config();
  c.epochs = 15;
  const TrainResult r = train(c, corpus);
  EXPECT_LT(r.final_train_loss, r.initial_train_loss);

  // Held-in check of the activity geometry: active inorganic records sit
  // closer to active than to inactive organic records.
  const EmbeddingTable inorg = embed_records(r.last, corpus.inorganic());
  const EmbeddingTable org = embed_records(r.last, corpus.organic());
  double same = 0, cross = 0;
  std::size_t n_same = 0, n_cross = 0;
  for (std::size_t i = 0; i < inorg.meta.size(); ++i) {
    if (!inorg.meta[i].active) continue;
    for (std::size_t j = 0; j < org.meta.size(); ++j) {
      const double s = dot(inorg.values.row(i), org.values.row(j));
      if (org.meta[j].active) same += s, ++n_same;
      else cross += s, ++n_cross;
    }
  }
  EXPECT_GT(same / n_same, cross / n_cross);
}

TEST(Train, SameSeedGivesByteIdenticalCheckpoints) {
  const TrainingCorpus corpus = small_corpus();
  TempDir a, b;
  train(small_config(), corpus, &corpus, TrainOptions{a.path(), false});
  train(small_config(), corpus, &corpus, TrainOptions{b.path(), false});
  EXPECT_EQ(slurp(a / "best.cclp"), slurp(b / "best.cclp"));
  EXPECT_EQ(slurp(a / "last.cclp"), slurp(b / "last.cclp"));
  EXPECT_FALSE(slurp(a / "best.cclp").empty());
}

TEST(TrainConfigJson, RoundTripAndRejection) {
  TrainConfig c = small_config();
  c.pair_prefer_activity = false;
  c.temperature = 0.05;
  const TrainConfig back = train_config_from_json(train_config_to_json(c));
  EXPECT_EQ(train_config_to_json(back), train_config_to_json(c));
  EXPECT_EQ(train_config_from_json("{}").epochs, 100u);
  EXPECT_THROW(train_config_from_json(R"({"epochz": 3})"), Error);
  TrainConfig bad;
  bad.temperature = 0.0;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(Checkpoint, SaveLoadSaveIsByteIdentical) {
  TempDir dir;
  const ChemClipModel model = make_model({kInorganicFeatureCount, kFingerprintBits, 16, 8}, 5, 0.1);
  save_checkpoint(dir / "a.cclp", model, small_config(), 3);
  const Checkpoint ck = load_checkpoint(dir / "a.cclp");
  EXPECT_EQ(ck.epoch, 3u);
  EXPECT_EQ(ck.model.embed_dim(), 8u);
  save_checkpoint(dir / "b.cclp", ck.model, ck.config, ck.epoch);
  EXPECT_EQ(slurp(dir / "a.cclp"), slurp(dir / "b.cclp"));
}

TEST(Checkpoint, CorruptionIsDetected) {
  Container c;
  c.tensors.push_back({"w", Matrix{{1, 2}}});
  c.json = "{}";
  std::vector<std::uint8_t> bytes = encode_container(c);
  EXPECT_EQ(decode_container(bytes).tensors[0].value, (Matrix{{1, 2}}));

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  try {
    decode_container(bad_magic);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFormatError);
  }

  auto version = bytes;
  version[4] = 99;
  try {
    decode_container(version);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnsupportedVersion);
  }

  for (std::size_t cut : {3u, 10u, 20u}) {
    const std::vector<std::uint8_t> truncated(bytes.begin(), bytes.begin() + cut);
    EXPECT_THROW(decode_container(truncated), Error);
  }
}

TEST(Embed, UnitNormAndShared) {
  const TrainingCorpus corpus = small_corpus();
  const ChemClipModel model = make_model({kInorganicFeatureCount, kFingerprintBits, 16, 8}, 6, 0.1);
  std::vector<ActivityRecord> mixed = {corpus.inorganic()[0], corpus.organic()[0], corpus.organic()[0]};
  const EmbeddingTable t = embed_records(model, mixed);
  ASSERT_EQ(t.values.rows(), 3u);
  EXPECT_EQ(t.width(), 8u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(std::sqrt(squared_norm(t.values.row(i))), 1.0, 1e-9);
  EXPECT_TRUE(std::equal(t.values.row(1).begin(), t.values.row(1).end(), t.values.row(2).begin()));
  EXPECT_EQ(t.meta[0].domain, Domain::kInorganic);
}

TEST(Embed, CsvRoundTrip) {
  TempDir dir;
  const TrainingCorpus corpus = small_corpus();
  const ChemClipModel model = make_model({kInorganicFeatureCount, kFingerprintBits, 16, 8}, 7, 0.1);
  const EmbeddingTable t = embed_records(model, corpus.organic());
  write_embeddings_csv(dir / "e.csv", t);
  const EmbeddingTable back = import_external_embeddings(dir / "e.csv");
  ASSERT_EQ(back.meta.size(), t.meta.size());
  EXPECT_EQ(back.meta[5].record_id, t.meta[5].record_id);
  EXPECT_EQ(back.meta[5].active, t.meta[5].active);
  for (std::size_t i = 0; i < t.values.size(); ++i) EXPECT_NEAR(back.values.values()[i], t.values.values()[i], 1e-12);
}

TEST(ImportEmbeddings, ArbitraryWidthAndRenormalisation) {
  TempDir dir;
  std::string csv = "record_id,compound_id,cell_line,domain,active";
  for (int k = 0; k < 128; ++k) csv += ",e" + std::to_string(k);
  csv += "\n";
  for (int r = 0; r < 3; ++r) {
    csv += "r" + std::to_string(r) + ",c" + std::to_string(r) + ",A549," + (r ? "organic" : "inorganic") + ",1";
    for (int k = 0; k < 128; ++k) csv += k == r ? ",2" : ",0";
    csv += "\n";
  }
  const auto t = import_external_embeddings(dir.write("ext.csv", csv));
  EXPECT_EQ(t.width(), 128u);
  EXPECT_EQ(t.values(1, 1), 1.0);
  EXPECT_EQ(t.meta[0].domain, Domain::kInorganic);
}

TEST(ImportEmbeddings, NonNumericCellReportsLine) {
  TempDir dir;
  const auto path = dir.write("bad.csv",
                              "record_id,compound_id,cell_line,domain,active,e0,e1\n"
                              "r0,c0,A549,organic,0,1,0\n"
                              "r1,c1,A549,organic,0,abc,0\n");
  try {
    import_external_embeddings(path);
    FAIL();
  } catch (const RowError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedRow);
    EXPECT_EQ(e.line(), 3u);
  }
}
