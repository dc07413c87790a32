#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "chemclip/classifier.hpp"
#include "chemclip/error.hpp"
#include "chemclip/fingerprint.hpp"
#include "chemclip/rng.hpp"
#include "gradcheck.hpp"
#include "temp_dir.hpp"

using namespace chemclip;

namespace {

struct Dataset {
  Matrix x;
  std::vector<int> y;
};

// Unit-norm points; actives lean along +e0 when `signal`.
Dataset make_dataset(std::size_t n, std::size_t dim, double active_fraction, bool signal, SplitMix64& rng) {
  Dataset d{Matrix(n, dim), std::vector<int>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    d.y[i] = rng.bernoulli(active_fraction) ? 1 : 0;
    for (std::size_t k = 0; k < dim; ++k) d.x(i, k) = 0.3 * rng.normal();
    if (signal) d.x(i, 0) += d.y[i] ? 2.0 : -2.0;
    const double norm = std::sqrt(squared_norm(d.x.row(i)));
    for (double& v : d.x.row(i)) v /= norm;
  }
  return d;
}

ClassifierConfig small_config() {
  ClassifierConfig c;
  c.hidden = {16, 8};
  c.batch_size = 32;
  c.seed = 3;
  return c;
}

std::uint64_t matrix_hash(const Matrix& m) {
  const auto v = m.values();
  return fnv1a64({reinterpret_cast<const std::uint8_t*>(v.data()), v.size() * sizeof(double)});
}

}  // namespace

TEST(PosWeight, CorpusRatios) {
  std::vector<int> inorganic(10491 + 3165, 0);
  std::fill(inorganic.begin(), inorganic.begin() + 3165, 1);
  EXPECT_NEAR(pos_weight(inorganic), 3.315, 1e-3);
  EXPECT_EQ(pos_weight(std::vector<int>{1, 0, 1, 0}), 1.0);
  std::vector<int> organic(394 + 10, 0);
  std::fill(organic.begin(), organic.begin() + 10, 1);
  EXPECT_NEAR(pos_weight(organic), 39.4, 1e-12);
  try {
    pos_weight(std::vector<int>{0, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUndefined);
  }
}

TEST(WeightedBce, ClosedForms) {
  const std::vector<double> z = {0.0};
  const std::vector<int> y = {1};
  EXPECT_NEAR(weighted_bce(z, y, 1.0).loss, std::log(2.0), 1e-15);
  EXPECT_NEAR(weighted_bce(z, y, 2.0).loss, 2.0 * std::log(2.0), 1e-15);
  const std::vector<double> big = {800.0, -800.0};
  const std::vector<int> yb = {0, 1};
  const BceResult r = weighted_bce(big, yb, 3.0);
  EXPECT_TRUE(std::isfinite(r.loss));
  EXPECT_NEAR(r.loss, (800.0 + 3.0 * 800.0) / 2.0, 1e-9);
  EXPECT_EQ(sigmoid(0.0), 0.5);
}

TEST(WeightedBce, GradientMatchesFiniteDifferences) {
  SplitMix64 rng(5);
  Matrix z(1, 12);
  std::vector<int> y(12);
  for (std::size_t i = 0; i < 12; ++i) {
    z(0, i) = rng.uniform(-4, 4);
    y[i] = i % 3 == 0;
  }
  const auto loss = [&] { return weighted_bce(z.values(), y, 2.5).loss; };
  const BceResult r = weighted_bce(z.values(), y, 2.5);
  const Matrix analytic(1, 12, r.grad);
  const auto res = test_support::check_gradients({&z}, {analytic}, loss, 1e-6, 1e-10);
  EXPECT_LT(res.max_rel_error, 1e-6);
}

TEST(WeightedBce, PositiveGradientScalesByWeight) {
  // At z = 0 both samples have |error| = 1/2.
  const std::vector<double> z = {0.0, 0.0};
  const std::vector<int> y = {1, 0};
  const BceResult r = weighted_bce(z, y, 3.315);
  EXPECT_NEAR(std::abs(r.grad[0]) / std::abs(r.grad[1]), 3.315, 1e-12);
}

TEST(TrainClassifier, SeparableEmbeddingsReachPerfectF1) {
  SplitMix64 rng(6);
  const Dataset train = make_dataset(400, 16, 0.3, true, rng), val = make_dataset(100, 16, 0.3, true, rng);
  const ClassifierModel m = train_classifier(train.x, train.y, val.x, val.y, small_config());
  EXPECT_TRUE(std::isfinite(m.threshold));
  EXPECT_EQ(evaluate_classifier(m, val.x, val.y).f1, 1.0);
  EXPECT_LE(m.epochs_trained, 50u);
}

TEST(TrainClassifier, ShuffledLabelsGiveChanceAuc) {
  SplitMix64 rng(7);
  const Dataset train = make_dataset(600, 16, 0.3, false, rng), val = make_dataset(200, 16, 0.3, false, rng),
                test = make_dataset(1000, 16, 0.3, false, rng);
  const ClassifierModel m = train_classifier(train.x, train.y, val.x, val.y, small_config());
  const double auc = evaluate_classifier(m, test.x, test.y).auc;
  EXPECT_GE(auc, 0.4);
  EXPECT_LE(auc, 0.6);
}

TEST(TrainClassifier, FrozenInputsAndDeterminism) {
  SplitMix64 rng(8);
  const Dataset train = make_dataset(200, 8, 0.3, true, rng), val = make_dataset(60, 8, 0.3, true, rng);
  const std::uint64_t before = matrix_hash(train.x) ^ (matrix_hash(val.x) * 31);
  const ClassifierModel a = train_classifier(train.x, train.y, val.x, val.y, small_config());
  EXPECT_EQ(matrix_hash(train.x) ^ (matrix_hash(val.x) * 31), before);
  const ClassifierModel b = train_classifier(train.x, train.y, val.x, val.y, small_config());
  EXPECT_EQ(predict_scores(a, val.x), predict_scores(b, val.x));
  EXPECT_EQ(a.threshold, b.threshold);
  EXPECT_NEAR(a.pos_weight, pos_weight(train.y), 1e-15);
}

TEST(TrainClassifier, RequiresActives) {
  SplitMix64 rng(9);
  Dataset train = make_dataset(50, 4, 0.3, true, rng);
  std::fill(train.y.begin(), train.y.end(), 0);
  EXPECT_THROW(train_classifier(train.x, train.y, train.x, train.y, small_config()), Error);
}

TEST(EvaluateClassifier, DegenerateAllActivePredictor) {
  // Zero weights and a large output bias: every score is ~1.
  ClassifierModel m;
  m.mlp = Mlp({DenseLayer{Matrix(4, 1), Matrix{{10.0}}}}, 0.0);
  m.threshold = 0.5;
  Matrix x(1000, 4, 0.25);
  std::vector<int> y(1000, 0);
  std::fill(y.begin(), y.begin() + 232, 1);
  const ClassificationReport r = evaluate_classifier(m, x, y);
  EXPECT_EQ(r.recall, 1.0);
  EXPECT_NEAR(r.accuracy, 0.232, 2e-3);
  EXPECT_EQ(r.auc, 0.5);

  const std::vector<int> single(1000, 0);
  EXPECT_TRUE(std::isnan(evaluate_classifier(m, x, single).auc));
}

TEST(ClassifierIo, RoundTrip) {
  test_support::TempDir dir;
  SplitMix64 rng(10);
  const Dataset train = make_dataset(100, 8, 0.3, true, rng);
  const ClassifierModel m = train_classifier(train.x, train.y, train.x, train.y, small_config());
  save_classifier(dir / "c.cclp", m, small_config());
  const ClassifierModel back = load_classifier(dir / "c.cclp");
  EXPECT_EQ(back.threshold, m.threshold);
  EXPECT_EQ(back.pos_weight, m.pos_weight);
  EXPECT_EQ(predict_scores(back, train.x), predict_scores(m, train.x));
}

TEST(ClassifierConfigJson, RoundTrip) {
  const ClassifierConfig c = small_config();
  EXPECT_EQ(classifier_config_to_json(classifier_config_from_json(classifier_config_to_json(c))),
            classifier_config_to_json(c));
  EXPECT_THROW(classifier_config_from_json(R"({"hiden": [3]})"), Error);
}
