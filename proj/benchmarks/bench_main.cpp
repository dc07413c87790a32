#include <benchmark/benchmark.h>

#include "chemclip/fingerprint.hpp"
#include "chemclip/matrix.hpp"
#include "chemclip/metrics.hpp"
#include "chemclip/model.hpp"
#include "chemclip/projection.hpp"
#include "chemclip/rng.hpp"
#include "chemclip/smiles.hpp"

using namespace chemclip;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Matrix m(r, c);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

Matrix unit_rows(std::size_t r, std::size_t c, std::uint64_t seed) {
  Matrix m = random_matrix(r, c, seed);
  return l2_normalize_rows(m);
}

void BM_ParseAndFingerprint(benchmark::State& state) {
  const char* smiles = "CC(=O)Oc1ccccc1C(=O)OCCN(CC)CC";
  for (auto _ : state) benchmark::DoNotOptimize(morgan_fingerprint(parse_smiles(smiles)));
}
BENCHMARK(BM_ParseAndFingerprint);

void BM_FeaturizeInorganic(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(featurize_inorganic("c1ccc(-c2ccccn2)nc1", "Ru", 2));
}
BENCHMARK(BM_FeaturizeInorganic);

void BM_Matmul(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(128, 2048, 1), b = random_matrix(2048, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * 128 * 2048 * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(512);

void BM_InfoNce(benchmark::State& state) {
  const std::size_t b = static_cast<std::size_t>(state.range(0));
  const Matrix zi = unit_rows(b, 256, 3), zo = unit_rows(b, 256, 4);
  for (auto _ : state) benchmark::DoNotOptimize(info_nce_loss(zi, zo, 0.07));
}
BENCHMARK(BM_InfoNce)->Arg(32)->Arg(128);

void BM_TotalLossStep(benchmark::State& state) {
  const ChemClipModel model = make_model({}, 5, 0.1);
  SplitMix64 rng(6);
  LossInputs in;
  in.inorganic = Matrix(128, kInorganicFeatureCount);
  in.organic = Matrix(128, kFingerprintBits);
  for (double& v : in.inorganic.values()) v = rng.bernoulli(0.03);
  for (double& v : in.organic.values()) v = rng.bernoulli(0.03);
  for (std::size_t i = 0; i < 128; i += 2) in.anchors.push_back(i);
  in.positives = gather_rows(in.organic, in.anchors);
  in.negatives = gather_rows(in.organic, in.anchors);
  for (auto _ : state) benchmark::DoNotOptimize(total_loss(model, in, 0.2, true, &rng));
}
BENCHMARK(BM_TotalLossStep)->Unit(benchmark::kMillisecond);

void BM_Auc(benchmark::State& state) {
  SplitMix64 rng(7);
  std::vector<double> s(10000);
  std::vector<int> y(10000);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = rng.uniform(0, 1);
    y[i] = rng.bernoulli(0.25);
  }
  for (auto _ : state) benchmark::DoNotOptimize(auc_roc(s, y));
}
BENCHMARK(BM_Auc);

void BM_Tsne(benchmark::State& state) {
  const Matrix data = unit_rows(static_cast<std::size_t>(state.range(0)), 256, 8);
  TsneParams params;
  params.iterations = 250;
  for (auto _ : state) benchmark::DoNotOptimize(tsne_2d(data, params));
}
BENCHMARK(BM_Tsne)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
