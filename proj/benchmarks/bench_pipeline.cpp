#include <benchmark/benchmark.h>

#include <random>

#include "ssvep/augment.hpp"
#include "ssvep/convnet.hpp"
#include "ssvep/fbcca.hpp"
#include "ssvep/fft.hpp"
#include "ssvep/preprocess.hpp"
#include "ssvep/synth.hpp"

using namespace ssvep;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  std::vector<double> x(n);
  for (auto& v : x) v = n01(rng);
  return x;
}

Tensor batch(std::size_t n, const NetworkSpec& spec) {
  Tensor t(Shape{n, spec.in_channels, spec.in_rows, spec.in_cols});
  t.data = noise(t.size(), 3);
  return t;
}

}  // namespace

static void BM_Rfft(benchmark::State& state) {
  const auto x = noise(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(rfft(x));
}
BENCHMARK(BM_Rfft)->Arg(125)->Arg(128)->Arg(1250);

static void BM_StftImage(benchmark::State& state) {
  const auto x = noise(125, 2);
  const auto bands = BandSpec::ssvep_default();
  for (auto _ : state) {
    auto s = db_normalize(stft_magnitude(x, 250.0, StftConfig{}));
    benchmark::DoNotOptimize(band_select(s, bands));
  }
}
BENCHMARK(BM_StftImage);

static void BM_TrialToImages(benchmark::State& state) {
  SynthConfig cfg;
  const auto trial = generate_trial(cfg, 1, 0);
  PreprocessConfig pre;
  pre.car = false;
  pre.window.displacement_samples = static_cast<std::size_t>(state.range(0));
  const LabelMap labels;
  for (auto _ : state) benchmark::DoNotOptimize(trial_to_images(trial, pre, labels));
}
BENCHMARK(BM_TrialToImages)->Arg(125)->Arg(25);

static void BM_FullAugment(benchmark::State& state) {
  std::vector<LabeledImage> images(120);
  for (auto& im : images) {
    im.image = Spectrogram(8, 3);
    im.image.values = noise(24, 4);
  }
  for (auto _ : state) benchmark::DoNotOptimize(expand_dataset(images, AugmentMode::full));
  state.SetItemsProcessed(state.iterations() * 120 * 36);
}
BENCHMARK(BM_FullAugment);

static void BM_FbccaClassify(benchmark::State& state) {
  const auto channels = static_cast<std::size_t>(state.range(0));
  RowMatrix x(channels, 125);
  x.data = noise(x.data.size(), 5);
  const FbccaConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(fbcca_classify(x, cfg));
}
BENCHMARK(BM_FbccaClassify)->Arg(1)->Arg(9);

static void BM_ForwardScaled(benchmark::State& state) {
  const auto spec = NetworkSpec::scaled();
  const auto params = init_params(spec, 1);
  const auto x = batch(static_cast<std::size_t>(state.range(0)), spec);
  for (auto _ : state) benchmark::DoNotOptimize(forward(spec, params, x, false));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForwardScaled)->Arg(1)->Arg(32);

static void BM_TrainStepScaled(benchmark::State& state) {
  const auto spec = NetworkSpec::scaled();
  auto params = init_params(spec, 1);
  const auto x = batch(32, spec);
  std::vector<int> labels(32);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 2);
  std::mt19937_64 rng(2);
  TrainConfig cfg;
  for (auto _ : state) {
    auto fwd = forward(spec, params, x, true, &rng, true);
    const auto loss = softmax_xent(fwd.logits, labels);
    sgd_step(params, backward(spec, params, fwd.cache, loss.grad), cfg);
  }
  state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_TrainStepScaled);

static void BM_ForwardFull(benchmark::State& state) {
  const auto spec = NetworkSpec::full();
  const auto params = init_params(spec, 1);
  const auto x = batch(1, spec);
  for (auto _ : state) benchmark::DoNotOptimize(forward(spec, params, x, false));
}
BENCHMARK(BM_ForwardFull)->Unit(benchmark::kMillisecond)->Iterations(2);

BENCHMARK_MAIN();
