#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "ssvep/error.hpp"
#include "ssvep/fft.hpp"
#include "ssvep/synth.hpp"

using namespace ssvep;

namespace {

std::size_t peak_bin(const RawTrial& t) {
  std::vector<double> x(t.samples.begin(), t.samples.end());
  const auto spec = rfft(x);
  std::size_t best = 1;
  for (std::size_t k = 1; k < spec.size(); ++k) {
    if (std::abs(spec[k]) > std::abs(spec[best])) best = k;
  }
  return best;
}

double variance(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

}  // namespace

TEST(Synth, NoiselessToneAtTheStimulusBin) {
  SynthConfig cfg;
  cfg.stimulus_hz = 12.0;
  cfg.n_harmonics = 1;
  cfg.amplitude_decay = 0.0;
  cfg.snr_db = std::numeric_limits<double>::infinity();
  const auto t = generate_trial(cfg, 1, 0);
  ASSERT_EQ(t.n_samples(), 1250u);
  // 1250 samples at 250 Hz: 0.2 Hz bins, 12 Hz is bin 60.
  std::vector<double> x(t.samples.begin(), t.samples.end());
  const auto dft = oracle::direct_dft(x);
  std::size_t best = 1;
  for (std::size_t k = 1; k <= 625; ++k) {
    if (std::abs(dft[k]) > std::abs(dft[best])) best = k;
  }
  EXPECT_EQ(best, 60u);
  const auto parts = generate_components(cfg, 1, 0);
  EXPECT_TRUE(std::all_of(parts.noise.begin(), parts.noise.end(), [](double v) { return v == 0.0; }));
}

TEST(Synth, DeterministicForEqualSeeds) {
  SynthConfig cfg;
  cfg.seed = 1234;
  EXPECT_EQ(generate_trial(cfg, 3, 2), generate_trial(cfg, 3, 2));
}

TEST(Synth, DistinctNoiseStreamsPerSubjectAndTrial) {
  SynthConfig cfg;
  cfg.seed = 5;
  const auto a = generate_components(cfg, 1, 0).noise;
  const auto b = generate_components(cfg, 1, 1).noise;
  const auto c = generate_components(cfg, 2, 0).noise;
  EXPECT_NE(a, b);
  EXPECT_NE(a, c);
  EXPECT_NE(b, c);
}

TEST(Synth, ZeroDbHasUnitVarianceRatio) {
  SynthConfig cfg;
  cfg.snr_db = 0.0;
  for (std::uint16_t trial = 0; trial < 20; ++trial) {
    const auto parts = generate_components(cfg, 1, trial);
    const double ratio = variance(parts.clean) / variance(parts.noise);
    EXPECT_NEAR(ratio, 1.0, 0.05);
  }
}

TEST(Synth, SpectralPeakAtStimulusAboveTwentyDb) {
  for (double f : {12.0, 15.0}) {
    for (double snr : {20.0, 30.0}) {
      SynthConfig cfg;
      cfg.stimulus_hz = f;
      cfg.snr_db = snr;
      cfg.n_harmonics = 3;
      for (std::uint16_t trial = 0; trial < 10; ++trial) {
        EXPECT_EQ(peak_bin(generate_trial(cfg, 1, trial)),
                  static_cast<std::size_t>(std::lround(f / 0.2)));
      }
    }
  }
}

TEST(Synth, HarmonicAmplitudesDecay) {
  SynthConfig cfg;
  cfg.n_harmonics = 3;
  cfg.amplitude_decay = 1.0;
  cfg.snr_db = std::numeric_limits<double>::infinity();
  const auto parts = generate_components(cfg, 1, 0);
  const auto spec = rfft(parts.clean);
  const double a1 = std::abs(spec[60]), a2 = std::abs(spec[120]), a3 = std::abs(spec[180]);
  EXPECT_NEAR(a2 / a1, 0.5, 1e-9);
  EXPECT_NEAR(a3 / a1, 1.0 / 3.0, 1e-9);
}

TEST(Synth, ConfigErrors) {
  SynthConfig cfg;
  cfg.stimulus_hz = 50.0;
  cfg.n_harmonics = 3;  // 150 Hz >= 125 Hz
  EXPECT_THROW(generate_trial(cfg, 1, 0), ConfigError);
  cfg = SynthConfig{};
  cfg.duration_s = 0.0011;  // 0.275 samples
  EXPECT_THROW(generate_trial(cfg, 1, 0), ConfigError);
  cfg = SynthConfig{};
  cfg.n_harmonics = 0;
  EXPECT_THROW(generate_trial(cfg, 1, 0), ConfigError);
}

TEST(Synth, StoreLayout) {
  SynthStoreSpec spec;
  spec.n_subjects = 3;
  const auto store = generate_store(spec);
  ASSERT_EQ(store.trials.size(), 36u);
  EXPECT_EQ(store.trials[0].subject_id, 1);
  EXPECT_EQ(store.trials[0].stimulus_hz, 12.0f);
  EXPECT_EQ(store.trials[6].stimulus_hz, 15.0f);
  EXPECT_EQ(store.trials[11].trial_index, 11);
  EXPECT_EQ(store.trials[12].subject_id, 2);
  EXPECT_EQ(store.channels, std::vector<std::string>{"Oz"});
}
