#include "ssvep/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "ssvep/error.hpp"

namespace ssvep {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double sample_variance(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size());
}

}  // namespace

std::size_t SynthConfig::n_samples() const {
  return static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
}

void SynthConfig::validate() const {
  if (!(sample_rate_hz > 0.0)) throw ConfigError("sample rate must be positive");
  if (!(stimulus_hz > 0.0)) throw ConfigError("stimulus frequency must be positive");
  if (n_harmonics < 1) throw ConfigError("n_harmonics must be >= 1");
  if (!(amplitude_decay >= 0.0)) throw ConfigError("amplitude decay must be >= 0");
  if (std::isnan(snr_db)) throw ConfigError("snr_db is NaN");
  if (n_harmonics * stimulus_hz >= sample_rate_hz / 2.0) {
    throw ConfigError("highest harmonic " + std::to_string(n_harmonics * stimulus_hz) +
                      " Hz is not below Nyquist " + std::to_string(sample_rate_hz / 2.0) + " Hz");
  }
  const double count = duration_s * sample_rate_hz;
  if (!(count >= 1.0) || std::abs(count - std::round(count)) > 1e-9) {
    throw ConfigError("duration x sample rate must be a positive integer, got " +
                      std::to_string(count));
  }
}

SynthComponents generate_components(const SynthConfig& cfg, std::uint16_t subject_id,
                                    std::uint16_t trial_index) {
  cfg.validate();
  const std::uint64_t stream =
      splitmix64(splitmix64(cfg.seed) ^ (static_cast<std::uint64_t>(subject_id) << 32) ^
                 (static_cast<std::uint64_t>(trial_index) << 8) ^
                 static_cast<std::uint64_t>(std::llround(cfg.stimulus_hz * 1000.0)) << 40);
  std::mt19937_64 rng(stream);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);

  const auto n = cfg.n_samples();
  SynthComponents out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (int k = 1; k <= cfg.n_harmonics; ++k) {
    const double amp = std::pow(static_cast<double>(k), -cfg.amplitude_decay);
    const double phase = phase_dist(rng);
    const double w = 2.0 * std::numbers::pi * k * cfg.stimulus_hz / cfg.sample_rate_hz;
    for (std::size_t i = 0; i < n; ++i) {
      out.clean[i] += amp * std::sin(w * static_cast<double>(i) + phase);
    }
  }
  if (std::isinf(cfg.snr_db) && cfg.snr_db > 0) return out;

  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& x : out.noise) x = gauss(rng);
  // Scale so the realized variance ratio hits snr_db exactly on this trial.
  const double target = sample_variance(out.clean) / std::pow(10.0, cfg.snr_db / 10.0);
  const double raw = sample_variance(out.noise);
  const double scale = raw > 0.0 ? std::sqrt(target / raw) : 0.0;
  for (auto& x : out.noise) x *= scale;
  return out;
}

RawTrial generate_trial(const SynthConfig& cfg, std::uint16_t subject_id,
                        std::uint16_t trial_index) {
  if (subject_id < 1) throw ConfigError("subject id must be >= 1");
  const auto parts = generate_components(cfg, subject_id, trial_index);
  RawTrial t;
  t.subject_id = subject_id;
  t.stimulus_hz = static_cast<float>(cfg.stimulus_hz);
  t.trial_index = trial_index;
  t.sample_rate_hz = static_cast<float>(cfg.sample_rate_hz);
  t.channels = {cfg.channel_name};
  t.samples.resize(parts.clean.size());
  for (std::size_t i = 0; i < parts.clean.size(); ++i) {
    t.samples[i] = static_cast<float>(parts.clean[i] + parts.noise[i]);
  }
  return t;
}

TrialStore generate_store(const SynthStoreSpec& spec) {
  if (spec.n_subjects < 1 || spec.n_subjects > 65535) {
    throw ConfigError("subject count must be in [1, 65535]");
  }
  if (spec.trials_per_frequency < 1) throw ConfigError("trials per frequency must be >= 1");
  if (spec.stimulus_hz.empty()) throw ConfigError("no stimulus frequencies");
  std::vector<RawTrial> trials;
  trials.reserve(static_cast<std::size_t>(spec.n_subjects) * spec.stimulus_hz.size() *
                 static_cast<std::size_t>(spec.trials_per_frequency));
  for (int s = 1; s <= spec.n_subjects; ++s) {
    std::uint16_t index = 0;
    for (double f : spec.stimulus_hz) {
      SynthConfig cfg = spec.base;
      cfg.stimulus_hz = f;
      for (int k = 0; k < spec.trials_per_frequency; ++k) {
        trials.push_back(generate_trial(cfg, static_cast<std::uint16_t>(s), index++));
      }
    }
  }
  return make_store(std::move(trials));
}

}  // namespace ssvep
