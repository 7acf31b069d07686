#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "ssvep/data.hpp"

namespace ssvep {

struct SynthConfig {
  double stimulus_hz = 12.0;
  int n_harmonics = 2;
  double amplitude_decay = 1.0;  // harmonic k has amplitude k^-decay
  double snr_db = 0.0;           // +inf disables noise
  double duration_s = 5.0;
  double sample_rate_hz = 250.0;
  std::uint64_t seed = 0;
  std::string channel_name = "Oz";

  // Throws ConfigError on a Nyquist violation, a non-integer sample count,
  // or out-of-range parameters.
  void validate() const;
  std::size_t n_samples() const;
};

// The clean sinusoidal part and the scaled noise part of a synthetic trial,
// kept apart so the realized SNR can be measured.
struct SynthComponents {
  std::vector<double> clean;
  std::vector<double> noise;
};

SynthComponents generate_components(const SynthConfig& cfg, std::uint16_t subject_id,
                                    std::uint16_t trial_index);

// Single-channel trial: clean + noise, rounded to f32. Deterministic in
// (seed, subject_id, trial_index).
RawTrial generate_trial(const SynthConfig& cfg, std::uint16_t subject_id,
                        std::uint16_t trial_index);

struct SynthStoreSpec {
  int n_subjects = 35;
  std::vector<double> stimulus_hz{12.0, 15.0};
  int trials_per_frequency = 6;
  SynthConfig base;  // stimulus_hz is overwritten per trial
};

// Subjects 1..n, each frequency in order, trial_index counting up within a
// subject. With the defaults: 35 x 2 x 6 = 420 trials of 1250 samples.
TrialStore generate_store(const SynthStoreSpec& spec);

}  // namespace ssvep
