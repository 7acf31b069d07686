#pragma once

// Small synthetic datasets shared by the tests.

#include <numeric>

#include "ssvep/harness.hpp"
#include "ssvep/preprocess.hpp"
#include "ssvep/synth.hpp"

namespace ssvep::testing {

inline TrialStore synth_store(int n_subjects, double snr_db, std::uint64_t seed = 0) {
  SynthStoreSpec spec;
  spec.n_subjects = n_subjects;
  spec.base.snr_db = snr_db;
  spec.base.seed = seed;
  return generate_store(spec);
}

// Single-channel stores have nothing to re-reference against.
inline PreprocessConfig synth_preprocess() {
  PreprocessConfig cfg;
  cfg.car = false;
  return cfg;
}

// The first `n` spectrogram images of a synthetic store, resized for `spec`.
inline ImageDataset synth_images(std::size_t n, const NetworkSpec& spec, double snr_db = 0.0,
                                 std::uint64_t seed = 0) {
  const auto store = synth_store(2, snr_db, seed);
  const auto images = store_to_images(store, synth_preprocess(), LabelMap{});
  // Interleave classes: trials 0-5 are 12 Hz, 6-11 are 15 Hz per subject.
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; rows.size() < n && i < 60; ++i) {
    rows.push_back(i);
    rows.push_back(i + 60);
  }
  rows.resize(n);
  return to_image_dataset(images, rows, spec);
}

}  // namespace ssvep::testing
