#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "ssvep/data.hpp"

namespace ssvep {

// Row-major time-frequency image: rows are frequency bins, columns are STFT
// frames. After a nearest-neighbour resize row_freqs_hz repeats source
// frequencies, so it is only strictly increasing before resizing.
struct Spectrogram {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  std::vector<double> row_freqs_hz;
  std::vector<double> col_times_s;
  bool normalized = false;

  Spectrogram() = default;
  Spectrogram(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

  bool operator==(const Spectrogram&) const = default;
};

// One enumerated SpecAugment option: at most one masked time column and at
// most one masked frequency row.
struct MaskVariant {
  std::optional<std::size_t> time_col;
  std::optional<std::size_t> freq_row;

  bool operator==(const MaskVariant&) const = default;
};

struct LabeledImage {
  SliceSource source;
  int label = 0;
  MaskVariant variant;
  Spectrogram image;
};

}  // namespace ssvep
