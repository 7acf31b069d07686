#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ssvep/data.hpp"
#include "ssvep/spectrogram.hpp"

namespace ssvep {

struct WindowConfig {
  std::size_t window_len_samples = 125;    // 0.5 s at 250 Hz
  std::size_t displacement_samples = 125;  // 0.5 s; 25 for the 0.1 s runs

  void validate(std::size_t signal_len) const;
};

enum class WindowFn { rectangular, hann, blackman };

struct StftConfig {
  std::size_t fft_window_len = 125;
  std::size_t hop = 62;
  WindowFn window_fn = WindowFn::rectangular;
  double db_floor_eps = 1e-10;

  void validate() const;
};

struct FrequencyBand {
  double lo_hz = 0.0;
  double hi_hz = 0.0;  // exclusive
};

struct BandSpec {
  std::vector<FrequencyBand> bands;

  // [10,18) u [22,26) u [28,32): keeps 10..16, 22, 24, 28, 30 Hz at 2 Hz spacing.
  static BandSpec ssvep_default();
  void validate() const;
  bool contains(double hz) const;
};

// Subtracts the across-channel mean from every channel at each sample.
// Needs at least two channels; apply it before channel selection.
RawTrial car_filter(const RawTrial& trial);

// Windows start at 0, d, 2d, ... while start + W <= L, so there are
// floor((L - W) / d) + 1 of them.
std::size_t window_count(std::size_t signal_len, const WindowConfig& cfg);
std::vector<WindowSlice> slice_windows(std::span<const float> signal, const WindowConfig& cfg,
                                       const SliceSource& origin = {});

std::vector<double> window_coefficients(WindowFn fn, std::size_t n);

// Centre-padded STFT magnitude (fft_window_len / 2 zeros on each side).
// Rows are rFFT bins 0..fft_window_len/2, columns floor(len / hop) + 1 frames.
Spectrogram stft_magnitude(std::span<const double> samples, double sample_rate_hz,
                           const StftConfig& cfg);

Spectrogram band_select(const Spectrogram& spec, const BandSpec& bands);

// 20*log10(v + eps), then per-image min-max to [0, 1]. Constant images map to 0.
Spectrogram db_normalize(const Spectrogram& spec, double eps = 1e-10);

Spectrogram resize_nearest(const Spectrogram& spec, std::size_t out_rows, std::size_t out_cols);

// Row-major flatten of an 8x3 image into the 24-long SVM feature vector.
std::vector<double> flatten_for_svm(const Spectrogram& spec);

enum class NormalizeStage { before_band_select, after_band_select };

struct PreprocessConfig {
  bool car = true;
  std::string channel = "Oz";
  WindowConfig window;
  StftConfig stft;
  BandSpec bands = BandSpec::ssvep_default();
  NormalizeStage normalize_stage = NormalizeStage::before_band_select;
};

// Full chain for one trial: CAR (optional) -> channel -> slices -> STFT ->
// dB/normalize and band selection. Yields one 8x3 image per window.
std::vector<LabeledImage> trial_to_images(const RawTrial& trial, const PreprocessConfig& cfg,
                                          const LabelMap& labels);

std::vector<LabeledImage> store_to_images(const TrialStore& store, const PreprocessConfig& cfg,
                                          const LabelMap& labels);

// Binary PGM (P5, maxval 255), pixel = round(value * 255) clamped to [0, 255].
void write_pgm(const Spectrogram& spec, const std::filesystem::path& path);

}  // namespace ssvep
