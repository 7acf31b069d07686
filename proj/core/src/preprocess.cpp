#include "ssvep/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "ssvep/error.hpp"
#include "ssvep/fft.hpp"

namespace ssvep {

void WindowConfig::validate(std::size_t signal_len) const {
  if (window_len_samples == 0) throw ConfigError("window length must be positive");
  if (displacement_samples == 0) throw ConfigError("window displacement must be positive");
  if (displacement_samples > window_len_samples) {
    throw ConfigError("displacement " + std::to_string(displacement_samples) +
                      " exceeds window length " + std::to_string(window_len_samples));
  }
  if (window_len_samples > signal_len) {
    throw DataError("window of " + std::to_string(window_len_samples) +
                    " samples is longer than the signal (" + std::to_string(signal_len) + ")");
  }
}

void StftConfig::validate() const {
  if (fft_window_len == 0) throw ConfigError("STFT window length must be positive");
  if (hop == 0 || hop > fft_window_len) {
    throw ConfigError("STFT hop must be in (0, window length]");
  }
  if (!(db_floor_eps > 0.0)) throw ConfigError("dB floor must be positive");
}

BandSpec BandSpec::ssvep_default() { return BandSpec{{{10.0, 18.0}, {22.0, 26.0}, {28.0, 32.0}}}; }

void BandSpec::validate() const {
  if (bands.empty()) throw ConfigError("band spec is empty");
  for (std::size_t i = 0; i < bands.size(); ++i) {
    if (!(bands[i].lo_hz < bands[i].hi_hz)) throw ConfigError("band with lo >= hi");
    if (i > 0 && bands[i].lo_hz < bands[i - 1].hi_hz) {
      throw ConfigError("bands must be disjoint and ascending");
    }
  }
}

bool BandSpec::contains(double hz) const {
  constexpr double tol = 1e-9;
  return std::any_of(bands.begin(), bands.end(), [&](const FrequencyBand& b) {
    return hz >= b.lo_hz - tol && hz < b.hi_hz - tol;
  });
}

RawTrial car_filter(const RawTrial& trial) {
  trial.validate();
  const auto nc = trial.n_channels();
  if (nc < 2) {
    throw DataError("CAR needs at least two channels; apply it before channel selection");
  }
  const auto ns = trial.n_samples();
  RawTrial out = trial;
  for (std::size_t t = 0; t < ns; ++t) {
    double mean = 0.0;
    for (std::size_t c = 0; c < nc; ++c) mean += trial.samples[c * ns + t];
    mean /= static_cast<double>(nc);
    for (std::size_t c = 0; c < nc; ++c) {
      out.samples[c * ns + t] = static_cast<float>(trial.samples[c * ns + t] - mean);
    }
  }
  return out;
}

std::size_t window_count(std::size_t signal_len, const WindowConfig& cfg) {
  cfg.validate(signal_len);
  return (signal_len - cfg.window_len_samples) / cfg.displacement_samples + 1;
}

std::vector<WindowSlice> slice_windows(std::span<const float> signal, const WindowConfig& cfg,
                                       const SliceSource& origin) {
  const auto count = window_count(signal.size(), cfg);
  std::vector<WindowSlice> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto start = i * cfg.displacement_samples;
    WindowSlice w;
    w.source = origin;
    w.source.start_sample = origin.start_sample + static_cast<std::uint32_t>(start);
    auto part = signal.subspan(start, cfg.window_len_samples);
    w.samples.assign(part.begin(), part.end());
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<double> window_coefficients(WindowFn fn, std::size_t n) {
  std::vector<double> w(n, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(n);
    switch (fn) {
      case WindowFn::rectangular: break;
      case WindowFn::hann: w[i] = 0.5 - 0.5 * std::cos(two_pi * x); break;
      case WindowFn::blackman:
        w[i] = 0.42 - 0.5 * std::cos(two_pi * x) + 0.08 * std::cos(2.0 * two_pi * x);
        break;
    }
  }
  return w;
}

Spectrogram stft_magnitude(std::span<const double> samples, double sample_rate_hz,
                           const StftConfig& cfg) {
  cfg.validate();
  if (samples.empty()) throw DataError("STFT of an empty signal");
  const auto n_fft = cfg.fft_window_len;
  const auto pad = n_fft / 2;
  const auto n_frames = samples.size() / cfg.hop + 1;
  const auto n_bins = n_fft / 2 + 1;
  const auto window = window_coefficients(cfg.window_fn, n_fft);

  Spectrogram out(n_bins, n_frames);
  out.row_freqs_hz.resize(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k) {
    out.row_freqs_hz[k] = static_cast<double>(k) * sample_rate_hz / static_cast<double>(n_fft);
  }
  out.col_times_s.resize(n_frames);

  std::vector<double> frame(n_fft);
  for (std::size_t t = 0; t < n_frames; ++t) {
    out.col_times_s[t] = static_cast<double>(t * cfg.hop) / sample_rate_hz;
    for (std::size_t i = 0; i < n_fft; ++i) {
      // Padded index t*hop + i maps to sample t*hop + i - pad.
      const auto padded = t * cfg.hop + i;
      const bool inside = padded >= pad && padded - pad < samples.size();
      frame[i] = inside ? samples[padded - pad] * window[i] : 0.0;
    }
    const auto bins = rfft(frame);
    for (std::size_t k = 0; k < n_bins; ++k) out.at(k, t) = std::abs(bins[k]);
  }
  return out;
}

Spectrogram band_select(const Spectrogram& spec, const BandSpec& bands) {
  bands.validate();
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < spec.rows; ++r) {
    if (bands.contains(spec.row_freqs_hz.at(r))) keep.push_back(r);
  }
  if (keep.empty()) throw DataError("band selection kept no rows");
  Spectrogram out(keep.size(), spec.cols);
  out.col_times_s = spec.col_times_s;
  out.normalized = spec.normalized;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.row_freqs_hz.push_back(spec.row_freqs_hz[keep[i]]);
    for (std::size_t c = 0; c < spec.cols; ++c) out.at(i, c) = spec.at(keep[i], c);
  }
  return out;
}

Spectrogram db_normalize(const Spectrogram& spec, double eps) {
  Spectrogram out = spec;
  for (auto& v : out.values) v = 20.0 * std::log10(v + eps);
  if (!out.values.empty()) {
    const auto [lo, hi] = std::minmax_element(out.values.begin(), out.values.end());
    const double min = *lo;
    const double span = *hi - *lo;
    for (auto& v : out.values) v = span > 0.0 ? (v - min) / span : 0.0;
  }
  out.normalized = true;
  return out;
}

Spectrogram resize_nearest(const Spectrogram& spec, std::size_t out_rows, std::size_t out_cols) {
  if (spec.rows == 0 || spec.cols == 0) throw DataError("resize of an empty image");
  if (out_rows == 0 || out_cols == 0) throw ConfigError("resize target must be non-empty");
  Spectrogram out(out_rows, out_cols);
  out.normalized = spec.normalized;
  for (std::size_t r = 0; r < out_rows; ++r) {
    const auto sr = r * spec.rows / out_rows;
    if (!spec.row_freqs_hz.empty()) out.row_freqs_hz.push_back(spec.row_freqs_hz[sr]);
    for (std::size_t c = 0; c < out_cols; ++c) {
      out.at(r, c) = spec.at(sr, c * spec.cols / out_cols);
    }
  }
  if (!spec.col_times_s.empty()) {
    for (std::size_t c = 0; c < out_cols; ++c) {
      out.col_times_s.push_back(spec.col_times_s[c * spec.cols / out_cols]);
    }
  }
  return out;
}

std::vector<double> flatten_for_svm(const Spectrogram& spec) {
  if (spec.rows != 8 || spec.cols != 3) {
    throw DataError("SVM features need an 8x3 image, got " + std::to_string(spec.rows) + "x" +
                    std::to_string(spec.cols));
  }
  return spec.values;
}

std::vector<LabeledImage> trial_to_images(const RawTrial& trial, const PreprocessConfig& cfg,
                                          const LabelMap& labels) {
  const RawTrial referenced = cfg.car ? car_filter(trial) : trial;
  const std::string names[] = {cfg.channel};
  const RawTrial mono = select_channels(referenced, names);
  const int label = labels.class_of(trial.stimulus_hz);

  const SliceSource origin{trial.subject_id, trial.stimulus_hz, trial.trial_index, 0};
  auto windows = slice_windows(mono.channel(0), cfg.window, origin);

  std::vector<LabeledImage> out;
  out.reserve(windows.size());
  for (const auto& w : windows) {
    auto spec = stft_magnitude(w.samples, trial.sample_rate_hz, cfg.stft);
    if (cfg.normalize_stage == NormalizeStage::before_band_select) {
      spec = band_select(db_normalize(spec, cfg.stft.db_floor_eps), cfg.bands);
    } else {
      spec = db_normalize(band_select(spec, cfg.bands), cfg.stft.db_floor_eps);
    }
    out.push_back(LabeledImage{w.source, label, MaskVariant{}, std::move(spec)});
  }
  return out;
}

std::vector<LabeledImage> store_to_images(const TrialStore& store, const PreprocessConfig& cfg,
                                          const LabelMap& labels) {
  std::vector<LabeledImage> out;
  for (const auto& t : store.trials) {
    auto images = trial_to_images(t, cfg, labels);
    out.insert(out.end(), std::make_move_iterator(images.begin()),
               std::make_move_iterator(images.end()));
  }
  return out;
}

void write_pgm(const Spectrogram& spec, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << "P5\n" << spec.cols << ' ' << spec.rows << "\n255\n";
  for (double v : spec.values) {
    const double px = std::clamp(std::round(v * 255.0), 0.0, 255.0);
    out.put(static_cast<char>(static_cast<unsigned char>(px)));
  }
  if (!out) throw DataError("short write to " + path.string());
}

}  // namespace ssvep
