#include "ssvep/augment.hpp"

#include <numeric>
#include <string>

#include "ssvep/error.hpp"

namespace ssvep {

AugmentMode parse_augment_mode(std::string_view text) {
  if (text == "none") return AugmentMode::none;
  if (text == "time" || text == "time_only") return AugmentMode::time_only;
  if (text == "freq" || text == "freq_only") return AugmentMode::freq_only;
  if (text == "full") return AugmentMode::full;
  throw ConfigError("unknown augmentation mode \"" + std::string(text) +
                    "\" (expected none|time|freq|full)");
}

const char* to_string(AugmentMode mode) {
  switch (mode) {
    case AugmentMode::none: return "none";
    case AugmentMode::time_only: return "time";
    case AugmentMode::freq_only: return "freq";
    case AugmentMode::full: return "full";
  }
  return "none";
}

std::vector<MaskVariant> enumerate_variants(std::size_t rows, std::size_t cols, AugmentMode mode) {
  const bool use_time = mode == AugmentMode::time_only || mode == AugmentMode::full;
  const bool use_freq = mode == AugmentMode::freq_only || mode == AugmentMode::full;

  std::vector<std::optional<std::size_t>> time_opts{std::nullopt};
  if (use_time) {
    for (std::size_t c = 0; c < cols; ++c) time_opts.emplace_back(c);
  }
  std::vector<std::optional<std::size_t>> freq_opts{std::nullopt};
  if (use_freq) {
    for (std::size_t r = 0; r < rows; ++r) freq_opts.emplace_back(r);
  }

  std::vector<MaskVariant> out;
  out.reserve(time_opts.size() * freq_opts.size());
  for (const auto& t : time_opts) {
    for (const auto& f : freq_opts) out.push_back(MaskVariant{t, f});
  }
  return out;
}

Spectrogram apply_mask(const Spectrogram& image, const MaskVariant& variant) {
  if (variant.time_col && *variant.time_col >= image.cols) {
    throw DataError("time mask column " + std::to_string(*variant.time_col) +
                    " outside image with " + std::to_string(image.cols) + " columns");
  }
  if (variant.freq_row && *variant.freq_row >= image.rows) {
    throw DataError("frequency mask row " + std::to_string(*variant.freq_row) +
                    " outside image with " + std::to_string(image.rows) + " rows");
  }
  if (!variant.time_col && !variant.freq_row) return image;

  const double mean = std::accumulate(image.values.begin(), image.values.end(), 0.0) /
                      static_cast<double>(image.values.size());
  Spectrogram out = image;
  if (variant.time_col) {
    for (std::size_t r = 0; r < out.rows; ++r) out.at(r, *variant.time_col) = mean;
  }
  if (variant.freq_row) {
    for (std::size_t c = 0; c < out.cols; ++c) out.at(*variant.freq_row, c) = mean;
  }
  return out;
}

std::vector<LabeledImage> expand_dataset(const std::vector<LabeledImage>& images,
                                         AugmentMode mode) {
  if (images.empty()) throw DataError("cannot augment an empty image set");
  std::vector<LabeledImage> out;
  std::vector<MaskVariant> variants;
  std::size_t rows = 0, cols = 0;
  for (const auto& item : images) {
    if (variants.empty() || item.image.rows != rows || item.image.cols != cols) {
      rows = item.image.rows;
      cols = item.image.cols;
      variants = enumerate_variants(rows, cols, mode);
      out.reserve(images.size() * variants.size());
    }
    for (const auto& v : variants) {
      out.push_back(LabeledImage{item.source, item.label, v, apply_mask(item.image, v)});
    }
  }
  return out;
}

}  // namespace ssvep
