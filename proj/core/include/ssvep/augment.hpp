#pragma once

#include <string_view>
#include <vector>

#include "ssvep/spectrogram.hpp"

namespace ssvep {

enum class AugmentMode { none, time_only, freq_only, full };

AugmentMode parse_augment_mode(std::string_view text);  // none|time|freq|full
const char* to_string(AugmentMode mode);

// All single-time-mask / single-frequency-mask options, (none, none) first.
// The time index is the outer loop and the frequency index the inner one, so
// an 8x3 image gives 4 x 9 = 36 variants in full mode.
std::vector<MaskVariant> enumerate_variants(std::size_t rows, std::size_t cols, AugmentMode mode);

// Fills the masked column and/or row with the mean of the unmasked input.
Spectrogram apply_mask(const Spectrogram& image, const MaskVariant& variant);

// Every image times every variant, images in input order and variants inner.
std::vector<LabeledImage> expand_dataset(const std::vector<LabeledImage>& images,
                                         AugmentMode mode);

}  // namespace ssvep
