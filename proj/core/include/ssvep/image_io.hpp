#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ssvep/spectrogram.hpp"

namespace ssvep {

// SSVI v1 labeled image set, little-endian. All images share one shape.
//
//   "SSVI" | u8 version=1 | u32 count | u16 rows | u16 cols
//   rows x f32 row_freq_hz | cols x f32 col_time_s
//   per image: u16 subject_id | f32 stimulus_hz | u16 trial_index
//              u32 start_sample | u8 label | i16 time_col | i16 freq_row
//              rows*cols f32 values, row-major
//
// Mask indices of -1 mean "no mask". Values are narrowed to f32.
inline constexpr std::uint8_t kImageSetVersion = 1;

void save_images(const std::vector<LabeledImage>& images, const std::filesystem::path& path);
std::vector<LabeledImage> load_images(const std::filesystem::path& path);

}  // namespace ssvep
