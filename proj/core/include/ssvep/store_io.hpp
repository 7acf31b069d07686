#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ssvep/data.hpp"

namespace ssvep {

// SSVB v1 trial container, all fields little-endian:
//
//   "SSVB" | u8 version=1 | f32 sample_rate | u16 n_channels
//   n_channels x (u16 len, UTF-8 name) | u32 n_trials
//   per trial: u16 subject_id | f32 stimulus_hz | u16 trial_index
//              u32 n_samples | n_channels*n_samples f32, channel-major
inline constexpr std::uint8_t kStoreVersion = 1;

std::vector<std::uint8_t> encode_store(const TrialStore& store);
TrialStore decode_store(std::vector<std::uint8_t> bytes);

void save_store(const TrialStore& store, const std::filesystem::path& path);
TrialStore load_store(const std::filesystem::path& path);

}  // namespace ssvep
