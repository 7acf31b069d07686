#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ssvep/convnet.hpp"
#include "ssvep/linsvm.hpp"

namespace ssvep {

// SSVT v1 named-tensor file, little-endian, tensors in name order:
//
//   "SSVT" | u8 version=1 | u32 n_tensors
//   per tensor: u16 name_len | name | u8 frozen | u8 ndim | ndim x u32 dim
//               | prod(dim) x f32 values
//
// Values are narrowed to f32; parameters that are already f32-representable
// (all freshly initialised ones) round-trip bit-exactly. Momentum buffers are
// not stored.
inline constexpr std::uint8_t kParamsVersion = 1;

std::vector<std::uint8_t> encode_params(const ModelParams& params);
ModelParams decode_params(std::vector<std::uint8_t> bytes);

void save_params(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_params(const std::filesystem::path& path);

// The SVM is stored as "svm.weight" [d] and "svm.bias" [1].
ModelParams svm_to_params(const SvmModel& model);
SvmModel svm_from_params(const ModelParams& params);

}  // namespace ssvep
