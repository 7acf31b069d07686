#include "ssvep/tensor_io.hpp"

#include "binary_io.hpp"
#include "ssvep/error.hpp"

namespace ssvep {

std::vector<std::uint8_t> encode_params(const ModelParams& params) {
  detail::ByteWriter out;
  out.put_bytes("SSVT");
  out.put(kParamsVersion);
  out.put(static_cast<std::uint32_t>(params.tensors.size()));
  std::vector<float> buf;
  for (const auto& [name, entry] : params.tensors) {
    const auto& t = entry.value;
    if (t.shape.size() > 255) throw DataError("tensor " + name + " has too many dimensions");
    out.put_string16(name);
    out.put(static_cast<std::uint8_t>(entry.frozen ? 1 : 0));
    out.put(static_cast<std::uint8_t>(t.shape.size()));
    for (auto d : t.shape) out.put(static_cast<std::uint32_t>(d));
    buf.assign(t.data.begin(), t.data.end());
    out.put_f32(buf);
  }
  return out.bytes();
}

ModelParams decode_params(std::vector<std::uint8_t> bytes) {
  detail::ByteReader in(std::move(bytes));
  detail::expect_header(in, "SSVT", kParamsVersion);
  const auto count = in.get<std::uint32_t>("tensor count");
  ModelParams params;
  std::vector<float> buf;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto at = in.offset();
    auto name = in.get_string16("tensor name");
    const bool frozen = in.get<std::uint8_t>("frozen flag") != 0;
    const auto ndim = in.get<std::uint8_t>("rank");
    Shape shape;
    std::uint64_t n = 1;
    for (std::uint8_t d = 0; d < ndim; ++d) {
      shape.push_back(in.get<std::uint32_t>("dimension"));
      n *= shape.back();
    }
    if (n * sizeof(float) > in.remaining()) {
      throw FormatError(FormatError::Kind::truncated, in.offset(),
                        "tensor " + name + " needs " + std::to_string(n * sizeof(float)) +
                            " bytes, " + std::to_string(in.remaining()) + " left");
    }
    buf.resize(n);
    in.get_f32(buf, "tensor values");
    if (params.tensors.count(name)) {
      throw FormatError(FormatError::Kind::malformed, at, "duplicate tensor name " + name);
    }
    params.tensors.emplace(std::move(name),
                           ParamEntry{Tensor(shape, std::vector<double>(buf.begin(), buf.end())),
                                      Tensor{}, frozen});
  }
  if (!in.at_end()) {
    throw FormatError(FormatError::Kind::malformed, in.offset(),
                      std::to_string(in.remaining()) + " trailing bytes");
  }
  return params;
}

void save_params(const ModelParams& params, const std::filesystem::path& path) {
  detail::write_file(path, encode_params(params));
}

ModelParams load_params(const std::filesystem::path& path) {
  return decode_params(detail::read_file(path));
}

ModelParams svm_to_params(const SvmModel& model) {
  ModelParams p;
  p.tensors["svm.weight"] = ParamEntry{Tensor({model.w.size()}, model.w), Tensor{}, false};
  p.tensors["svm.bias"] = ParamEntry{Tensor({1}, {model.b}), Tensor{}, false};
  return p;
}

SvmModel svm_from_params(const ModelParams& params) {
  const auto& w = params.at("svm.weight");
  const auto& b = params.at("svm.bias");
  if (w.shape.size() != 1 || b.size() != 1) throw DataError("malformed SVM parameter tensors");
  return SvmModel{w.data, b.data[0]};
}

}  // namespace ssvep
