#include "binary_io.hpp"

#include <fstream>
#include <iterator>
#include <limits>

namespace ssvep::detail {

void ByteWriter::put_string16(std::string_view s) {
  if (s.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw DataError("string too long for u16 length prefix: " + std::string(s.substr(0, 32)));
  }
  put(static_cast<std::uint16_t>(s.size()));
  put_bytes(s);
}

void ByteWriter::put_f32(std::span<const float> values) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(values.data());
  bytes_.insert(bytes_.end(), p, p + values.size_bytes());
}

void ByteReader::require(std::size_t n, const char* what) const {
  if (bytes_.size() - pos_ < n) {
    throw FormatError(FormatError::Kind::truncated, pos_,
                      std::string("need ") + std::to_string(n) + " bytes for " + what + ", " +
                          std::to_string(bytes_.size() - pos_) + " left");
  }
}

std::string ByteReader::get_bytes(std::size_t n, const char* what) {
  require(n, what);
  std::string out(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
  pos_ += n;
  return out;
}

std::string ByteReader::get_string16(const char* what) {
  const auto n = get<std::uint16_t>(what);
  return get_bytes(n, what);
}

void ByteReader::get_f32(std::span<float> out, const char* what) {
  require(out.size_bytes(), what);
  std::memcpy(out.data(), bytes_.data() + pos_, out.size_bytes());
  pos_ += out.size_bytes();
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError(FormatError::Kind::io, 0, "cannot open " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw FormatError(FormatError::Kind::io, 0, "cannot open " + path.string() + " for writing");
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw FormatError(FormatError::Kind::io, bytes.size(), "short write to " + path.string());
  }
}

void expect_header(ByteReader& in, std::string_view magic, std::uint8_t version) {
  if (in.remaining() < magic.size()) {
    throw FormatError(FormatError::Kind::bad_magic, 0,
                      "file shorter than the " + std::string(magic) + " magic");
  }
  const auto got = in.get_bytes(magic.size(), "magic");
  if (got != magic) {
    throw FormatError(FormatError::Kind::bad_magic, 0, "expected \"" + std::string(magic) + "\"");
  }
  const auto at = in.offset();
  const auto v = in.get<std::uint8_t>("version");
  if (v != version) {
    throw FormatError(FormatError::Kind::version_mismatch, at,
                      "expected " + std::to_string(version) + ", found " + std::to_string(v));
  }
}

}  // namespace ssvep::detail
