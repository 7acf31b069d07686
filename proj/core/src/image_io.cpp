#include "ssvep/image_io.hpp"

#include "binary_io.hpp"
#include "ssvep/error.hpp"

namespace ssvep {
namespace {

std::int16_t encode_index(const std::optional<std::size_t>& idx) {
  return idx ? static_cast<std::int16_t>(*idx) : std::int16_t{-1};
}

std::optional<std::size_t> decode_index(std::int16_t raw) {
  if (raw < 0) return std::nullopt;
  return static_cast<std::size_t>(raw);
}

}  // namespace

void save_images(const std::vector<LabeledImage>& images, const std::filesystem::path& path) {
  detail::ByteWriter out;
  out.put_bytes("SSVI");
  out.put(kImageSetVersion);
  out.put(static_cast<std::uint32_t>(images.size()));
  const Spectrogram empty;
  const Spectrogram& first = images.empty() ? empty : images.front().image;
  if (first.rows > 0xFFFF || first.cols > 0xFFFF) throw DataError("image too large for SSVI");
  out.put(static_cast<std::uint16_t>(first.rows));
  out.put(static_cast<std::uint16_t>(first.cols));
  for (std::size_t r = 0; r < first.rows; ++r) {
    out.put(static_cast<float>(r < first.row_freqs_hz.size() ? first.row_freqs_hz[r] : 0.0));
  }
  for (std::size_t c = 0; c < first.cols; ++c) {
    out.put(static_cast<float>(c < first.col_times_s.size() ? first.col_times_s[c] : 0.0));
  }
  for (const auto& item : images) {
    if (item.image.rows != first.rows || item.image.cols != first.cols) {
      throw DataError("all images in an SSVI set must share one shape");
    }
    out.put(item.source.subject_id);
    out.put(item.source.stimulus_hz);
    out.put(item.source.trial_index);
    out.put(item.source.start_sample);
    out.put(static_cast<std::uint8_t>(item.label));
    out.put(encode_index(item.variant.time_col));
    out.put(encode_index(item.variant.freq_row));
    for (double v : item.image.values) out.put(static_cast<float>(v));
  }
  detail::write_file(path, out.bytes());
}

std::vector<LabeledImage> load_images(const std::filesystem::path& path) {
  detail::ByteReader in(detail::read_file(path));
  detail::expect_header(in, "SSVI", kImageSetVersion);
  const auto count = in.get<std::uint32_t>("image count");
  const auto rows = in.get<std::uint16_t>("rows");
  const auto cols = in.get<std::uint16_t>("cols");
  Spectrogram proto(rows, cols);
  proto.normalized = true;
  for (std::size_t r = 0; r < rows; ++r) proto.row_freqs_hz.push_back(in.get<float>("row freq"));
  for (std::size_t c = 0; c < cols; ++c) proto.col_times_s.push_back(in.get<float>("col time"));

  const std::size_t per_image = 2 + 4 + 2 + 4 + 1 + 2 + 2 + 4ull * rows * cols;
  if (static_cast<std::uint64_t>(count) * per_image > in.remaining()) {
    throw FormatError(FormatError::Kind::truncated, in.offset(),
                      std::to_string(count) + " images declared, " +
                          std::to_string(in.remaining()) + " bytes left");
  }
  std::vector<LabeledImage> out;
  out.reserve(count);
  std::vector<float> buf(static_cast<std::size_t>(rows) * cols);
  for (std::uint32_t i = 0; i < count; ++i) {
    LabeledImage item;
    item.source.subject_id = in.get<std::uint16_t>("subject id");
    item.source.stimulus_hz = in.get<float>("stimulus frequency");
    item.source.trial_index = in.get<std::uint16_t>("trial index");
    item.source.start_sample = in.get<std::uint32_t>("start sample");
    item.label = in.get<std::uint8_t>("label");
    item.variant.time_col = decode_index(in.get<std::int16_t>("time mask"));
    item.variant.freq_row = decode_index(in.get<std::int16_t>("frequency mask"));
    in.get_f32(buf, "image values");
    item.image = proto;
    item.image.values.assign(buf.begin(), buf.end());
    out.push_back(std::move(item));
  }
  if (!in.at_end()) {
    throw FormatError(FormatError::Kind::malformed, in.offset(),
                      std::to_string(in.remaining()) + " trailing bytes");
  }
  return out;
}

}  // namespace ssvep
