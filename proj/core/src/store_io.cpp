#include "ssvep/store_io.hpp"

#include <limits>

#include "binary_io.hpp"
#include "ssvep/error.hpp"

namespace ssvep {

std::vector<std::uint8_t> encode_store(const TrialStore& store) {
  if (store.channels.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw DataError("too many channels for SSVB");
  }
  if (store.trials.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw DataError("too many trials for SSVB");
  }
  detail::ByteWriter out;
  out.put_bytes("SSVB");
  out.put(kStoreVersion);
  out.put(store.sample_rate_hz);
  out.put(static_cast<std::uint16_t>(store.channels.size()));
  for (const auto& name : store.channels) out.put_string16(name);
  out.put(static_cast<std::uint32_t>(store.trials.size()));
  for (const auto& t : store.trials) {
    t.validate();
    if (t.channels != store.channels || t.sample_rate_hz != store.sample_rate_hz) {
      throw DataError("trial " + std::to_string(t.trial_index) + " of subject " +
                      std::to_string(t.subject_id) +
                      " does not match the store's channel table or sample rate");
    }
    out.put(t.subject_id);
    out.put(t.stimulus_hz);
    out.put(t.trial_index);
    out.put(static_cast<std::uint32_t>(t.n_samples()));
    out.put_f32(t.samples);
  }
  return out.bytes();
}

TrialStore decode_store(std::vector<std::uint8_t> bytes) {
  detail::ByteReader in(std::move(bytes));
  detail::expect_header(in, "SSVB", kStoreVersion);

  TrialStore store;
  store.sample_rate_hz = in.get<float>("sample rate");
  const auto n_channels = in.get<std::uint16_t>("channel count");
  store.channels.reserve(n_channels);
  for (std::uint16_t i = 0; i < n_channels; ++i) {
    store.channels.push_back(in.get_string16("channel name"));
  }
  const auto n_trials = in.get<std::uint32_t>("trial count");
  store.trials.reserve(std::min<std::size_t>(n_trials, 1u << 16));
  for (std::uint32_t i = 0; i < n_trials; ++i) {
    const auto trial_at = in.offset();
    RawTrial t;
    t.subject_id = in.get<std::uint16_t>("subject id");
    t.stimulus_hz = in.get<float>("stimulus frequency");
    t.trial_index = in.get<std::uint16_t>("trial index");
    const auto n_samples = in.get<std::uint32_t>("sample count");
    t.sample_rate_hz = store.sample_rate_hz;
    t.channels = store.channels;
    const auto count = static_cast<std::uint64_t>(n_samples) * n_channels;
    if (count * sizeof(float) > in.remaining()) {
      throw FormatError(FormatError::Kind::truncated, in.offset(),
                        "trial " + std::to_string(i) + " declares " + std::to_string(count) +
                            " samples, only " + std::to_string(in.remaining()) + " bytes left");
    }
    t.samples.resize(count);
    in.get_f32(t.samples, "samples");
    if (n_channels == 0 || n_samples == 0 || t.subject_id == 0) {
      throw FormatError(FormatError::Kind::malformed, trial_at,
                        "trial " + std::to_string(i) + " is empty or has subject id 0");
    }
    store.trials.push_back(std::move(t));
  }
  if (!in.at_end()) {
    throw FormatError(FormatError::Kind::malformed, in.offset(),
                      std::to_string(in.remaining()) + " trailing bytes");
  }
  return store;
}

void save_store(const TrialStore& store, const std::filesystem::path& path) {
  detail::write_file(path, encode_store(store));
}

TrialStore load_store(const std::filesystem::path& path) {
  return decode_store(detail::read_file(path));
}

}  // namespace ssvep
