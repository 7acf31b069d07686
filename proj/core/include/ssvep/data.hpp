#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ssvep {

// One recorded (or synthesized) trial: every channel of one stimulation
// period. Samples are stored channel-major, n_channels rows of n_samples.
struct RawTrial {
  std::uint16_t subject_id = 1;
  float stimulus_hz = 0.0f;
  std::uint16_t trial_index = 0;
  float sample_rate_hz = 250.0f;
  std::vector<std::string> channels;
  std::vector<float> samples;

  std::size_t n_channels() const { return channels.size(); }
  std::size_t n_samples() const {
    return channels.empty() ? 0 : samples.size() / channels.size();
  }

  std::span<const float> channel(std::size_t i) const;
  std::span<float> channel(std::size_t i);

  // Throws DataError when the invariants (non-empty, unique names, rectangular
  // sample matrix, subject id >= 1) do not hold.
  void validate() const;

  bool operator==(const RawTrial&) const = default;
};

// Identifies where a window came from, down to the first sample.
struct SliceSource {
  std::uint16_t subject_id = 0;
  float stimulus_hz = 0.0f;
  std::uint16_t trial_index = 0;
  std::uint32_t start_sample = 0;

  bool operator==(const SliceSource&) const = default;
  auto operator<=>(const SliceSource&) const = default;
};

struct WindowSlice {
  SliceSource source;
  std::vector<double> samples;
};

struct Label {
  int class_index = 0;
  double stimulus_hz = 0.0;

  bool operator==(const Label&) const = default;
};

// Bijection between stimulus frequencies and class indices. Frequencies are
// sorted ascending, so with the default {12, 15}: 12 Hz -> 0, 15 Hz -> 1.
class LabelMap {
 public:
  LabelMap();  // {12, 15}
  explicit LabelMap(std::vector<double> freqs_hz);

  std::size_t size() const { return freqs_.size(); }
  const std::vector<double>& freqs() const { return freqs_; }

  // Exact match within 1e-6 Hz; throws DataError for an unknown frequency.
  Label label_of(double stimulus_hz) const;
  int class_of(double stimulus_hz) const { return label_of(stimulus_hz).class_index; }
  Label label_at(int class_index) const;

 private:
  std::vector<double> freqs_;
};

struct TrialStore {
  float sample_rate_hz = 250.0f;
  std::vector<std::string> channels;
  std::vector<RawTrial> trials;

  bool operator==(const TrialStore&) const = default;
};

// Builds a store header from the first trial and checks the rest share it.
TrialStore make_store(std::vector<RawTrial> trials);

// Returns a trial holding exactly `names`, in the requested order.
RawTrial select_channels(const RawTrial& trial, std::span<const std::string> names);

// Oz and the 9 parieto-occipital electrodes used for the multichannel runs.
const std::vector<std::string>& single_electrode();
const std::vector<std::string>& nine_electrodes();

}  // namespace ssvep
