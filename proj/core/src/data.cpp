#include "ssvep/data.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "ssvep/error.hpp"

namespace ssvep {

std::span<const float> RawTrial::channel(std::size_t i) const {
  const auto n = n_samples();
  return std::span<const float>(samples).subspan(i * n, n);
}

std::span<float> RawTrial::channel(std::size_t i) {
  const auto n = n_samples();
  return std::span<float>(samples).subspan(i * n, n);
}

void RawTrial::validate() const {
  if (channels.empty()) throw DataError("trial has no channels");
  if (samples.empty()) throw DataError("trial has no samples");
  if (samples.size() % channels.size() != 0) {
    throw DataError("sample count " + std::to_string(samples.size()) +
                    " is not a multiple of the channel count " +
                    std::to_string(channels.size()));
  }
  if (subject_id < 1) throw DataError("subject id must be >= 1");
  std::unordered_set<std::string> seen;
  for (const auto& name : channels) {
    if (!seen.insert(name).second) throw DataError("duplicate channel name: " + name);
  }
}

LabelMap::LabelMap() : LabelMap(std::vector<double>{12.0, 15.0}) {}

LabelMap::LabelMap(std::vector<double> freqs_hz) : freqs_(std::move(freqs_hz)) {
  if (freqs_.empty()) throw ConfigError("label map needs at least one frequency");
  std::sort(freqs_.begin(), freqs_.end());
  for (std::size_t i = 1; i < freqs_.size(); ++i) {
    if (freqs_[i] - freqs_[i - 1] < 1e-6) {
      throw ConfigError("duplicate stimulus frequency " + std::to_string(freqs_[i]));
    }
  }
}

Label LabelMap::label_of(double stimulus_hz) const {
  for (std::size_t i = 0; i < freqs_.size(); ++i) {
    if (std::abs(freqs_[i] - stimulus_hz) < 1e-6) {
      return Label{static_cast<int>(i), freqs_[i]};
    }
  }
  throw DataError("stimulus frequency " + std::to_string(stimulus_hz) +
                  " Hz is not in the label map");
}

Label LabelMap::label_at(int class_index) const {
  if (class_index < 0 || static_cast<std::size_t>(class_index) >= freqs_.size()) {
    throw DataError("class index " + std::to_string(class_index) + " out of range");
  }
  return Label{class_index, freqs_[static_cast<std::size_t>(class_index)]};
}

TrialStore make_store(std::vector<RawTrial> trials) {
  TrialStore store;
  if (!trials.empty()) {
    store.sample_rate_hz = trials.front().sample_rate_hz;
    store.channels = trials.front().channels;
  }
  for (const auto& t : trials) {
    t.validate();
    if (t.sample_rate_hz != store.sample_rate_hz || t.channels != store.channels) {
      throw DataError("trials in a store must share sample rate and channel table");
    }
  }
  store.trials = std::move(trials);
  return store;
}

RawTrial select_channels(const RawTrial& trial, std::span<const std::string> names) {
  std::vector<std::size_t> index;
  index.reserve(names.size());
  for (const auto& name : names) {
    auto it = std::find(trial.channels.begin(), trial.channels.end(), name);
    if (it == trial.channels.end()) {
      std::string available;
      for (const auto& c : trial.channels) {
        if (!available.empty()) available += ", ";
        available += c;
      }
      throw DataError("unknown channel \"" + name + "\"; available: " + available);
    }
    index.push_back(static_cast<std::size_t>(it - trial.channels.begin()));
  }
  if (index.empty()) throw DataError("no channels requested");

  RawTrial out;
  out.subject_id = trial.subject_id;
  out.stimulus_hz = trial.stimulus_hz;
  out.trial_index = trial.trial_index;
  out.sample_rate_hz = trial.sample_rate_hz;
  out.channels.assign(names.begin(), names.end());
  out.samples.reserve(index.size() * trial.n_samples());
  for (auto i : index) {
    auto row = trial.channel(i);
    out.samples.insert(out.samples.end(), row.begin(), row.end());
  }
  out.validate();
  return out;
}

const std::vector<std::string>& single_electrode() {
  static const std::vector<std::string> names{"Oz"};
  return names;
}

const std::vector<std::string>& nine_electrodes() {
  static const std::vector<std::string> names{"Pz",  "PO5", "PO3", "POz", "PO4",
                                              "PO6", "O1",  "Oz",  "O2"};
  return names;
}

}  // namespace ssvep
