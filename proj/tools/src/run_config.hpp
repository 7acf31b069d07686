#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssvep/harness.hpp"
#include "ssvep/synth.hpp"

namespace ssvep::cli {

// "auto" applies CAR only when the store has more than one channel.
enum class CarMode { automatic, on, off };

// Everything a subcommand can be configured with. Durations are kept in
// seconds and resolved against the store's sample rate when it is known.
struct RunConfig {
  std::optional<std::filesystem::path> store;
  std::string classifier = "fbcca";
  std::vector<double> stimulus_hz{12.0, 15.0};
  std::optional<std::uint64_t> seed;  // unset: SSVEP_BENCH_SEED, then 0
  unsigned jobs = 1;
  std::vector<std::uint16_t> test_subjects;
  double train_fraction = 2.0 / 3.0;
  double val_fraction = 1.0 / 3.0;

  CarMode car = CarMode::automatic;
  std::string channel = "Oz";
  double window_s = 0.5;
  double displacement_s = 0.5;
  StftConfig stft;
  BandSpec bands = BandSpec::ssvep_default();
  NormalizeStage normalize_stage = NormalizeStage::before_band_select;
  AugmentMode augment = AugmentMode::none;

  FbccaConfig fbcca;
  std::vector<std::string> fbcca_channels{"Oz"};

  SvmTrainConfig svm;

  TrainConfig cnn;
  std::optional<int> cnn_patience;
  std::optional<int> cnn_max_epochs;
  std::string network = "full";
  std::optional<std::filesystem::path> pretrained;
  bool freeze_prefix = false;

  SynthStoreSpec synth;
};

// Strict parse: unknown keys and wrongly typed values raise ConfigError
// naming the JSON path.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

std::uint64_t resolve_seed(const RunConfig& cfg);
NetworkSpec resolve_network(const std::string& name);
std::size_t seconds_to_samples(double seconds, double sample_rate_hz, const char* what);

// "0.5s", "0.1s" or a plain number of seconds.
double parse_duration(const std::string& text);

PreprocessConfig resolve_preprocess(const RunConfig& cfg, const TrialStore& store);
ExperimentConfig resolve_experiment(const RunConfig& cfg, const TrialStore& store);

}  // namespace ssvep::cli
