#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ssvep/augment.hpp"
#include "ssvep/convnet.hpp"
#include "ssvep/data.hpp"
#include "ssvep/fbcca.hpp"
#include "ssvep/linsvm.hpp"
#include "ssvep/preprocess.hpp"

namespace ssvep {

// Source identity and class of one window, independent of its representation.
struct SampleKey {
  SliceSource source;
  int label = 0;
};

struct SplitSpec {
  std::uint16_t test_subject_id = 1;
  double train_fraction = 2.0 / 3.0;
  double val_fraction = 1.0 / 3.0;
  std::uint64_t seed = 0;
  bool stratified = true;

  void validate() const;
};

// Indices into the key list, each ascending.
struct DatasetSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

// Test = every window of the test subject. The remaining windows are
// shuffled per class; every class is cut to the smallest class count, the
// validation share is floor(n * val_fraction) per class and the rest goes to
// training. Unstratified splits shuffle the pool as a whole instead.
DatasetSplit loso_split(std::span<const SampleKey> keys, const SplitSpec& spec);

struct EvalRow {
  std::size_t total = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;  // fraction
  std::array<double, 2> precision{};
  std::array<double, 2> recall{};
  std::array<double, 2> f1{};
  double f1_macro = 0.0;
  // Class 1 is the positive class.
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

// Binary metrics; F1 per class from the confusion matrix, macro-averaged.
// Empty denominators count as 0.
EvalRow metrics(std::span<const int> preds, std::span<const int> labels);

enum class ClassifierKind { cnn, cnn_no_transfer, svm, fbcca, majority };

ClassifierKind parse_classifier(std::string_view text);
const char* to_string(ClassifierKind kind);

struct ExperimentConfig {
  ClassifierKind classifier = ClassifierKind::fbcca;
  std::vector<double> stimulus_hz{12.0, 15.0};
  PreprocessConfig preprocess;
  AugmentMode augment = AugmentMode::none;
  FbccaConfig fbcca;
  std::vector<std::string> fbcca_channels{"Oz"};
  SvmTrainConfig svm;
  TrainConfig cnn;
  // Unset means the schedule implied by classifier, augmentation and
  // displacement (see default_cnn_schedule).
  std::optional<int> cnn_patience;
  std::optional<int> cnn_max_epochs;
  NetworkSpec network = NetworkSpec::full();
  std::optional<std::filesystem::path> pretrained_params;
  bool freeze_prefix = false;
  std::vector<std::uint16_t> test_subjects;  // empty = every subject
  double train_fraction = 2.0 / 3.0;
  double val_fraction = 1.0 / 3.0;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

struct CnnSchedule {
  int patience = 500;
  int max_epochs = 5000;
};

// Early-stopping schedule per training regime: 50/500 with full masking,
// 250/2000 for 0.1 s displacement with time masks, 200/5000 for 0.1 s without
// masks, 2000/5000 without transfer learning, 500/5000 otherwise.
CnnSchedule default_cnn_schedule(ClassifierKind kind, AugmentMode augment,
                                 std::size_t displacement_samples, double sample_rate_hz = 250.0);

struct SubjectResult {
  std::uint16_t subject_id = 0;
  EvalRow row;
  std::size_t n_train = 0;
  std::size_t n_val = 0;
  std::vector<EpochLog> log;
};

struct EvalReport {
  std::string classifier;
  std::vector<SubjectResult> subjects;
  double mean_accuracy_pct = 0.0;
  double mean_f1_macro = 0.0;
};

// Everything needed to classify one held-out subject, after training.
struct TrainedSubject {
  SubjectResult result;
  std::optional<ModelParams> params;
  std::optional<SvmModel> svm;
};

// Trains (or, for FBCCA and the majority control, directly evaluates) with
// `test_subject` held out.
TrainedSubject run_subject(const TrialStore& store, const ExperimentConfig& cfg,
                           std::uint16_t test_subject);

// One run_subject per test subject, optionally on cfg.jobs threads. Rows keep
// subject order and are identical for any job count.
EvalReport run_experiment(const TrialStore& store, const ExperimentConfig& cfg);

void write_report_csv(const EvalReport& report, const std::filesystem::path& path);
std::string report_csv(const EvalReport& report);
std::string format_summary(const EvalReport& report);

// Images (or windows) for the network input: 8x3 images resized to the
// network's input rows x cols.
ImageDataset to_image_dataset(std::span<const LabeledImage> images, std::span<const std::size_t> rows,
                              const NetworkSpec& spec);

}  // namespace ssvep
