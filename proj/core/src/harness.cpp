#include "ssvep/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "ssvep/error.hpp"
#include "ssvep/tensor_io.hpp"

namespace ssvep {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t subject_seed(std::uint64_t seed, std::uint16_t subject) {
  return splitmix64(seed ^ (static_cast<std::uint64_t>(subject) * 0xD1B54A32D192ED03ull));
}

std::size_t share(std::size_t n, double fraction) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction + 1e-9));
}

[[noreturn]] void rethrow_with_context(const std::string& context) {
  try {
    throw;
  } catch (const ConfigError& e) {
    throw ConfigError(context + ": " + e.what());
  } catch (const NumericError& e) {
    throw NumericError(context + ": " + e.what());
  } catch (const Error& e) {
    throw DataError(context + ": " + e.what());
  } catch (const std::exception& e) {
    throw DataError(context + ": " + e.what());
  }
}

std::vector<SampleKey> keys_of(const std::vector<LabeledImage>& images) {
  std::vector<SampleKey> keys;
  keys.reserve(images.size());
  for (const auto& im : images) keys.push_back(SampleKey{im.source, im.label});
  return keys;
}

std::vector<LabeledImage> pick(const std::vector<LabeledImage>& images,
                               std::span<const std::size_t> rows) {
  std::vector<LabeledImage> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(images[r]);
  return out;
}

SvmDataset to_svm(const std::vector<LabeledImage>& images) {
  SvmDataset d;
  d.x.reserve(images.size());
  for (const auto& im : images) {
    d.x.push_back(flatten_for_svm(im.image));
    d.y.push_back(class_to_target(im.label));
  }
  return d;
}

void require_subject(const TrialStore& store, std::uint16_t subject) {
  const bool found = std::any_of(store.trials.begin(), store.trials.end(),
                                 [&](const RawTrial& t) { return t.subject_id == subject; });
  if (!found) throw DataError("unknown subject id " + std::to_string(subject));
}

TrainedSubject evaluate_fbcca(const TrialStore& store, const ExperimentConfig& cfg,
                              std::uint16_t test_subject) {
  const LabelMap labels(cfg.stimulus_hz);
  FbccaConfig fb = cfg.fbcca;
  fb.candidate_freqs_hz = cfg.stimulus_hz;
  std::vector<int> preds, truth;
  for (const auto& trial : store.trials) {
    if (trial.subject_id != test_subject) continue;
    const RawTrial referenced = cfg.preprocess.car ? car_filter(trial) : trial;
    const RawTrial picked = select_channels(referenced, cfg.fbcca_channels);
    fb.sample_rate_hz = picked.sample_rate_hz;
    const auto& win = cfg.preprocess.window;
    const auto count = window_count(picked.n_samples(), win);
    const int label = labels.class_of(trial.stimulus_hz);
    for (std::size_t w = 0; w < count; ++w) {
      RowMatrix x(picked.n_channels(), win.window_len_samples);
      for (std::size_t c = 0; c < picked.n_channels(); ++c) {
        const auto src = picked.channel(c).subspan(w * win.displacement_samples,
                                                   win.window_len_samples);
        std::copy(src.begin(), src.end(), x.row(c).begin());
      }
      preds.push_back(fbcca_classify(x, fb).class_index);
      truth.push_back(label);
    }
  }
  TrainedSubject out;
  out.result.subject_id = test_subject;
  out.result.row = metrics(preds, truth);
  return out;
}

TrainedSubject train_and_test(const std::vector<LabeledImage>& images, const ExperimentConfig& cfg,
                              std::uint16_t test_subject) {
  const auto seed = subject_seed(cfg.seed, test_subject);
  const auto keys = keys_of(images);
  SplitSpec split_spec{test_subject, cfg.train_fraction, cfg.val_fraction, seed, true};
  const auto split = loso_split(keys, split_spec);
  if (split.test.empty()) throw DataError("no windows for subject " + std::to_string(test_subject));

  TrainedSubject out;
  out.result.subject_id = test_subject;
  std::vector<int> truth;
  for (auto i : split.test) truth.push_back(images[i].label);
  std::vector<int> preds;

  const auto train_plain = pick(images, split.train);
  const auto val_images = pick(images, split.val);
  const auto test_images = pick(images, split.test);

  switch (cfg.classifier) {
    case ClassifierKind::majority: {
      std::map<int, std::size_t> counts;
      for (const auto& im : train_plain) ++counts[im.label];
      int best = 0;
      std::size_t best_count = 0;
      for (const auto& [label, n] : counts) {
        if (n > best_count) {
          best = label;
          best_count = n;
        }
      }
      preds.assign(truth.size(), best);
      out.result.n_train = train_plain.size();
      out.result.n_val = val_images.size();
      break;
    }
    case ClassifierKind::svm: {
      const auto train_images = cfg.augment == AugmentMode::none
                                    ? train_plain
                                    : expand_dataset(train_plain, cfg.augment);
      SvmTrainConfig svm_cfg = cfg.svm;
      svm_cfg.seed = splitmix64(seed);
      auto trained = svm_train(to_svm(train_images), to_svm(val_images), svm_cfg);
      for (const auto& im : test_images) {
        preds.push_back(target_to_class(svm_predict(trained.model, flatten_for_svm(im.image))));
      }
      out.result.n_train = train_images.size();
      out.result.n_val = val_images.size();
      out.result.log = std::move(trained.log);
      out.svm = std::move(trained.model);
      break;
    }
    case ClassifierKind::cnn:
    case ClassifierKind::cnn_no_transfer: {
      const auto train_images = cfg.augment == AugmentMode::none
                                    ? train_plain
                                    : expand_dataset(train_plain, cfg.augment);
      const auto& spec = cfg.network;
      std::vector<std::size_t> all_train(train_images.size()), all_val(val_images.size()),
          all_test(test_images.size());
      for (std::size_t i = 0; i < all_train.size(); ++i) all_train[i] = i;
      for (std::size_t i = 0; i < all_val.size(); ++i) all_val[i] = i;
      for (std::size_t i = 0; i < all_test.size(); ++i) all_test[i] = i;

      ModelParams params;
      if (cfg.classifier == ClassifierKind::cnn) {
        if (!cfg.pretrained_params) {
          throw ConfigError("classifier cnn needs pretrained_params (use cnn-scratch otherwise)");
        }
        params = replace_head(load_params(*cfg.pretrained_params), splitmix64(seed), spec).params;
        if (cfg.freeze_prefix) set_prefix_frozen(params, spec, true);
      } else {
        params = init_params(spec, splitmix64(seed));
      }
      TrainConfig tc = cfg.cnn;
      const auto schedule =
          default_cnn_schedule(cfg.classifier, cfg.augment,
                               cfg.preprocess.window.displacement_samples);
      tc.patience = cfg.cnn_patience.value_or(schedule.patience);
      tc.max_epochs = cfg.cnn_max_epochs.value_or(schedule.max_epochs);
      tc.seed = splitmix64(splitmix64(seed));
      auto trained = train(spec, std::move(params), to_image_dataset(train_images, all_train, spec),
                           to_image_dataset(val_images, all_val, spec), tc);
      preds = predict(spec, trained.params, to_image_dataset(test_images, all_test, spec).images);
      out.result.n_train = train_images.size();
      out.result.n_val = val_images.size();
      out.result.log = std::move(trained.log);
      out.params = std::move(trained.params);
      break;
    }
    case ClassifierKind::fbcca: throw ConfigError("FBCCA does not train on images");
  }
  out.result.row = metrics(preds, truth);
  return out;
}

std::vector<std::uint16_t> subjects_of(const TrialStore& store, const ExperimentConfig& cfg) {
  if (!cfg.test_subjects.empty()) {
    for (auto s : cfg.test_subjects) require_subject(store, s);
    return cfg.test_subjects;
  }
  std::set<std::uint16_t> ids;
  for (const auto& t : store.trials) ids.insert(t.subject_id);
  return {ids.begin(), ids.end()};
}

}  // namespace

void SplitSpec::validate() const {
  if (!(train_fraction > 0.0) || !(val_fraction > 0.0)) {
    throw ConfigError("split fractions must be positive");
  }
  if (train_fraction + val_fraction > 1.0 + 1e-3) {
    throw ConfigError("split fractions sum to more than 1");
  }
}

DatasetSplit loso_split(std::span<const SampleKey> keys, const SplitSpec& spec) {
  spec.validate();
  DatasetSplit out;
  std::set<std::uint16_t> subjects;
  std::map<int, std::vector<std::size_t>> pool;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    subjects.insert(keys[i].source.subject_id);
    if (keys[i].source.subject_id == spec.test_subject_id) {
      out.test.push_back(i);
    } else {
      pool[spec.stratified ? keys[i].label : 0].push_back(i);
    }
  }
  if (!subjects.count(spec.test_subject_id)) {
    throw DataError("unknown subject id " + std::to_string(spec.test_subject_id));
  }
  if (subjects.size() < 2) throw DataError("leave-one-subject-out needs at least two subjects");

  std::size_t per_class = std::numeric_limits<std::size_t>::max();
  for (const auto& [label, rows] : pool) per_class = std::min(per_class, rows.size());
  const bool whole = spec.train_fraction + spec.val_fraction >= 1.0 - 1e-3;

  std::mt19937_64 rng(spec.seed);
  for (auto& [label, rows] : pool) {
    std::shuffle(rows.begin(), rows.end(), rng);
    const std::size_t n = spec.stratified ? per_class : rows.size();
    const auto n_val = share(n, spec.val_fraction);
    const auto n_train = whole ? n - n_val : share(n, spec.train_fraction);
    out.train.insert(out.train.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.val.insert(out.val.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_train),
                   rows.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  return out;
}

EvalRow metrics(std::span<const int> preds, std::span<const int> labels) {
  if (preds.size() != labels.size()) {
    throw DataError("metrics: " + std::to_string(preds.size()) + " predictions for " +
                    std::to_string(labels.size()) + " labels");
  }
  if (preds.empty()) throw DataError("metrics on an empty set");
  EvalRow row;
  std::size_t conf[2][2] = {{0, 0}, {0, 0}};  // [truth][pred]
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] < 0 || preds[i] > 1 || labels[i] < 0 || labels[i] > 1) {
      throw DataError("metrics expects binary class indices");
    }
    ++conf[labels[i]][preds[i]];
  }
  row.total = preds.size();
  row.correct = conf[0][0] + conf[1][1];
  row.accuracy = static_cast<double>(row.correct) / static_cast<double>(row.total);
  row.tp = conf[1][1];
  row.fp = conf[0][1];
  row.fn = conf[1][0];
  row.tn = conf[0][0];
  for (int c = 0; c < 2; ++c) {
    const auto tp = conf[c][c];
    const auto predicted = conf[0][c] + conf[1][c];
    const auto actual = conf[c][0] + conf[c][1];
    const double p = predicted ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
    const double r = actual ? static_cast<double>(tp) / static_cast<double>(actual) : 0.0;
    row.precision[c] = p;
    row.recall[c] = r;
    row.f1[c] = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  }
  row.f1_macro = (row.f1[0] + row.f1[1]) / 2.0;
  return row;
}

ClassifierKind parse_classifier(std::string_view text) {
  if (text == "cnn") return ClassifierKind::cnn;
  if (text == "cnn-scratch" || text == "cnn_no_transfer") return ClassifierKind::cnn_no_transfer;
  if (text == "svm") return ClassifierKind::svm;
  if (text == "fbcca") return ClassifierKind::fbcca;
  if (text == "majority") return ClassifierKind::majority;
  throw ConfigError("unknown classifier \"" + std::string(text) +
                    "\" (expected cnn|cnn-scratch|svm|fbcca|majority)");
}

const char* to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::cnn: return "cnn";
    case ClassifierKind::cnn_no_transfer: return "cnn-scratch";
    case ClassifierKind::svm: return "svm";
    case ClassifierKind::fbcca: return "fbcca";
    case ClassifierKind::majority: return "majority";
  }
  return "unknown";
}

CnnSchedule default_cnn_schedule(ClassifierKind kind, AugmentMode augment,
                                 std::size_t displacement_samples, double sample_rate_hz) {
  if (kind == ClassifierKind::cnn_no_transfer) return {2000, 5000};
  if (augment == AugmentMode::full) return {50, 500};
  const bool short_hop = static_cast<double>(displacement_samples) < 0.3 * sample_rate_hz;
  if (short_hop) {
    return augment == AugmentMode::none ? CnnSchedule{200, 5000} : CnnSchedule{250, 2000};
  }
  return {500, 5000};
}

ImageDataset to_image_dataset(std::span<const LabeledImage> images,
                              std::span<const std::size_t> rows, const NetworkSpec& spec) {
  if (spec.in_channels != 1) throw ConfigError("spectrogram inputs have a single channel");
  const auto plane = spec.in_rows * spec.in_cols;
  ImageDataset d;
  d.images = Tensor({rows.size(), 1, spec.in_rows, spec.in_cols});
  d.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& im = images[rows[i]];
    const auto resized = resize_nearest(im.image, spec.in_rows, spec.in_cols);
    std::copy(resized.values.begin(), resized.values.end(),
              d.images.data.begin() + static_cast<std::ptrdiff_t>(i * plane));
    d.labels.push_back(im.label);
  }
  return d;
}

TrainedSubject run_subject(const TrialStore& store, const ExperimentConfig& cfg,
                           std::uint16_t test_subject) {
  require_subject(store, test_subject);
  if (cfg.classifier == ClassifierKind::fbcca) return evaluate_fbcca(store, cfg, test_subject);
  const LabelMap labels(cfg.stimulus_hz);
  const auto images = store_to_images(store, cfg.preprocess, labels);
  return train_and_test(images, cfg, test_subject);
}

EvalReport run_experiment(const TrialStore& store, const ExperimentConfig& cfg) {
  const auto subjects = subjects_of(store, cfg);
  std::vector<LabeledImage> images;
  if (cfg.classifier != ClassifierKind::fbcca) {
    images = store_to_images(store, cfg.preprocess, LabelMap(cfg.stimulus_hz));
  }

  std::vector<SubjectResult> rows(subjects.size());
  std::vector<std::exception_ptr> errors(subjects.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < subjects.size(); i = next++) {
      try {
        rows[i] = cfg.classifier == ClassifierKind::fbcca
                      ? evaluate_fbcca(store, cfg, subjects[i]).result
                      : train_and_test(images, cfg, subjects[i]).result;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(cfg.jobs, static_cast<unsigned>(subjects.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    if (errors[i]) {
      try {
        std::rethrow_exception(errors[i]);
      } catch (...) {
        rethrow_with_context("test subject " + std::to_string(subjects[i]));
      }
    }
  }

  EvalReport report;
  report.classifier = to_string(cfg.classifier);
  report.subjects = std::move(rows);
  for (const auto& r : report.subjects) {
    report.mean_accuracy_pct += 100.0 * r.row.accuracy;
    report.mean_f1_macro += r.row.f1_macro;
  }
  if (!report.subjects.empty()) {
    report.mean_accuracy_pct /= static_cast<double>(report.subjects.size());
    report.mean_f1_macro /= static_cast<double>(report.subjects.size());
  }
  return report;
}

std::string report_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "subject,classifier,accuracy_pct,f1_macro,tp,fp,fn,tn\n";
  char line[256];
  for (const auto& r : report.subjects) {
    std::snprintf(line, sizeof line, "%u,%s,%.4f,%.6f,%zu,%zu,%zu,%zu\n",
                  static_cast<unsigned>(r.subject_id), report.classifier.c_str(),
                  100.0 * r.row.accuracy, r.row.f1_macro, r.row.tp, r.row.fp, r.row.fn, r.row.tn);
    out << line;
  }
  std::snprintf(line, sizeof line, "mean,%s,%.4f,%.6f,,,,\n", report.classifier.c_str(),
                report.mean_accuracy_pct, report.mean_f1_macro);
  out << line;
  return out.str();
}

void write_report_csv(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << report_csv(report);
}

std::string format_summary(const EvalReport& report) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-14s | %12s | %8s\n", "Subject", report.classifier.c_str(),
                "F1");
  out << line << std::string(40, '-') << "\n";
  for (const auto& r : report.subjects) {
    std::snprintf(line, sizeof line, "%-14u | %12.1f | %8.3f\n",
                  static_cast<unsigned>(r.subject_id), 100.0 * r.row.accuracy, r.row.f1_macro);
    out << line;
  }
  out << std::string(40, '-') << "\n";
  std::snprintf(line, sizeof line, "%-14s | %12.1f |\n", "Mean accuracy", report.mean_accuracy_pct);
  out << line;
  std::snprintf(line, sizeof line, "%-14s | %12.3f |\n", "Mean F1-Score", report.mean_f1_macro);
  out << line;
  return out.str();
}

}  // namespace ssvep
