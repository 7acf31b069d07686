// Acceptance suite: one PASS/FAIL/SKIP line per criterion, non-zero exit on
// any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include <unistd.h>

#include "fixtures.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"
#include "ssvep/augment.hpp"
#include "ssvep/convnet.hpp"
#include "ssvep/error.hpp"
#include "ssvep/fbcca.hpp"
#include "ssvep/harness.hpp"
#include "ssvep/linsvm.hpp"
#include "ssvep/preprocess.hpp"
#include "ssvep/store_io.hpp"
#include "ssvep/synth.hpp"
#include "ssvep/tensor_io.hpp"

namespace fs = std::filesystem;
using namespace ssvep;

namespace tol {
constexpr double cca_abs = 1e-8;
constexpr double fbcca_min_acc = 0.99;
constexpr double fbcca_snr_db = 10.0;
constexpr double z99 = 2.5758293035489;  // two-sided 99% normal quantile
constexpr double grad_rel = 1e-4;
constexpr int overfit_epochs = 500;
constexpr double real_pp = 2.0;
constexpr double real_oz_pct = 77.1;
constexpr double real_nine_pct = 91.1;
}  // namespace tol

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
  Status status = Status::fail;
  std::string detail;
};

Outcome pass(std::string d) { return {Status::pass, std::move(d)}; }
Outcome fail(std::string d) { return {Status::fail, std::move(d)}; }
Outcome skip(std::string d) { return {Status::skip, std::move(d)}; }
Outcome check(bool ok, std::string d) { return {ok ? Status::pass : Status::fail, std::move(d)}; }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

fs::path scratch_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("ssvep_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

RowMatrix window_of(const RawTrial& t, std::size_t start, std::size_t len = 125) {
  RowMatrix m(1, len);
  for (std::size_t i = 0; i < len; ++i) m(0, i) = t.samples[start + i];
  return m;
}

// ---------------------------------------------------------------------------

Outcome window_counts() {
  const std::vector<float> trial(1250, 0.0f);
  const auto a = slice_windows(trial, WindowConfig{125, 125}).size();
  const auto b = slice_windows(trial, WindowConfig{125, 25}).size();
  const bool formula = window_count(1250, {125, 125}) == 10 && window_count(1250, {125, 25}) == 46;
  return check(a == 10 && b == 46 && formula,
               "0.5 s -> " + std::to_string(a) + ", 0.1 s -> " + std::to_string(b) + " windows");
}

Outcome dataset_sizes() {
  const auto store = testing::synth_store(35, 0.0, 1);
  if (store.trials.size() != 420) return fail("store has " + std::to_string(store.trials.size()) + " trials");
  auto cfg = testing::synth_preprocess();
  const LabelMap labels;
  const auto half = store_to_images(store, cfg, labels);
  cfg.window.displacement_samples = 25;
  const auto tenth = store_to_images(store, cfg, labels);
  const std::size_t got[] = {half.size(), expand_dataset(half, AugmentMode::time_only).size(),
                             expand_dataset(half, AugmentMode::full).size(), tenth.size(),
                             expand_dataset(tenth, AugmentMode::time_only).size()};
  const std::size_t want[] = {4200, 16800, 151200, 19320, 77280};
  std::string detail;
  bool ok = true;
  for (int i = 0; i < 5; ++i) {
    ok = ok && got[i] == want[i];
    detail += (i ? ", " : "") + std::to_string(got[i]);
  }
  return check(ok, detail);
}

Outcome geometry() {
  const auto store = testing::synth_store(35, 0.0, 2);
  const auto images = store_to_images(store, testing::synth_preprocess(), LabelMap{});
  const std::vector<double> freqs{10, 12, 14, 16, 22, 24, 28, 30};
  for (const auto& im : images) {
    if (im.image.rows != 8 || im.image.cols != 3) return fail("image not 8x3");
    if (im.image.row_freqs_hz != freqs) return fail("unexpected row frequencies");
    const auto big = resize_nearest(im.image, 96, 64);
    if (big.rows != 96 || big.cols != 64 || big.values.size() != 96 * 64) return fail("resize not 96x64");
  }
  std::vector<std::size_t> rows(images.size());
  std::iota(rows.begin(), rows.end(), 0);
  const auto ds = to_image_dataset(images, rows, NetworkSpec::full());
  if (ds.images.shape != Shape{images.size(), 1, 96, 64}) return fail("network batch shape wrong");
  return pass(std::to_string(images.size()) + " images 8x3 -> 96x64, rows 10..30 Hz");
}

Outcome cca_oracle() {
  std::mt19937_64 rng(20240611);
  std::uniform_int_distribution<std::size_t> rows(1, 5), len(11, 100);
  std::normal_distribution<double> n01;
  double worst = 0.0;
  for (int iter = 0; iter < 1000; ++iter) {
    const std::size_t cx = rows(rng), cy = rows(rng);
    const std::size_t t = std::max(len(rng), cx + cy + 1);
    RowMatrix x(cx, t), y(cy, t);
    for (auto& v : x.data) v = n01(rng);
    for (auto& v : y.data) v = n01(rng);
    oracle::Dense dx(cx), dy(cy);
    for (std::size_t r = 0; r < cx; ++r) dx[r].assign(x.row(r).begin(), x.row(r).end());
    for (std::size_t r = 0; r < cy; ++r) dy[r].assign(y.row(r).begin(), y.row(r).end());
    worst = std::max(worst, std::abs(cca_max_corr(x, y).rho - oracle::ridge_cca(dx, dy)));
  }
  return check(worst < tol::cca_abs, "1000 instances, max |diff| " + fmt("%.2e", worst));
}

Outcome fbcca_synthetic() {
  SynthConfig cfg;
  cfg.snr_db = tol::fbcca_snr_db;
  cfg.seed = 7;
  std::size_t correct = 0, total = 0;
  for (double f : {12.0, 15.0}) {
    cfg.stimulus_hz = f;
    for (std::uint16_t trial = 0; trial < 20; ++trial) {
      const auto t = generate_trial(cfg, 1 + trial % 5, trial);
      for (std::size_t w = 0; w < 10; ++w) {
        correct += fbcca_classify(window_of(t, w * 125), FbccaConfig{}).stimulus_hz == f;
        ++total;
      }
    }
  }
  const double acc = static_cast<double>(correct) / static_cast<double>(total);

  // Pure noise with balanced true labels: accuracy should be a fair coin.
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n01;
  std::size_t hits = 0;
  const std::size_t n_noise = 1000;
  for (std::size_t i = 0; i < n_noise; ++i) {
    RowMatrix x(1, 125);
    for (auto& v : x.data) v = n01(rng);
    const double truth = i % 2 ? 15.0 : 12.0;
    hits += fbcca_classify(x, FbccaConfig{}).stimulus_hz == truth;
  }
  const double noise_acc = static_cast<double>(hits) / static_cast<double>(n_noise);
  const double half_width = tol::z99 * std::sqrt(0.25 / static_cast<double>(n_noise));
  const bool ok = total >= 400 && acc >= tol::fbcca_min_acc && std::abs(noise_acc - 0.5) <= half_width;
  return check(ok, fmt("%.2f", 100 * acc) + "% at 10 dB over " + std::to_string(total) +
                       " windows; noise " + fmt("%.1f", 100 * noise_acc) + "% (99% CI 50 +/- " +
                       fmt("%.1f", 100 * half_width) + ")");
}

Outcome gradient_checks() {
  std::string detail;
  bool ok = true;
  for (const auto& [name, spec] : testing::layer_check_specs()) {
    const auto x = testing::random_tensor(Shape{2, spec.in_channels, spec.in_rows, spec.in_cols}, 5);
    const auto r = testing::grad_check(spec, init_params(spec, 4), x, {}, name == "dropout");
    ok = ok && r.max_rel_err < tol::grad_rel;
    detail += name + " " + fmt("%.1e", r.max_rel_err) + ", ";
  }
  const auto tiny = NetworkSpec::tiny(6, 4);
  const auto r = testing::grad_check(tiny, init_params(tiny, 8),
                                     testing::random_tensor(Shape{3, 1, 6, 4}, 9), {0, 1, 0});
  ok = ok && r.max_rel_err < tol::grad_rel;
  detail += "tiny net " + fmt("%.1e", r.max_rel_err);
  return check(ok, detail);
}

Outcome overfit() {
  const auto spec = NetworkSpec::scaled();
  const auto data = testing::synth_images(64, spec, 0.0, 4);
  TrainConfig cfg;
  cfg.lr = 0.01;
  cfg.batch_size = 16;
  cfg.weight_decay = 0.0;
  cfg.max_epochs = tol::overfit_epochs;
  cfg.patience = 25;
  cfg.seed = 5;
  const auto res = train(spec, init_params(spec, 5), data, data, cfg);
  const auto pred = predict(spec, res.params, data.images);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) ok += pred[i] == data.labels[i];

  // Separable 24-D data for the SVM: labels from a fixed hyperplane with a margin.
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  std::vector<double> normal(24);
  for (auto& v : normal) v = n01(rng);
  SvmDataset svm_train_set, svm_val;
  for (int i = 0; i < 600; ++i) {
    std::vector<double> x(24);
    double dot = 0.0;
    for (std::size_t k = 0; k < 24; ++k) {
      x[k] = n01(rng);
      dot += x[k] * normal[k];
    }
    if (std::abs(dot) < 1.0) continue;
    auto& dst = i % 4 == 0 ? svm_val : svm_train_set;
    dst.x.push_back(std::move(x));
    dst.y.push_back(dot > 0 ? 1 : -1);
  }
  SvmTrainConfig scfg;
  scfg.reg_c = 1e-4;
  scfg.lr = 0.05;
  scfg.batch_size = 32;
  scfg.max_epochs = 2000;
  scfg.patience = 200;
  const auto svm = svm_train(svm_train_set, svm_val, scfg);
  std::size_t svm_ok = 0;
  for (std::size_t i = 0; i < svm_train_set.size(); ++i) {
    svm_ok += svm_predict(svm.model, svm_train_set.x[i]) == svm_train_set.y[i];
  }
  const bool good = ok == pred.size() && res.log.size() <= static_cast<std::size_t>(tol::overfit_epochs) &&
                    svm_ok == svm_train_set.size();
  return check(good, "CNN " + std::to_string(ok) + "/64 after " + std::to_string(res.log.size()) +
                         " epochs; SVM " + std::to_string(svm_ok) + "/" +
                         std::to_string(svm_train_set.size()));
}

Outcome freeze_transfer() {
  const auto target = NetworkSpec::scaled();
  auto source_spec = NetworkSpec::scaled();
  source_spec.layers[13] = LayerSpec::dense(48);
  const auto source = init_params(source_spec, 11);
  auto moved = replace_head(source, 12, target);
  set_prefix_frozen(moved.params, target, true);
  const auto data = testing::synth_images(32, target, 0.0, 6);
  TrainConfig cfg;
  cfg.lr = 0.01;
  cfg.max_epochs = 5;
  cfg.patience = 5;
  cfg.batch_size = 8;
  const auto res = train(target, moved.params, data, data, cfg);
  std::size_t prefix_tensors = 0;
  for (std::size_t i = 0; i < target.prefix_length(); ++i) {
    const auto p = layer_param_prefix(target, i);
    if (!p) continue;
    for (const char* suffix : {".weight", ".bias"}) {
      const auto& a = res.params.at(*p + suffix).data;
      const auto& b = source.at(*p + suffix).data;
      if (a.size() != b.size() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) != 0) {
        return fail(*p + suffix + " changed during frozen training");
      }
      ++prefix_tensors;
    }
  }
  if (res.params.at("dense2.weight") == moved.params.at("dense2.weight")) return fail("head did not train");

  const auto path = scratch_dir() / "params.ssvt";
  save_params(res.params, path);
  const auto back = load_params(path);
  for (const auto& [name, e] : res.params.tensors) {
    const auto& a = back.at(name).data;
    // Trained values are narrowed to f32 on disk; compare against that.
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] != static_cast<double>(static_cast<float>(e.value.data[i]))) return fail(name + " round-trip mismatch");
    }
  }
  const bool bytes_equal = encode_params(back) == encode_params(res.params);
  const auto fresh = init_params(target, 3);
  const bool exact = encode_params(decode_params(encode_params(fresh))) == encode_params(fresh) &&
                     decode_params(encode_params(fresh)).at("conv1.weight") == fresh.at("conv1.weight");
  return check(bytes_equal && exact, std::to_string(prefix_tensors) +
                                         " prefix tensors bit-identical; save/load bit-exact");
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

#ifdef SSVEP_CLI_PATH
int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + SSVEP_CLI_PATH + "\" " + args + " > \"" +
                          (scratch_dir() / "cli.log").string() + "\" 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}
#endif

Outcome determinism() {
#ifdef SSVEP_CLI_PATH
  const auto dir = scratch_dir();
  const auto store = (dir / "det.ssvb").string();
  if (run_cli("synth --out \"" + store + "\" --subjects 6 --snr-db -8 --seed 5") != 0) {
    return fail("synth failed: " + read_file(dir / "cli.log"));
  }
  std::ofstream(dir / "svm.json") << R"({"svm": {"max_epochs": 40, "patience": 10}})";
  std::ofstream(dir / "cnn.json")
      << R"({"cnn": {"network": "scaled", "max_epochs": 2, "patience": 2, "batch_size": 32}, "test_subjects": [1, 2, 3]})";
  std::string detail;
  for (const auto& [name, cfg, cls] :
       std::vector<std::tuple<std::string, std::string, std::string>>{{"svm", "svm.json", "svm"},
                                                                       {"cnn-scratch", "cnn.json", "cnn-scratch"},
                                                                       {"fbcca", "svm.json", "fbcca"}}) {
    std::string reference;
    for (const char* jobs : {"1", "1", "2", "4"}) {
      const auto report = dir / (name + "_" + jobs + ".csv");
      const int rc = run_cli("eval-loso --in \"" + store + "\" --config \"" + (dir / cfg).string() +
                             "\" --classifier " + cls + " --seed 17 --jobs " + jobs + " --report \"" +
                             report.string() + "\"");
      if (rc != 0) return fail(name + " eval-loso exited " + std::to_string(rc) + ": " + read_file(dir / "cli.log"));
      const auto bytes = read_file(report);
      if (bytes.empty()) return fail(name + " report empty");
      if (reference.empty()) {
        reference = bytes;
      } else if (bytes != reference) {
        return fail(name + " report differs at --jobs " + jobs);
      }
    }
    detail += name + ", ";
  }
  return pass(detail + "reports byte-identical for --jobs 1,1,2,4");
#else
  return skip("CLI not built");
#endif
}

Outcome report_granularity() {
  // One-decimal table entries: 91 of 120 windows reads as 75.8%.
  const double shown = std::round(1000.0 * 91.0 / 120.0) / 10.0;
  if (shown != 75.8) return fail("91/120 does not round to 75.8");

  const auto store = testing::synth_store(35, -14.0, 8);
  ExperimentConfig cfg;
  cfg.classifier = ClassifierKind::fbcca;
  cfg.preprocess = testing::synth_preprocess();
  cfg.jobs = 2;
  const auto report = run_experiment(store, cfg);
  std::set<std::size_t> distinct;
  for (const auto& s : report.subjects) {
    if (s.row.total != 120) return fail("subject " + std::to_string(s.subject_id) + " has " +
                                        std::to_string(s.row.total) + " test windows");
    const double k = s.row.accuracy * 120.0;
    if (std::abs(k - std::round(k)) > 1e-9) return fail("accuracy not a multiple of 1/120");
    distinct.insert(s.row.correct);
  }
  // The CSV shows 4 decimals; each entry must still decode to an integer count.
  std::istringstream csv(report_csv(report));
  std::string line;
  std::getline(csv, line);
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    if (line.rfind("mean", 0) == 0) continue;
    const auto a = line.find(',');
    const auto b = line.find(',', a + 1);
    const auto c = line.find(',', b + 1);
    const double pct = std::stod(line.substr(b + 1, c - b - 1));
    if (std::abs(pct * 1.2 - std::round(pct * 1.2)) > 1e-3) return fail("CSV accuracy " + line);
    ++rows;
  }
  return check(rows == 35, "35 subjects x 120 windows, " + std::to_string(distinct.size()) +
                               " distinct counts, mean " + fmt("%.1f", report.mean_accuracy_pct) + "%");
}

Outcome real_dataset() {
  const char* path = std::getenv("SSVEP_REAL_STORE");
  if (!path || !*path) return skip("set SSVEP_REAL_STORE to a converted 35-subject store");
  const auto store = load_store(path);
  ExperimentConfig cfg;
  cfg.classifier = ClassifierKind::fbcca;
  cfg.jobs = std::max(1u, std::thread::hardware_concurrency());
  cfg.fbcca_channels = single_electrode();
  const double oz = run_experiment(store, cfg).mean_accuracy_pct;
  cfg.fbcca_channels = nine_electrodes();
  const double nine = run_experiment(store, cfg).mean_accuracy_pct;
  const bool ok = std::abs(oz - tol::real_oz_pct) <= tol::real_pp && std::abs(nine - tol::real_nine_pct) <= tol::real_pp;
  return check(ok, "Oz " + fmt("%.1f", oz) + "% (77.1), 9 electrodes " + fmt("%.1f", nine) + "% (91.1)");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"window-count exactness", window_counts},
      {"dataset-size arithmetic", dataset_sizes},
      {"spectrogram geometry", geometry},
      {"CCA oracle equivalence", cca_oracle},
      {"FBCCA synthetic correctness", fbcca_synthetic},
      {"gradient checks", gradient_checks},
      {"overfit sanity", overfit},
      {"freeze/transfer mechanics", freeze_transfer},
      {"determinism across --jobs", determinism},
      {"report granularity", report_granularity},
      {"FBCCA real-dataset reproduction (optional)", real_dataset},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::skip ? "SKIP" : "FAIL";
    failures += o.status == Status::fail;
    std::cout << "[" << tag << "] " << name << ": " << o.detail << " (" << fmt("%.1f", secs) << " s)"
              << std::endl;
  }
  std::error_code ec;
  fs::remove_all(scratch_dir(), ec);
  std::cout << (failures ? "ACCEPTANCE FAILED" : "ACCEPTANCE PASSED") << std::endl;
  return failures ? 1 : 0;
}
