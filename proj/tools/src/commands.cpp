#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>

#include "run_config.hpp"
#include "ssvep/augment.hpp"
#include "ssvep/error.hpp"
#include "ssvep/image_io.hpp"
#include "ssvep/store_io.hpp"
#include "ssvep/tensor_io.hpp"

namespace ssvep::cli {
namespace {

// Flags shared by every subcommand. Unset flags leave the config file (or
// the defaults) untouched.
struct Common {
  std::optional<std::string> config;
  bool print_config = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> in;

  void attach(CLI::App* cmd, const char* in_help) {
    cmd->add_option("--config", config, "JSON run configuration");
    cmd->add_flag("--print-config", print_config, "Print the resolved configuration and exit");
    cmd->add_option("--seed", seed, "Global seed (falls back to SSVEP_BENCH_SEED, then 0)");
    if (in_help) cmd->add_option("--in", in, in_help);
  }

  RunConfig load() const {
    RunConfig cfg = config ? load_run_config(*config) : RunConfig{};
    if (seed) cfg.seed = *seed;
    if (in) cfg.store = *in;
    return cfg;
  }
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

CarMode parse_car_flag(const std::string& s) {
  if (s == "auto") return CarMode::automatic;
  if (s == "on") return CarMode::on;
  if (s == "off") return CarMode::off;
  throw ConfigError("--car must be auto, on or off");
}

TrialStore require_store(const RunConfig& cfg) {
  if (!cfg.store) throw ConfigError("no input store: pass --in or set \"store\" in the config");
  return load_store(*cfg.store);
}

std::uint16_t default_subject(const TrialStore& store) {
  if (store.trials.empty()) throw DataError("store has no trials");
  std::uint16_t s = store.trials.front().subject_id;
  for (const auto& t : store.trials) s = std::min(s, t.subject_id);
  return s;
}

void print_row(std::ostream& out, const SubjectResult& r) {
  out << "subject " << r.subject_id << ": accuracy " << std::fixed << std::setprecision(2)
      << 100.0 * r.row.accuracy << "% (" << r.row.correct << "/" << r.row.total << "), macro F1 "
      << std::setprecision(4) << r.row.f1_macro << "\n";
  out.unsetf(std::ios::floatfield);
}

int exit_code(const Error& e) {
  switch (e.category()) {
    case Error::Category::config: return 1;
    case Error::Category::data: return 2;
    case Error::Category::numeric: return 3;
  }
  return 2;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"SSVEP classification pipeline: synthetic data, spectrograms, FBCCA, SVM, CNN"};
  app.name("ssvep");
  app.require_subcommand(1);

  // synth
  Common synth_c;
  std::string synth_out;
  std::optional<int> synth_subjects, synth_trials, synth_harmonics;
  std::optional<double> synth_snr;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic trial store");
  synth_c.attach(synth, nullptr);
  synth->add_option("--out", synth_out, "Output .ssvb store");
  synth->add_option("--subjects", synth_subjects, "Number of subjects");
  synth->add_option("--trials", synth_trials, "Trials per subject and frequency");
  synth->add_option("--snr-db", synth_snr, "Signal-to-noise ratio in dB (inf: noiseless)");
  synth->add_option("--harmonics", synth_harmonics, "Number of stimulus harmonics");

  // preprocess
  Common pre_c;
  std::string pre_out;
  std::optional<std::string> pre_disp, pre_car, pre_channel;
  auto* pre = app.add_subcommand("preprocess", "Slice, STFT and band-select a store into 8x3 images");
  pre_c.attach(pre, "Input .ssvb store");
  pre->add_option("--displacement", pre_disp, "Window displacement, e.g. 0.5s or 0.1s");
  pre->add_option("--car", pre_car, "Common average reference: auto|on|off");
  pre->add_option("--channel", pre_channel, "Channel to image");
  pre->add_option("--out", pre_out, "Output image set");

  // augment
  Common aug_c;
  std::optional<std::string> aug_mode;
  std::string aug_out;
  auto* aug = app.add_subcommand("augment", "Expand an image set with enumerated masks");
  aug_c.attach(aug, "Input image set");
  aug->add_option("--mode", aug_mode, "none|time|freq|full");
  aug->add_option("--out", aug_out, "Output image set");

  // train
  Common train_c;
  std::optional<std::string> train_classifier;
  std::optional<std::uint16_t> train_subject;
  std::string train_params_out, train_log;
  auto* trn = app.add_subcommand("train", "Train one classifier with one subject held out");
  train_c.attach(trn, "Input .ssvb store");
  trn->add_option("--classifier", train_classifier, "svm|cnn|cnn-scratch");
  trn->add_option("--test-subject", train_subject, "Held-out subject (default: lowest id)");
  trn->add_option("--out", train_params_out, "Output parameter file (.ssvt)");
  trn->add_option("--log", train_log, "Per-epoch CSV log");

  // eval-loso
  Common eval_c;
  std::optional<std::string> eval_classifier;
  std::optional<unsigned> eval_jobs;
  std::string eval_report;
  std::optional<std::string> eval_subjects;
  auto* eval = app.add_subcommand("eval-loso", "Leave-one-subject-out evaluation");
  eval_c.attach(eval, "Input .ssvb store");
  eval->add_option("--classifier", eval_classifier, "fbcca|svm|cnn|cnn-scratch|majority");
  eval->add_option("--jobs", eval_jobs, "Subjects evaluated in parallel");
  eval->add_option("--report", eval_report, "Per-subject CSV report");
  eval->add_option("--subjects", eval_subjects, "Comma-separated test subjects (default: all)");

  // fbcca
  Common fb_c;
  std::optional<std::string> fb_channels, fb_subjects;
  std::optional<unsigned> fb_jobs;
  std::string fb_report;
  auto* fb = app.add_subcommand("fbcca", "FBCCA evaluation on raw windows");
  fb_c.attach(fb, "Input .ssvb store");
  fb->add_option("--channels", fb_channels, "Comma-separated channels, e.g. Oz or the 9-electrode set");
  fb->add_option("--jobs", fb_jobs, "Subjects evaluated in parallel");
  fb->add_option("--report", fb_report, "Per-subject CSV report");
  fb->add_option("--subjects", fb_subjects, "Comma-separated test subjects (default: all)");

  // inspect
  Common ins_c;
  std::size_t ins_index = 0;
  std::string ins_pgm;
  auto* ins = app.add_subcommand("inspect", "Show one image of an image set, optionally as PGM");
  ins_c.attach(ins, "Input image set");
  ins->add_option("--image", ins_index, "Image index");
  ins->add_option("--pgm", ins_pgm, "Write the image as binary PGM");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "ssvep: " << e.what() << "\n";
    return 1;
  }

  auto subjects_of = [](const std::string& list) {
    std::vector<std::uint16_t> ids;
    for (const auto& s : split_list(list)) {
      try {
        const auto v = std::stoul(s);
        if (v == 0 || v > 65535) throw std::out_of_range(s);
        ids.push_back(static_cast<std::uint16_t>(v));
      } catch (const std::exception&) {
        throw ConfigError("invalid subject id \"" + s + "\"");
      }
    }
    return ids;
  };

  auto print_config = [&](const RunConfig& cfg) {
    out << to_json(cfg).dump(2) << "\n";
    return 0;
  };

  try {
    if (synth->parsed()) {
      RunConfig cfg = synth_c.load();
      if (synth_subjects) cfg.synth.n_subjects = *synth_subjects;
      if (synth_trials) cfg.synth.trials_per_frequency = *synth_trials;
      if (synth_snr) cfg.synth.base.snr_db = *synth_snr;
      if (synth_harmonics) cfg.synth.base.n_harmonics = *synth_harmonics;
      if (synth_c.print_config) return print_config(cfg);
      if (synth_out.empty()) throw ConfigError("synth needs --out");
      SynthStoreSpec spec = cfg.synth;
      spec.stimulus_hz = cfg.stimulus_hz;
      spec.base.seed = resolve_seed(cfg);
      const auto store = generate_store(spec);
      save_store(store, synth_out);
      out << store.trials.size() << " trials\n";
      return 0;
    }

    if (pre->parsed()) {
      RunConfig cfg = pre_c.load();
      if (pre_disp) cfg.displacement_s = parse_duration(*pre_disp);
      if (pre_car) cfg.car = parse_car_flag(*pre_car);
      if (pre_channel) cfg.channel = *pre_channel;
      if (pre_c.print_config) return print_config(cfg);
      const auto store = require_store(cfg);
      const auto images = store_to_images(store, resolve_preprocess(cfg, store), LabelMap(cfg.stimulus_hz));
      if (!pre_out.empty()) save_images(images, pre_out);
      out << images.size() << " images\n";
      return 0;
    }

    if (aug->parsed()) {
      RunConfig cfg = aug_c.load();
      if (aug_mode) cfg.augment = parse_augment_mode(*aug_mode);
      if (aug_c.print_config) return print_config(cfg);
      if (!aug_c.in) throw ConfigError("augment needs --in <image set>");
      const auto expanded = expand_dataset(load_images(*aug_c.in), cfg.augment);
      if (!aug_out.empty()) save_images(expanded, aug_out);
      out << expanded.size() << "\n";
      return 0;
    }

    if (trn->parsed()) {
      RunConfig cfg = train_c.load();
      if (train_classifier) cfg.classifier = *train_classifier;
      if (train_c.print_config) return print_config(cfg);
      const auto kind = parse_classifier(cfg.classifier);
      if (kind == ClassifierKind::fbcca || kind == ClassifierKind::majority) {
        throw ConfigError("train supports svm, cnn and cnn-scratch; use eval-loso for " +
                          cfg.classifier);
      }
      const auto store = require_store(cfg);
      const auto exp = resolve_experiment(cfg, store);
      const auto subject = train_subject.value_or(default_subject(store));
      const auto trained = run_subject(store, exp, subject);
      print_row(out, trained.result);
      if (!train_params_out.empty()) {
        if (trained.svm) save_params(svm_to_params(*trained.svm), train_params_out);
        if (trained.params) save_params(*trained.params, train_params_out);
      }
      if (!train_log.empty()) write_log_csv(trained.result.log, train_log);
      return 0;
    }

    if (eval->parsed() || fb->parsed()) {
      const bool is_fb = fb->parsed();
      RunConfig cfg = is_fb ? fb_c.load() : eval_c.load();
      if (is_fb) {
        cfg.classifier = "fbcca";
        if (fb_channels) cfg.fbcca_channels = split_list(*fb_channels);
        if (fb_jobs) cfg.jobs = *fb_jobs;
        if (fb_subjects) cfg.test_subjects = subjects_of(*fb_subjects);
      } else {
        if (eval_classifier) cfg.classifier = *eval_classifier;
        if (eval_jobs) cfg.jobs = *eval_jobs;
        if (eval_subjects) cfg.test_subjects = subjects_of(*eval_subjects);
      }
      parse_classifier(cfg.classifier);
      if (cfg.jobs == 0) throw ConfigError("--jobs must be at least 1");
      if ((is_fb ? fb_c : eval_c).print_config) return print_config(cfg);
      const auto store = require_store(cfg);
      const auto report = run_experiment(store, resolve_experiment(cfg, store));
      const std::string& path = is_fb ? fb_report : eval_report;
      if (!path.empty()) write_report_csv(report, path);
      out << format_summary(report);
      return 0;
    }

    if (ins->parsed()) {
      RunConfig cfg = ins_c.load();
      if (ins_c.print_config) return print_config(cfg);
      if (!ins_c.in) throw ConfigError("inspect needs --in <image set>");
      const auto images = load_images(*ins_c.in);
      if (ins_index >= images.size()) {
        throw ConfigError("--image " + std::to_string(ins_index) + " out of range (set holds " +
                          std::to_string(images.size()) + " images)");
      }
      const auto& im = images[ins_index];
      out << "image " << ins_index << ": subject " << im.source.subject_id << ", "
          << im.source.stimulus_hz << " Hz, trial " << im.source.trial_index << ", start sample "
          << im.source.start_sample << ", label " << im.label << ", " << im.image.rows << "x"
          << im.image.cols;
      if (im.variant.time_col) out << ", time mask " << *im.variant.time_col;
      if (im.variant.freq_row) out << ", freq mask " << *im.variant.freq_row;
      out << "\n";
      for (std::size_t r = 0; r < im.image.rows; ++r) {
        out << std::setw(6) << im.image.row_freqs_hz[r] << " Hz |";
        for (std::size_t c = 0; c < im.image.cols; ++c) {
          out << " " << std::fixed << std::setprecision(3) << im.image.at(r, c);
        }
        out.unsetf(std::ios::floatfield);
        out << "\n";
      }
      if (!ins_pgm.empty()) write_pgm(im.image, ins_pgm);
      return 0;
    }
  } catch (const Error& e) {
    err << "ssvep: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::bad_alloc&) {
    err << "ssvep: out of memory\n";
    return 2;
  } catch (const std::exception& e) {
    err << "ssvep: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace ssvep::cli
