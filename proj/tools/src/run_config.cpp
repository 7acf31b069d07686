#include "run_config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>

#include "ssvep/error.hpp"

namespace ssvep::cli {
namespace {

using nlohmann::json;

// Walks one JSON object, remembering which keys were read so the rest can be
// reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(where() + " must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(key_path(key) + ": " + e.what());
    }
  }

  template <typename T>
  void read_optional(const char* key, std::optional<T>& out) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) return;
    if (it->is_null()) {
      out.reset();
      return;
    }
    T value{};
    read(key, value);
    out = value;
  }

  std::optional<ObjectReader> child(const char* key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) return std::nullopt;
    return ObjectReader(*it, key_path(key));
  }

  std::string where() const { return path_.empty() ? "config" : path_; }
  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError("unknown key " + key_path(it.key()));
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

const char* to_string(CarMode m) {
  switch (m) {
    case CarMode::automatic: return "auto";
    case CarMode::on: return "on";
    case CarMode::off: return "off";
  }
  return "auto";
}

CarMode parse_car(const json& v) {
  if (v.is_boolean()) return v.get<bool>() ? CarMode::on : CarMode::off;
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "auto") return CarMode::automatic;
    if (s == "on") return CarMode::on;
    if (s == "off") return CarMode::off;
  }
  throw ConfigError("preprocess.car must be true, false, \"on\", \"off\" or \"auto\"");
}

const char* to_string(WindowFn fn) {
  switch (fn) {
    case WindowFn::rectangular: return "rectangular";
    case WindowFn::hann: return "hann";
    case WindowFn::blackman: return "blackman";
  }
  return "rectangular";
}

WindowFn parse_window_fn(const std::string& s) {
  if (s == "rectangular") return WindowFn::rectangular;
  if (s == "hann") return WindowFn::hann;
  if (s == "blackman") return WindowFn::blackman;
  throw ConfigError("unknown STFT window \"" + s + "\" (rectangular|hann|blackman)");
}

NormalizeStage parse_stage(const std::string& s) {
  if (s == "before_band_select") return NormalizeStage::before_band_select;
  if (s == "after_band_select") return NormalizeStage::after_band_select;
  throw ConfigError("unknown normalize_stage \"" + s + "\"");
}

const char* to_string(NormalizeStage s) {
  return s == NormalizeStage::before_band_select ? "before_band_select" : "after_band_select";
}

std::vector<std::array<double, 2>> pairs_of(const BandSpec& b) {
  std::vector<std::array<double, 2>> out;
  for (const auto& band : b.bands) out.push_back({band.lo_hz, band.hi_hz});
  return out;
}

}  // namespace

RunConfig parse_run_config(const json& doc) {
  RunConfig cfg;
  ObjectReader root(doc, "");
  std::optional<std::string> store;
  root.read_optional("store", store);
  if (store) cfg.store = *store;
  root.read("classifier", cfg.classifier);
  root.read("stimulus_hz", cfg.stimulus_hz);
  root.read_optional("seed", cfg.seed);
  root.read("jobs", cfg.jobs);
  root.read("test_subjects", cfg.test_subjects);

  if (auto split = root.child("split")) {
    split->read("train_fraction", cfg.train_fraction);
    split->read("val_fraction", cfg.val_fraction);
    split->finish();
  }

  if (auto pre = root.child("preprocess")) {
    json car;
    pre->read("car", car);
    if (!car.is_null()) cfg.car = parse_car(car);
    pre->read("channel", cfg.channel);
    pre->read("window_s", cfg.window_s);
    pre->read("displacement_s", cfg.displacement_s);
    if (auto stft = pre->child("stft")) {
      std::string fn = to_string(cfg.stft.window_fn);
      stft->read("window_len", cfg.stft.fft_window_len);
      stft->read("hop", cfg.stft.hop);
      stft->read("window_fn", fn);
      stft->read("db_floor_eps", cfg.stft.db_floor_eps);
      stft->finish();
      cfg.stft.window_fn = parse_window_fn(fn);
    }
    std::vector<std::array<double, 2>> bands = pairs_of(cfg.bands);
    pre->read("bands_hz", bands);
    cfg.bands.bands.clear();
    for (const auto& b : bands) cfg.bands.bands.push_back(FrequencyBand{b[0], b[1]});
    std::string stage = to_string(cfg.normalize_stage);
    pre->read("normalize_stage", stage);
    cfg.normalize_stage = parse_stage(stage);
    pre->finish();
  }

  std::string augment = to_string(cfg.augment);
  root.read("augment", augment);
  cfg.augment = parse_augment_mode(augment);

  if (auto fb = root.child("fbcca")) {
    fb->read("n_subbands", cfg.fbcca.n_subbands);
    fb->read("weight_a", cfg.fbcca.weight_a);
    fb->read("weight_b", cfg.fbcca.weight_b);
    fb->read("n_harmonics", cfg.fbcca.n_harmonics);
    std::vector<std::array<double, 2>> edges;
    fb->read("subband_edges_hz", edges);
    for (const auto& e : edges) cfg.fbcca.subband_edges_hz.push_back(Passband{e[0], e[1]});
    fb->read("channels", cfg.fbcca_channels);
    fb->finish();
  }

  if (auto svm = root.child("svm")) {
    svm->read("lr", cfg.svm.lr);
    svm->read("momentum", cfg.svm.momentum);
    svm->read("reg_c", cfg.svm.reg_c);
    svm->read("batch_size", cfg.svm.batch_size);
    svm->read("patience", cfg.svm.patience);
    svm->read("max_epochs", cfg.svm.max_epochs);
    svm->finish();
  }

  if (auto cnn = root.child("cnn")) {
    cnn->read("lr", cfg.cnn.lr);
    cnn->read("momentum", cfg.cnn.momentum);
    cnn->read("weight_decay", cfg.cnn.weight_decay);
    cnn->read("batch_size", cfg.cnn.batch_size);
    cnn->read_optional("patience", cfg.cnn_patience);
    cnn->read_optional("max_epochs", cfg.cnn_max_epochs);
    cnn->read("network", cfg.network);
    std::optional<std::string> pretrained;
    cnn->read_optional("pretrained", pretrained);
    if (pretrained) cfg.pretrained = *pretrained;
    cnn->read("freeze_prefix", cfg.freeze_prefix);
    cnn->finish();
  }

  if (auto synth = root.child("synth")) {
    synth->read("subjects", cfg.synth.n_subjects);
    synth->read("trials_per_frequency", cfg.synth.trials_per_frequency);
    synth->read("snr_db", cfg.synth.base.snr_db);
    synth->read("n_harmonics", cfg.synth.base.n_harmonics);
    synth->read("amplitude_decay", cfg.synth.base.amplitude_decay);
    synth->read("duration_s", cfg.synth.base.duration_s);
    synth->read("sample_rate_hz", cfg.synth.base.sample_rate_hz);
    synth->finish();
  }
  root.finish();

  parse_classifier(cfg.classifier);
  resolve_network(cfg.network);
  if (cfg.jobs == 0) throw ConfigError("jobs must be at least 1");
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_run_config(doc);
}

json to_json(const RunConfig& cfg) {
  json j;
  j["store"] = cfg.store ? json(cfg.store->string()) : json(nullptr);
  j["classifier"] = cfg.classifier;
  j["stimulus_hz"] = cfg.stimulus_hz;
  j["seed"] = resolve_seed(cfg);
  j["jobs"] = cfg.jobs;
  j["test_subjects"] = cfg.test_subjects;
  j["split"] = {{"train_fraction", cfg.train_fraction}, {"val_fraction", cfg.val_fraction}};
  j["preprocess"] = {
      {"car", to_string(cfg.car)},
      {"channel", cfg.channel},
      {"window_s", cfg.window_s},
      {"displacement_s", cfg.displacement_s},
      {"stft",
       {{"window_len", cfg.stft.fft_window_len},
        {"hop", cfg.stft.hop},
        {"window_fn", to_string(cfg.stft.window_fn)},
        {"db_floor_eps", cfg.stft.db_floor_eps}}},
      {"bands_hz", pairs_of(cfg.bands)},
      {"normalize_stage", to_string(cfg.normalize_stage)},
  };
  j["augment"] = to_string(cfg.augment);
  std::vector<std::array<double, 2>> edges;
  for (const auto& p : cfg.fbcca.subbands()) edges.push_back({p.lo_hz, p.hi_hz});
  j["fbcca"] = {{"n_subbands", cfg.fbcca.n_subbands}, {"weight_a", cfg.fbcca.weight_a},
                {"weight_b", cfg.fbcca.weight_b},     {"n_harmonics", cfg.fbcca.n_harmonics},
                {"subband_edges_hz", edges},          {"channels", cfg.fbcca_channels}};
  j["svm"] = {{"lr", cfg.svm.lr},
              {"momentum", cfg.svm.momentum},
              {"reg_c", cfg.svm.reg_c},
              {"batch_size", cfg.svm.batch_size},
              {"patience", cfg.svm.patience},
              {"max_epochs", cfg.svm.max_epochs}};
  j["cnn"] = {{"lr", cfg.cnn.lr},
              {"momentum", cfg.cnn.momentum},
              {"weight_decay", cfg.cnn.weight_decay},
              {"batch_size", cfg.cnn.batch_size},
              {"patience", cfg.cnn_patience ? json(*cfg.cnn_patience) : json(nullptr)},
              {"max_epochs", cfg.cnn_max_epochs ? json(*cfg.cnn_max_epochs) : json(nullptr)},
              {"network", cfg.network},
              {"pretrained", cfg.pretrained ? json(cfg.pretrained->string()) : json(nullptr)},
              {"freeze_prefix", cfg.freeze_prefix}};
  j["synth"] = {{"subjects", cfg.synth.n_subjects},
                {"trials_per_frequency", cfg.synth.trials_per_frequency},
                {"snr_db", cfg.synth.base.snr_db},
                {"n_harmonics", cfg.synth.base.n_harmonics},
                {"amplitude_decay", cfg.synth.base.amplitude_decay},
                {"duration_s", cfg.synth.base.duration_s},
                {"sample_rate_hz", cfg.synth.base.sample_rate_hz}};
  return j;
}

std::uint64_t resolve_seed(const RunConfig& cfg) {
  if (cfg.seed) return *cfg.seed;
  if (const char* env = std::getenv("SSVEP_BENCH_SEED"); env && *env) {
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 10);
    if (*end != '\0') throw ConfigError("SSVEP_BENCH_SEED must be an unsigned integer");
    return v;
  }
  return 0;
}

NetworkSpec resolve_network(const std::string& name) {
  if (name == "full") return NetworkSpec::full();
  if (name == "vggish") return NetworkSpec::vggish();
  if (name == "scaled") return NetworkSpec::scaled();
  if (name == "tiny") return NetworkSpec::tiny(24, 16);
  throw ConfigError("unknown network \"" + name + "\" (full|vggish|scaled|tiny)");
}

std::size_t seconds_to_samples(double seconds, double sample_rate_hz, const char* what) {
  const double n = seconds * sample_rate_hz;
  const double rounded = std::round(n);
  if (!(rounded >= 1.0) || std::abs(n - rounded) > 1e-6) {
    throw ConfigError(std::string(what) + " of " + std::to_string(seconds) +
                      " s is not a whole number of samples at " + std::to_string(sample_rate_hz) +
                      " Hz");
  }
  return static_cast<std::size_t>(rounded);
}

double parse_duration(const std::string& text) {
  std::string body = text;
  if (!body.empty() && body.back() == 's') body.pop_back();
  try {
    std::size_t used = 0;
    const double v = std::stod(body, &used);
    if (used == body.size() && v > 0.0) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("invalid duration \"" + text + "\" (expected e.g. 0.5s)");
}

PreprocessConfig resolve_preprocess(const RunConfig& cfg, const TrialStore& store) {
  PreprocessConfig p;
  switch (cfg.car) {
    case CarMode::automatic: p.car = store.channels.size() > 1; break;
    case CarMode::on: p.car = true; break;
    case CarMode::off: p.car = false; break;
  }
  p.channel = cfg.channel;
  p.window.window_len_samples = seconds_to_samples(cfg.window_s, store.sample_rate_hz, "window");
  p.window.displacement_samples =
      seconds_to_samples(cfg.displacement_s, store.sample_rate_hz, "displacement");
  p.stft = cfg.stft;
  p.bands = cfg.bands;
  p.normalize_stage = cfg.normalize_stage;
  return p;
}

ExperimentConfig resolve_experiment(const RunConfig& cfg, const TrialStore& store) {
  ExperimentConfig e;
  e.classifier = parse_classifier(cfg.classifier);
  e.stimulus_hz = cfg.stimulus_hz;
  e.preprocess = resolve_preprocess(cfg, store);
  e.augment = cfg.augment;
  e.fbcca = cfg.fbcca;
  e.fbcca.candidate_freqs_hz = cfg.stimulus_hz;
  e.fbcca.sample_rate_hz = store.sample_rate_hz;
  e.fbcca_channels = cfg.fbcca_channels;
  e.svm = cfg.svm;
  e.cnn = cfg.cnn;
  e.cnn_patience = cfg.cnn_patience;
  e.cnn_max_epochs = cfg.cnn_max_epochs;
  e.network = resolve_network(cfg.network);
  e.pretrained_params = cfg.pretrained;
  e.freeze_prefix = cfg.freeze_prefix;
  e.test_subjects = cfg.test_subjects;
  e.train_fraction = cfg.train_fraction;
  e.val_fraction = cfg.val_fraction;
  e.seed = resolve_seed(cfg);
  e.jobs = cfg.jobs;
  return e;
}

}  // namespace ssvep::cli
