#include "evid/config.hpp"

#include "evid/io.hpp"
#include "evid/rng.hpp"

#include "json.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace evid {
namespace {

using nlohmann::json;

// Reads keys of one JSON object, rejecting any key nobody asked for.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + " must be an object");
  }
  ~Section() = default;

  template <typename T>
  void read(const char* key, T& target) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      target = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path_ + "." + key + " has the wrong type");
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      (void)value;
      if (!seen_.count(key)) throw ConfigError("unknown configuration key " + path_ + "." + key);
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<ChannelKind> channels_from(const std::vector<std::string>& names, const std::string& path) {
  std::vector<ChannelKind> out;
  for (const auto& n : names) {
    const auto kind = parse_channel(n);
    if (!kind) throw ConfigError(path + ": unknown channel '" + n + "'");
    out.push_back(*kind);
  }
  return out;
}

std::vector<std::string> channel_names(const std::vector<ChannelKind>& kinds) {
  std::vector<std::string> out;
  for (ChannelKind k : kinds) out.emplace_back(to_string(k));
  return out;
}

}  // namespace

void RunConfig::validate() const {
  try {
    if (class_counts.size() != 2) throw ConfigError("synth.counts needs one count per class (2 values)");
    for (int c : class_counts) {
      if (c < 0) throw ConfigError("synth.counts must be >= 0");
    }
    if (synth.num_streams < 1 || synth.num_samples < 4 || !(synth.sample_rate_hz > 0.0)) {
      throw ConfigError("synth needs streams >= 1, samples >= 4 and a positive sample rate");
    }
    if (synth.channels.empty()) throw ConfigError("synth.channels must not be empty");
    const auto& p = extraction.pencil;
    if (p.order_p < 1 || p.p_max < 1) throw ConfigError("pencil.p and pencil.p_max must be >= 1");
    if (p.pencil_L && *p.pencil_L < 1) throw ConfigError("pencil.L must be >= 1");
    if (!(p.error_threshold > 0.0)) throw ConfigError("pencil.error_threshold must be > 0");
    extraction.features.validate();
    if (selection.d_prime < 1 || selection.bootstraps_B_s < 1 || selection.knn_k < 1 ||
        !(selection.percentile > 0.0 && selection.percentile <= 100.0)) {
      throw ConfigError("selection needs d_prime, bootstraps, knn_k >= 1 and 0 < percentile <= 100");
    }
    if (selection.d_prime > static_cast<int>(extraction.features.dimension())) {
      throw ConfigError("selection.d_prime exceeds the feature dimension " +
                        std::to_string(extraction.features.dimension()));
    }
    if (!(learner.lr.l2_lambda >= 0.0) || learner.lr.max_iters < 1 || !(learner.lr.tol > 0.0)) {
      throw ConfigError("learner LR settings out of range");
    }
    if (!(learner.svm.C > 0.0) || learner.svm.max_iters < 1 || !(learner.svm.tol > 0.0) ||
        (learner.svm.gamma && !(*learner.svm.gamma > 0.0))) {
      throw ConfigError("learner SVM settings out of range");
    }
    if (bootstraps_B_c < 1) throw ConfigError("learner.bootstraps must be >= 1");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("learner.test_fraction must lie in (0, 1)");
    if (folds < 2) throw ConfigError("learner.folds must be >= 2");
    if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("learner.threshold must lie in (0, 1)");
    if (baseline.r < 1 || baseline.window_N < baseline.r) throw ConfigError("baseline needs 1 <= r <= window_N");
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
}

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  Section top(root, "config");
  top.read("seed", cfg.seed);

  if (const json* j = top.child("synth")) {
    Section s(*j, "synth");
    std::vector<std::string> channels = channel_names(cfg.synth.channels);
    s.read("counts", cfg.class_counts);
    s.read("streams", cfg.synth.num_streams);
    s.read("samples", cfg.synth.num_samples);
    s.read("sample_rate_hz", cfg.synth.sample_rate_hz);
    s.read("channels", channels);
    s.read("noise_free", cfg.noise_free);
    s.read("trend_free", cfg.trend_free);
    cfg.synth.channels = channels_from(channels, "synth.channels");
    s.finish();
  }
  if (const json* j = top.child("pencil")) {
    Section s(*j, "pencil");
    auto& p = cfg.extraction.pencil;
    s.read("p", p.order_p);
    if (const json* l = s.child("L"); l && !l->is_null()) {
      if (!l->is_number_integer()) throw ConfigError("pencil.L must be an integer or null");
      p.pencil_L = l->get<int>();
    }
    s.read("error_threshold", p.error_threshold);
    s.read("p_max", p.p_max);
    s.read("detrend", cfg.extraction.detrend);
    s.finish();
  }
  if (const json* j = top.child("features")) {
    Section s(*j, "features");
    auto& f = cfg.extraction.features;
    std::vector<std::string> channels = channel_names(f.channels);
    s.read("p_prime", f.p_prime);
    s.read("m_prime", f.m_prime);
    s.read("channels", channels);
    f.channels = channels_from(channels, "features.channels");
    s.finish();
  }
  if (const json* j = top.child("selection")) {
    Section s(*j, "selection");
    std::string measure(to_string(cfg.selection.measure));
    s.read("measure", measure);
    try {
      cfg.selection.measure = parse_measure(measure);
    } catch (const InvalidInput& e) {
      throw ConfigError(std::string("selection.measure: ") + e.what());
    }
    s.read("d_prime", cfg.selection.d_prime);
    s.read("bootstraps", cfg.selection.bootstraps_B_s);
    s.read("percentile", cfg.selection.percentile);
    s.read("knn_k", cfg.selection.knn_k);
    s.finish();
  }
  if (const json* j = top.child("learner")) {
    Section s(*j, "learner");
    std::string model(to_string(cfg.learner.kind));
    s.read("model", model);
    try {
      cfg.learner.kind = parse_model_kind(model);
    } catch (const InvalidInput& e) {
      throw ConfigError(std::string("learner.model: ") + e.what());
    }
    s.read("lambda", cfg.learner.lr.l2_lambda);
    s.read("lr_max_iters", cfg.learner.lr.max_iters);
    s.read("lr_tol", cfg.learner.lr.tol);
    s.read("C", cfg.learner.svm.C);
    if (const json* g = s.child("gamma")) {
      if (g->is_string() && g->get<std::string>() == "auto") {
        cfg.learner.svm.gamma.reset();
      } else if (g->is_number()) {
        cfg.learner.svm.gamma = g->get<double>();
      } else {
        throw ConfigError("learner.gamma must be a number or \"auto\"");
      }
    }
    s.read("svm_max_iters", cfg.learner.svm.max_iters);
    s.read("svm_tol", cfg.learner.svm.tol);
    s.read("bootstraps", cfg.bootstraps_B_c);
    s.read("test_fraction", cfg.test_fraction);
    s.read("folds", cfg.folds);
    s.read("threshold", cfg.threshold);
    s.finish();
  }
  if (const json* j = top.child("baseline")) {
    Section s(*j, "baseline");
    std::string aggregation(to_string(cfg.baseline.aggregation));
    s.read("r", cfg.baseline.r);
    s.read("window_N", cfg.baseline.window_N);
    s.read("aggregation", aggregation);
    s.read("detrend", cfg.baseline.detrend);
    try {
      cfg.baseline.aggregation = parse_aggregation(aggregation);
    } catch (const InvalidInput& e) {
      throw ConfigError(std::string("baseline.aggregation: ") + e.what());
    }
    s.finish();
  }
  top.finish();
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::string to_json(const RunConfig& cfg) {
  const auto& p = cfg.extraction.pencil;
  json gamma = cfg.learner.svm.gamma ? json(*cfg.learner.svm.gamma) : json("auto");
  json doc = {
      {"seed", cfg.seed},
      {"synth",
       {{"counts", cfg.class_counts},
        {"streams", cfg.synth.num_streams},
        {"samples", cfg.synth.num_samples},
        {"sample_rate_hz", cfg.synth.sample_rate_hz},
        {"channels", channel_names(cfg.synth.channels)},
        {"noise_free", cfg.noise_free},
        {"trend_free", cfg.trend_free}}},
      {"pencil",
       {{"p", p.order_p},
        {"L", p.pencil_L ? json(*p.pencil_L) : json(nullptr)},
        {"error_threshold", p.error_threshold},
        {"p_max", p.p_max},
        {"detrend", cfg.extraction.detrend}}},
      {"features",
       {{"p_prime", cfg.extraction.features.p_prime},
        {"m_prime", cfg.extraction.features.m_prime},
        {"channels", channel_names(cfg.extraction.features.channels)}}},
      {"selection",
       {{"measure", std::string(to_string(cfg.selection.measure))},
        {"d_prime", cfg.selection.d_prime},
        {"bootstraps", cfg.selection.bootstraps_B_s},
        {"percentile", cfg.selection.percentile},
        {"knn_k", cfg.selection.knn_k}}},
      {"learner",
       {{"model", std::string(to_string(cfg.learner.kind))},
        {"lambda", cfg.learner.lr.l2_lambda},
        {"lr_max_iters", cfg.learner.lr.max_iters},
        {"lr_tol", cfg.learner.lr.tol},
        {"C", cfg.learner.svm.C},
        {"gamma", gamma},
        {"svm_max_iters", cfg.learner.svm.max_iters},
        {"svm_tol", cfg.learner.svm.tol},
        {"bootstraps", cfg.bootstraps_B_c},
        {"test_fraction", cfg.test_fraction},
        {"folds", cfg.folds},
        {"threshold", cfg.threshold}}},
      {"baseline",
       {{"r", cfg.baseline.r},
        {"window_N", cfg.baseline.window_N},
        {"aggregation", std::string(to_string(cfg.baseline.aggregation))},
        {"detrend", cfg.baseline.detrend}}},
  };
  return doc.dump(2);
}

std::vector<ClassTemplate> corpus_templates(const RunConfig& cfg) {
  auto templates = default_templates();
  for (auto& t : templates) {
    if (cfg.noise_free) t.snr_db_min = t.snr_db_max = std::numeric_limits<double>::infinity();
    if (cfg.trend_free) {
      t.trend_slope_max = 0.0;
      t.operating_point = false;
    }
  }
  return templates;
}

std::string config_fingerprint(const RunConfig& cfg) { return fingerprint(to_json(cfg)); }

std::uint64_t stage_seed(const RunConfig& cfg, SeedStream stream) noexcept {
  return derive_seed(cfg.seed, static_cast<std::uint64_t>(stream));
}

}  // namespace evid
