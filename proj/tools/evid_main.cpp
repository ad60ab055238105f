// evid: command-line front end for the event identification pipeline.
//
//   evid synth     --out DIR                       synthetic corpus + manifest
//   evid decompose --events DIR --out FILE         modal decompositions + diagnostics
//   evid features  --decomp FILE --out-dir DIR     feature rows, stratified train/test split
//   evid select    --train FILE --out FILE         bootstrapped filter selection report
//   evid train     --train FILE --selection FILE --out FILE
//   evid eval      --train FILE --test FILE --selection FILE --out FILE
//   evid kfold     --features FILE --out FILE      k-fold confusion of the pipeline
//   evid baseline  --events DIR --out FILE         k-fold confusion of the subspace baseline
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include "evid/baseline.hpp"
#include "evid/config.hpp"
#include "evid/io.hpp"
#include "evid/learn.hpp"
#include "evid/pipeline.hpp"
#include "evid/select.hpp"
#include "evid/synth.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace evid;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
};

RunConfig load_config(const CommonOptions& common) {
  RunConfig cfg = common.config_path.empty() ? RunConfig{} : load_run_config(common.config_path);
  if (common.seed) cfg.seed = *common.seed;
  return cfg;
}

void add_common(CLI::App* cmd, CommonOptions& common) {
  cmd->add_option("--config", common.config_path, "JSON run configuration");
  cmd->add_option("--seed", common.seed, "master seed (overrides the configuration)");
}

std::ifstream open_input(const std::string& path) {
  if (!fs::is_regular_file(path)) throw UsageError("input file not found: " + path);
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path);
  return in;
}

void require_dir(const std::string& path) {
  if (!fs::is_directory(path)) throw UsageError("directory not found: " + path);
}

// Writes to a temporary sibling and renames, so a failed run leaves no partial file.
template <typename Fn>
void write_file(const fs::path& path, Fn&& fn) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    fn(out);
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + path.string());
  }
  fs::rename(tmp, path);
}

Dataset read_features(const std::string& path) {
  auto in = open_input(path);
  return read_feature_csv(in);
}

// Selected column indices, checked against the feature file's schema by name.
std::vector<std::size_t> read_selection(const std::string& path, const Dataset& data) {
  auto in = open_input(path);
  const SelectionFile sel = read_score_table(in);
  const auto& names = data.feature_names();
  for (std::size_t k = 0; k < sel.selected.size(); ++k) {
    const std::size_t j = sel.selected[k];
    if (j >= names.size() || names[j] != sel.selected_names[k]) {
      throw InvalidInput("selected column '" + sel.selected_names[k] + "' (index " + std::to_string(j) +
                         ") is not in the feature file at that position");
    }
  }
  return sel.selected;
}

// -- synth -------------------------------------------------------------------

struct SynthOptions {
  std::string out_dir;
  std::vector<int> counts;
  std::optional<int> streams;
  std::optional<int> samples;
};

int run_synth(const CommonOptions& common, const SynthOptions& opt) {
  RunConfig cfg = load_config(common);
  if (!opt.counts.empty()) cfg.class_counts = opt.counts;
  if (opt.streams) cfg.synth.num_streams = *opt.streams;
  if (opt.samples) cfg.synth.num_samples = *opt.samples;
  cfg.validate();

  const fs::path dir(opt.out_dir);
  fs::create_directories(dir / "events");
  const auto corpus =
      generate_corpus(corpus_templates(cfg), cfg.class_counts, cfg.synth, stage_seed(cfg, SeedStream::Synth));
  std::vector<ManifestEntry> manifest;
  for (const auto& ev : corpus) {
    const std::string rel = "events/" + ev.event_id + ".csv";
    write_file(dir / rel, [&](std::ostream& out) { write_event_csv(out, ev); });
    manifest.push_back({ev.event_id, rel, ev.label, ev.sample_rate_hz});
  }
  write_file(dir / "manifest.csv", [&](std::ostream& out) { write_manifest(out, manifest); });
  write_file(dir / "config.json", [&](std::ostream& out) { out << to_json(cfg) << '\n'; });
  std::cerr << "wrote " << corpus.size() << " events to " << dir.string() << '\n';
  return 0;
}

// -- decompose ---------------------------------------------------------------

struct DecomposeOptions {
  std::string events_dir;
  std::string out;
  std::string report;
  std::optional<int> p;
  std::optional<int> L;
  std::optional<int> p_max;
  std::optional<bool> detrend;
};

int run_decompose(const CommonOptions& common, const DecomposeOptions& opt) {
  RunConfig cfg = load_config(common);
  auto& pencil = cfg.extraction.pencil;
  if (opt.p) pencil.order_p = *opt.p;
  if (opt.L) pencil.pencil_L = *opt.L;
  if (opt.p_max) pencil.p_max = *opt.p_max;
  if (opt.detrend) cfg.extraction.detrend = *opt.detrend;
  cfg.validate();
  require_dir(opt.events_dir);

  const auto events = load_event_dir(opt.events_dir);
  const std::string fp = config_fingerprint(cfg);
  std::vector<EventDecomposition> store;
  std::ostringstream report;
  report << "# evid-diagnostics v1 config=" << fp << '\n';
  report << "event_id,channel,p,L,E_p,min_E_i,mean_E_i,max_E_i,low_confidence,underdetermined";
  for (int p = 1; p <= pencil.p_max; ++p) report << ",E_p_" << p;
  report << '\n';

  for (const auto& ev : events) {
    const auto analyses = analyze_event(ev, cfg.extraction);
    EventDecomposition item{ev.event_id, ev.label, {}};
    for (const auto& [kind, a] : analyses) {
      const auto& d = a.decomposition;
      const auto& e = d.reconstruction_errors;
      const double lo = e.empty() ? 0.0 : *std::min_element(e.begin(), e.end());
      const double hi = e.empty() ? 0.0 : *std::max_element(e.begin(), e.end());
      const double mean = e.empty() ? 0.0 : std::accumulate(e.begin(), e.end(), 0.0) / static_cast<double>(e.size());
      report << ev.event_id << ',' << to_string(kind) << ',' << d.pencil_order_p << ',' << d.pencil_L << ','
             << format_double(d.rank_error_E_p) << ',' << format_double(lo) << ',' << format_double(mean) << ','
             << format_double(hi) << ',' << d.low_confidence << ',' << d.underdetermined;
      for (double v : a.diagnostics.E_p_curve) report << ',' << format_double(v);
      report << '\n';
      item.channels.emplace(kind, d);
    }
    store.push_back(std::move(item));
  }
  write_file(opt.out, [&](std::ostream& out) { write_decompositions(out, store, fp); });
  const std::string report_path = opt.report.empty() ? opt.out + ".diagnostics.csv" : opt.report;
  write_file(report_path, [&](std::ostream& out) { out << report.str(); });
  std::cerr << "decomposed " << events.size() << " events\n";
  return 0;
}

// -- features ----------------------------------------------------------------

struct FeaturesOptions {
  std::string decomp;
  std::string out_dir;
  std::optional<double> test_fraction;
};

int run_features(const CommonOptions& common, const FeaturesOptions& opt) {
  RunConfig cfg = load_config(common);
  if (opt.test_fraction) cfg.test_fraction = *opt.test_fraction;
  cfg.validate();
  auto in = open_input(opt.decomp);
  const auto store = read_decompositions(in);
  if (store.empty()) throw InvalidInput("decomposition store holds no events");

  Dataset all;
  for (const auto& item : store) {
    EventRecord ev;
    ev.event_id = item.event_id;
    ev.label = item.label;
    all.add(build_feature_vector(ev, item.channels, cfg.extraction.features));
  }
  const auto test_count = static_cast<std::size_t>(std::lround(cfg.test_fraction * static_cast<double>(all.size())));
  const SplitIndices split = stratified_split(all.labels(), test_count, stage_seed(cfg, SeedStream::Split));

  const std::string fp = config_fingerprint(cfg);
  const fs::path dir(opt.out_dir);
  write_file(dir / "features_all.csv", [&](std::ostream& out) { write_feature_csv(out, all, fp); });
  write_file(dir / "features_train.csv", [&](std::ostream& out) { write_feature_csv(out, all.subset(split.train), fp); });
  write_file(dir / "features_test.csv", [&](std::ostream& out) { write_feature_csv(out, all.subset(split.test), fp); });
  std::cerr << "wrote " << all.size() << " rows x " << all.dim() << " features (" << split.train.size() << " train, "
            << split.test.size() << " test)\n";
  return 0;
}

// -- select ------------------------------------------------------------------

struct SelectOptions {
  std::string train;
  std::string out;
  std::string measure;
  std::optional<int> d_prime;
  std::optional<int> bootstraps;
};

int run_select(const CommonOptions& common, const SelectOptions& opt) {
  RunConfig cfg = load_config(common);
  if (!opt.measure.empty()) {
    try {
      cfg.selection.measure = parse_measure(opt.measure);
    } catch (const InvalidInput& e) {
      throw ConfigError(e.what());
    }
  }
  if (opt.d_prime) cfg.selection.d_prime = *opt.d_prime;
  if (opt.bootstraps) cfg.selection.bootstraps_B_s = *opt.bootstraps;
  cfg.validate();
  const Dataset train = read_features(opt.train);
  SelectionConfig sel = cfg.selection;
  sel.rng_seed = stage_seed(cfg, SeedStream::Selection);
  const Normalized norm = zscore_fit_transform(train);
  const SelectionResult result = bootstrap_select(norm.data, sel);
  write_file(opt.out, [&](std::ostream& out) {
    write_score_table(out, train.feature_names(), result, sel, config_fingerprint(cfg));
  });
  for (std::size_t j : result.selected) std::cerr << "  " << train.feature_names()[j] << '\n';
  return 0;
}

// -- train / eval ------------------------------------------------------------

struct LearnOptions {
  std::string train;
  std::string test;
  std::string selection;
  std::string out;
  std::string model;
  std::optional<int> bootstraps;
};

TrainedModel fit_selected(const Dataset& train, const std::vector<std::size_t>& selected, const LearnerConfig& cfg) {
  const Normalized norm = zscore_fit_transform(train);
  TrainedModel model = train_model(norm.data.project(selected), cfg);
  model.selected_feature_indices = selected;
  model.selected_feature_names.clear();
  for (std::size_t j : selected) model.selected_feature_names.push_back(train.feature_names()[j]);
  model.norm_stats = norm.stats.project(selected);
  return model;
}

void apply_model_option(RunConfig& cfg, const std::string& model) {
  if (model.empty()) return;
  try {
    cfg.learner.kind = parse_model_kind(model);
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
}

int run_train(const CommonOptions& common, const LearnOptions& opt) {
  RunConfig cfg = load_config(common);
  apply_model_option(cfg, opt.model);
  cfg.validate();
  const Dataset train = read_features(opt.train);
  const auto selected = read_selection(opt.selection, train);
  const TrainedModel model = fit_selected(train, selected, cfg.learner);
  if (!model.converged) std::cerr << "warning: training stopped before convergence\n";
  write_file(opt.out, [&](std::ostream& out) { write_model(out, model); });
  return 0;
}

int run_eval(const CommonOptions& common, const LearnOptions& opt) {
  RunConfig cfg = load_config(common);
  std::vector<ModelKind> kinds;
  if (opt.model == "both") {
    kinds = {ModelKind::LR, ModelKind::SVM_RBF};
  } else {
    apply_model_option(cfg, opt.model);
    kinds = {cfg.learner.kind};
  }
  if (opt.bootstraps) cfg.bootstraps_B_c = *opt.bootstraps;
  cfg.validate();

  const Dataset train = read_features(opt.train);
  const Dataset test = read_features(opt.test);
  if (train.feature_names() != test.feature_names()) {
    const auto& a = train.feature_names();
    const auto& b = test.feature_names();
    for (std::size_t j = 0; j < std::min(a.size(), b.size()); ++j) {
      if (a[j] != b[j]) throw InvalidInput("train/test schema mismatch at column '" + a[j] + "' vs '" + b[j] + "'");
    }
    throw InvalidInput("train/test schema mismatch: " + std::to_string(a.size()) + " vs " +
                       std::to_string(b.size()) + " columns");
  }
  const auto selected = read_selection(opt.selection, train);
  const Normalized norm = zscore_fit_transform(train);
  const Dataset train_sel = norm.data.project(selected);
  const Dataset test_sel = norm.stats.apply(test).project(selected);

  std::vector<std::pair<ModelKind, EvalReport>> reports;
  for (ModelKind kind : kinds) {
    LearnerConfig lc = cfg.learner;
    lc.kind = kind;
    EvalReport report = bootstrap_evaluate(train_sel, test_sel, lc, cfg.bootstraps_B_c,
                                           stage_seed(cfg, SeedStream::Evaluation));
    // Confusion of a single model fit on the full training set.
    const TrainedModel full = train_model(train_sel, lc);
    const Eigen::VectorXd prob = full.predict_proba(test_sel.matrix());
    const auto labels = test_sel.labels();
    ConfusionMatrix cm;
    for (std::size_t r = 0; r < labels.size(); ++r) {
      const int pred = prob[static_cast<Eigen::Index>(r)] >= cfg.threshold ? 1 : 0;
      ++cm.counts[static_cast<std::size_t>(labels[r])][static_cast<std::size_t>(pred)];
    }
    report.confusion = cm;
    std::cerr << to_string(kind) << ": mean AUC " << report.auc_mean << " [p5 " << report.auc_p5 << ", p95 "
              << report.auc_p95 << "]\n";
    reports.emplace_back(kind, std::move(report));
  }
  write_file(opt.out, [&](std::ostream& out) {
    write_eval_json(out, reports, cfg.bootstraps_B_c, config_fingerprint(cfg));
  });
  return 0;
}

// -- kfold / baseline --------------------------------------------------------

struct KFoldOptions {
  std::string features;
  std::string events_dir;
  std::string out;
  std::string folds_out;
  std::string model;
  std::optional<int> folds;
  bool no_select{false};
};

void write_folds(const std::string& path, const std::vector<std::string>& ids, const std::vector<int>& fold,
                 const std::vector<int>& predicted) {
  if (path.empty()) return;
  write_file(path, [&](std::ostream& out) {
    out << "event_id,fold,predicted\n";
    for (std::size_t r = 0; r < ids.size(); ++r) out << ids[r] << ',' << fold[r] << ',' << predicted[r] << '\n';
  });
}

int run_kfold(const CommonOptions& common, const KFoldOptions& opt) {
  RunConfig cfg = load_config(common);
  apply_model_option(cfg, opt.model);
  if (opt.folds) cfg.folds = *opt.folds;
  cfg.validate();
  const Dataset data = read_features(opt.features);
  std::optional<SelectionConfig> sel;
  if (!opt.no_select) {
    sel = cfg.selection;
    sel->rng_seed = stage_seed(cfg, SeedStream::Selection);
  }
  const auto folds = stratified_folds(data.labels(), cfg.folds, stage_seed(cfg, SeedStream::Folds));
  const KFoldResult result = kfold_confusion(data, cfg.learner, folds, cfg.threshold, sel);
  write_file(opt.out, [&](std::ostream& out) {
    write_confusion_csv(out, result.confusion, to_string(cfg.learner.kind), config_fingerprint(cfg));
  });
  std::vector<std::string> ids;
  for (const auto& row : data.rows()) ids.push_back(row.event_id);
  write_folds(opt.folds_out, ids, result.fold_of_row, result.predicted);
  std::cerr << "accuracy " << result.confusion.accuracy() << '\n';
  return 0;
}

int run_baseline(const CommonOptions& common, const KFoldOptions& opt, std::optional<int> r,
                 std::optional<int> window) {
  RunConfig cfg = load_config(common);
  if (opt.folds) cfg.folds = *opt.folds;
  if (r) cfg.baseline.r = *r;
  if (window) cfg.baseline.window_N = *window;
  cfg.validate();
  require_dir(opt.events_dir);
  const auto events = load_event_dir(opt.events_dir);
  std::vector<int> labels;
  std::vector<std::string> ids;
  for (const auto& ev : events) {
    labels.push_back(to_int(ev.label));
    ids.push_back(ev.event_id);
  }
  const auto folds = stratified_folds(labels, cfg.folds, stage_seed(cfg, SeedStream::Folds));
  const KFoldResult result = baseline_kfold(events, cfg.baseline, folds);
  write_file(opt.out, [&](std::ostream& out) {
    write_confusion_csv(out, result.confusion, "subspace-" + std::string(to_string(cfg.baseline.aggregation)),
                        config_fingerprint(cfg));
  });
  write_folds(opt.folds_out, ids, result.fold_of_row, result.predicted);
  std::cerr << "accuracy " << result.confusion.accuracy() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Power-system event identification from PMU ringdowns"};
  app.require_subcommand(1);
  CommonOptions common;

  SynthOptions synth;
  auto* c_synth = app.add_subcommand("synth", "generate a labeled synthetic corpus");
  add_common(c_synth, common);
  c_synth->add_option("--out", synth.out_dir, "output directory")->required();
  c_synth->add_option("--counts", synth.counts, "events per class (line trip, generation loss)")->expected(2);
  c_synth->add_option("--streams", synth.streams, "PMU streams per channel");
  c_synth->add_option("--samples", synth.samples, "samples per event");

  DecomposeOptions dec;
  auto* c_dec = app.add_subcommand("decompose", "matrix pencil decomposition of every event");
  add_common(c_dec, common);
  c_dec->add_option("--events", dec.events_dir, "corpus directory with manifest.csv")->required();
  c_dec->add_option("--out", dec.out, "decomposition store (JSON)")->required();
  c_dec->add_option("--report", dec.report, "diagnostics CSV (default: <out>.diagnostics.csv)");
  c_dec->add_option("--p", dec.p, "model order");
  c_dec->add_option("--L", dec.L, "pencil parameter (default N/2)");
  c_dec->add_option("--p-max", dec.p_max, "length of the E_p curve in the report");
  c_dec->add_option("--detrend", dec.detrend, "remove the affine trend first (true/false)");

  FeaturesOptions feat;
  auto* c_feat = app.add_subcommand("features", "feature rows and a stratified train/test split");
  add_common(c_feat, common);
  c_feat->add_option("--decomp", feat.decomp, "decomposition store")->required();
  c_feat->add_option("--out-dir", feat.out_dir, "output directory")->required();
  c_feat->add_option("--test-fraction", feat.test_fraction, "fraction of events held out for testing");

  SelectOptions sel;
  auto* c_sel = app.add_subcommand("select", "bootstrapped filter feature selection");
  add_common(c_sel, common);
  c_sel->add_option("--train", sel.train, "training feature CSV")->required();
  c_sel->add_option("--out", sel.out, "selection report CSV")->required();
  c_sel->add_option("--measure", sel.measure, "F, S or M");
  c_sel->add_option("--d-prime", sel.d_prime, "number of features to keep");
  c_sel->add_option("--bootstraps", sel.bootstraps, "bootstrap resamples B_s");

  LearnOptions train;
  auto* c_train = app.add_subcommand("train", "fit a classifier on the selected features");
  add_common(c_train, common);
  c_train->add_option("--train", train.train, "training feature CSV")->required();
  c_train->add_option("--selection", train.selection, "selection report")->required();
  c_train->add_option("--out", train.out, "model file")->required();
  c_train->add_option("--model", train.model, "lr or svm");

  LearnOptions eval;
  auto* c_eval = app.add_subcommand("eval", "bootstrap AUC evaluation on the test split");
  add_common(c_eval, common);
  c_eval->add_option("--train", eval.train, "training feature CSV")->required();
  c_eval->add_option("--test", eval.test, "test feature CSV")->required();
  c_eval->add_option("--selection", eval.selection, "selection report")->required();
  c_eval->add_option("--out", eval.out, "evaluation JSON")->required();
  c_eval->add_option("--model", eval.model, "lr, svm or both");
  c_eval->add_option("--bootstraps", eval.bootstraps, "bootstrap models B_c");

  KFoldOptions kf;
  auto* c_kf = app.add_subcommand("kfold", "stratified k-fold confusion matrix of the pipeline");
  add_common(c_kf, common);
  c_kf->add_option("--features", kf.features, "feature CSV with every event")->required();
  c_kf->add_option("--out", kf.out, "confusion CSV")->required();
  c_kf->add_option("--folds-out", kf.folds_out, "per-event fold and prediction CSV");
  c_kf->add_option("--model", kf.model, "lr or svm");
  c_kf->add_option("--folds", kf.folds, "number of folds");
  c_kf->add_flag("--no-select", kf.no_select, "train on every feature");

  KFoldOptions bl;
  std::optional<int> bl_r, bl_window;
  auto* c_bl = app.add_subcommand("baseline", "stratified k-fold confusion matrix of the subspace baseline");
  add_common(c_bl, common);
  c_bl->add_option("--events", bl.events_dir, "corpus directory with manifest.csv")->required();
  c_bl->add_option("--out", bl.out, "confusion CSV")->required();
  c_bl->add_option("--folds-out", bl.folds_out, "per-event fold and prediction CSV");
  c_bl->add_option("--folds", bl.folds, "number of folds");
  c_bl->add_option("--r", bl_r, "subspace dimension");
  c_bl->add_option("--window", bl_window, "window length N");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (c_synth->parsed()) return run_synth(common, synth);
    if (c_dec->parsed()) return run_decompose(common, dec);
    if (c_feat->parsed()) return run_features(common, feat);
    if (c_sel->parsed()) return run_select(common, sel);
    if (c_train->parsed()) return run_train(common, train);
    if (c_eval->parsed()) return run_eval(common, eval);
    if (c_kf->parsed()) return run_kfold(common, kf);
    if (c_bl->parsed()) return run_baseline(common, bl, bl_r, bl_window);
  } catch (const ConfigError& e) {
    std::cerr << "evid: configuration error: " << e.what() << '\n';
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "evid: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "evid: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
