#include "evid/io.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace evid {
namespace {

using nlohmann::json;

constexpr std::string_view kFeatureMagic = "# evid-features v1";
constexpr std::string_view kSelectionMagic = "# evid-selection v1";
constexpr std::string_view kModelMagic = "# evid-model v1";
constexpr std::string_view kDecompositionFormat = "evid-decompositions v1";

bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    return true;
  }
  return false;
}

std::string require_line(std::istream& in, std::string_view what) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput(std::string(what) + ": unexpected end of file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

long parse_long(std::string_view text, std::string_view context) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw InvalidInput("expected an integer for " + std::string(context) + ", got '" + std::string(text) + "'");
  }
  return v;
}

EventClass parse_label(std::string_view text, std::string_view context) {
  const long v = parse_long(text, context);
  if (v != 0 && v != 1) throw InvalidInput(std::string(context) + ": label must be 0 or 1");
  return class_from_int(static_cast<int>(v));
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string tok; ss >> tok;) out.push_back(tok);
  return out;
}

// "key v1 v2 ..." line of a model file.
std::vector<std::string> model_field(std::istream& in, std::string_view key) {
  auto tokens = split_ws(require_line(in, "model file"));
  if (tokens.empty() || tokens.front() != key) {
    throw InvalidInput("model file: expected '" + std::string(key) + "' line");
  }
  tokens.erase(tokens.begin());
  return tokens;
}

std::vector<double> model_doubles(std::istream& in, std::string_view key, std::size_t expected) {
  const auto tokens = model_field(in, key);
  if (tokens.size() != expected) {
    throw InvalidInput("model file: '" + std::string(key) + "' has " + std::to_string(tokens.size()) +
                       " values, expected " + std::to_string(expected));
  }
  std::vector<double> out;
  for (const auto& t : tokens) out.push_back(parse_double(t, key));
  return out;
}

void write_values(std::ostream& out, std::string_view key, const Eigen::VectorXd& v) {
  out << key;
  for (double x : v) out << ' ' << format_double(x);
  out << '\n';
}

json decomposition_to_json(const ModalDecomposition& d) {
  json modes = json::array();
  for (const Mode& m : d.modes) {
    json mag = json::array(), ang = json::array();
    for (const Residue& r : m.residues) {
      mag.push_back(r.magnitude);
      ang.push_back(r.angle);
    }
    modes.push_back({{"sigma", m.damping_sigma},
                     {"omega", m.angular_freq_omega},
                     {"paired", m.paired},
                     {"residue_magnitude", std::move(mag)},
                     {"residue_angle", std::move(ang)}});
  }
  return {{"p", d.pencil_order_p},
          {"L", d.pencil_L},
          {"E_p", d.rank_error_E_p},
          {"low_confidence", d.low_confidence},
          {"underdetermined", d.underdetermined},
          {"E_i", d.reconstruction_errors},
          {"degenerate_streams", d.degenerate_streams},
          {"modes", std::move(modes)}};
}

ModalDecomposition decomposition_from_json(const json& j) {
  ModalDecomposition d;
  d.pencil_order_p = j.at("p").get<int>();
  d.pencil_L = j.at("L").get<int>();
  d.rank_error_E_p = j.at("E_p").get<double>();
  d.low_confidence = j.at("low_confidence").get<bool>();
  d.underdetermined = j.at("underdetermined").get<bool>();
  d.reconstruction_errors = j.at("E_i").get<std::vector<double>>();
  d.degenerate_streams = j.at("degenerate_streams").get<std::vector<bool>>();
  if (d.degenerate_streams.size() != d.reconstruction_errors.size()) {
    throw InvalidInput("decomposition store: E_i and degenerate_streams differ in length");
  }
  for (const auto& jm : j.at("modes")) {
    Mode m;
    m.damping_sigma = jm.at("sigma").get<double>();
    m.angular_freq_omega = jm.at("omega").get<double>();
    m.paired = jm.at("paired").get<bool>();
    const auto mag = jm.at("residue_magnitude").get<std::vector<double>>();
    const auto ang = jm.at("residue_angle").get<std::vector<double>>();
    if (mag.size() != ang.size() || mag.size() != d.reconstruction_errors.size()) {
      throw InvalidInput("decomposition store: residue list length differs from the stream count");
    }
    for (std::size_t i = 0; i < mag.size(); ++i) m.residues.push_back({mag[i], ang[i]});
    d.modes.push_back(std::move(m));
  }
  return d;
}

json report_to_json(const EvalReport& r) {
  json j = {{"auc_mean", r.auc_mean},
            {"auc_p5", r.auc_p5},
            {"auc_p95", r.auc_p95},
            {"nonconverged_fits", r.nonconverged_fits},
            {"per_bootstrap_auc", r.per_bootstrap_auc}};
  if (r.confusion) {
    j["confusion"] = {{"counts", r.confusion->counts}, {"row_percent", r.confusion->row_percent()}};
  }
  return j;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";  // folds -0 so output does not depend on the sign of zero
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text, std::string_view context) {
  double v = 0.0;
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw InvalidInput("not a number" + (context.empty() ? std::string() : " in " + std::string(context)) + ": '" +
                       std::string(text) + "'");
  }
  return v;
}

std::string fingerprint(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Events

void write_event_csv(std::ostream& out, const EventRecord& event) {
  if (auto problems = validate_event(event); !problems.empty()) {
    throw InvalidInput("event " + event.event_id + ": " + problems.front());
  }
  out << 'n';
  for (const auto& [kind, data] : event.channels) {
    for (Eigen::Index i = 0; i < data.rows(); ++i) out << ',' << to_string(kind) << '.' << i;
  }
  out << '\n';
  const Eigen::Index n = event.num_samples();
  for (Eigen::Index t = 0; t < n; ++t) {
    out << t;
    for (const auto& [kind, data] : event.channels) {
      for (Eigen::Index i = 0; i < data.rows(); ++i) out << ',' << format_double(data(i, t));
    }
    out << '\n';
  }
}

EventRecord read_event_csv(std::istream& in, std::string event_id, EventClass label, double sample_rate_hz) {
  std::string line;
  if (!next_data_line(in, line)) throw InvalidInput("event " + event_id + ": empty file");
  const auto header = split_csv_line(line);
  if (header.empty() || header.front() != "n") {
    throw InvalidInput("event " + event_id + ": first column must be 'n'");
  }
  struct Column {
    ChannelKind kind;
    Eigen::Index stream;
  };
  std::vector<Column> columns;
  std::map<ChannelKind, Eigen::Index> streams;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const std::string& name = header[c];
    const auto dot = name.find('.');
    const auto kind = dot == std::string::npos ? std::nullopt : parse_channel(name.substr(0, dot));
    if (!kind) throw InvalidInput("event " + event_id + ": bad column name '" + name + "'");
    const long stream = parse_long(std::string_view(name).substr(dot + 1), "column " + name);
    if (stream != streams[*kind]) {
      throw InvalidInput("event " + event_id + ": column '" + name + "' is out of order (expected stream " +
                         std::to_string(streams[*kind]) + ")");
    }
    ++streams[*kind];
    columns.push_back({*kind, stream});
  }

  std::vector<std::vector<double>> rows;
  while (next_data_line(in, line)) {
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw InvalidInput("event " + event_id + ": row " + std::to_string(rows.size()) + " has " +
                         std::to_string(cells.size()) + " cells, header has " + std::to_string(header.size()));
    }
    if (parse_long(cells[0], "sample index") != static_cast<long>(rows.size())) {
      throw InvalidInput("event " + event_id + ": sample index " + cells[0] + " out of sequence");
    }
    std::vector<double> values(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) values[c] = parse_double(cells[c + 1], header[c + 1]);
    rows.push_back(std::move(values));
  }

  EventRecord ev;
  ev.event_id = std::move(event_id);
  ev.label = label;
  ev.sample_rate_hz = sample_rate_hz;
  const auto n = static_cast<Eigen::Index>(rows.size());
  for (const auto& [kind, count] : streams) ev.channels.emplace(kind, Eigen::MatrixXd(count, n));
  for (Eigen::Index t = 0; t < n; ++t) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      ev.channels[columns[c].kind](columns[c].stream, t) = rows[static_cast<std::size_t>(t)][c];
    }
  }
  if (auto problems = validate_event(ev); !problems.empty()) {
    throw InvalidInput("event " + ev.event_id + ": " + problems.front());
  }
  return ev;
}

void write_manifest(std::ostream& out, const std::vector<ManifestEntry>& entries) {
  out << "event_id,file,label,sample_rate_hz\n";
  for (const auto& e : entries) {
    out << e.event_id << ',' << e.file << ',' << to_int(e.label) << ',' << format_double(e.sample_rate_hz) << '\n';
  }
}

std::vector<ManifestEntry> read_manifest(std::istream& in) {
  std::string line;
  if (!next_data_line(in, line) || line != "event_id,file,label,sample_rate_hz") {
    throw InvalidInput("manifest header must be 'event_id,file,label,sample_rate_hz'");
  }
  std::vector<ManifestEntry> out;
  while (next_data_line(in, line)) {
    const auto cells = split_csv_line(line);
    if (cells.size() != 4) throw InvalidInput("manifest row '" + line + "' does not have 4 cells");
    ManifestEntry e;
    e.event_id = cells[0];
    e.file = cells[1];
    e.label = parse_label(cells[2], "manifest label of " + cells[0]);
    e.sample_rate_hz = parse_double(cells[3], "sample rate of " + cells[0]);
    if (!(e.sample_rate_hz > 0.0)) throw InvalidInput("manifest: sample rate of " + cells[0] + " must be > 0");
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<EventRecord> load_event_dir(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.csv";
  std::ifstream manifest(manifest_path);
  if (!manifest) throw InvalidInput("cannot open " + manifest_path.string());
  std::vector<EventRecord> events;
  for (const auto& entry : read_manifest(manifest)) {
    std::ifstream file(dir / entry.file);
    if (!file) throw InvalidInput("cannot open event file " + (dir / entry.file).string());
    events.push_back(read_event_csv(file, entry.event_id, entry.label, entry.sample_rate_hz));
  }
  return events;
}

// ---------------------------------------------------------------------------
// Decompositions

void write_decompositions(std::ostream& out, const std::vector<EventDecomposition>& items,
                          const std::string& config_fingerprint) {
  json events = json::array();
  for (const auto& item : items) {
    json channels = json::object();
    for (const auto& [kind, dec] : item.channels) channels[std::string(to_string(kind))] = decomposition_to_json(dec);
    events.push_back({{"event_id", item.event_id}, {"label", to_int(item.label)}, {"channels", std::move(channels)}});
  }
  json doc = {{"format", kDecompositionFormat}, {"config", config_fingerprint}, {"events", std::move(events)}};
  out << doc.dump(1) << '\n';
}

std::vector<EventDecomposition> read_decompositions(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("decomposition store is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != kDecompositionFormat) {
      throw InvalidInput("unsupported decomposition store format");
    }
    std::vector<EventDecomposition> out;
    for (const auto& je : doc.at("events")) {
      EventDecomposition item;
      item.event_id = je.at("event_id").get<std::string>();
      item.label = class_from_int(je.at("label").get<int>());
      for (const auto& [name, jd] : je.at("channels").items()) {
        const auto kind = parse_channel(name);
        if (!kind) throw InvalidInput("decomposition store: unknown channel '" + name + "'");
        item.channels.emplace(*kind, decomposition_from_json(jd));
      }
      out.push_back(std::move(item));
    }
    return out;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("decomposition store: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Features

void write_feature_csv(std::ostream& out, const Dataset& data, const std::string& config_fingerprint) {
  out << kFeatureMagic << " config=" << config_fingerprint << " rows=" << data.size() << " dim=" << data.dim()
      << '\n';
  out << "event_id";
  for (const auto& name : data.feature_names()) out << ',' << name;
  out << ",label\n";
  for (const auto& row : data.rows()) {
    out << row.event_id;
    for (double v : row.values) out << ',' << format_double(v);
    out << ',' << to_int(row.label) << '\n';
  }
}

Dataset read_feature_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(kFeatureMagic, 0) != 0) {
    throw InvalidInput("not a feature file (missing '" + std::string(kFeatureMagic) + "' header)");
  }
  if (!next_data_line(in, line)) throw InvalidInput("feature file has no column header");
  auto header = split_csv_line(line);
  if (header.size() < 3 || header.front() != "event_id" || header.back() != "label") {
    throw InvalidInput("feature header must be event_id,<features...>,label");
  }
  std::vector<std::string> names(header.begin() + 1, header.end() - 1);
  Dataset data(names);
  while (next_data_line(in, line)) {
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw InvalidInput("feature row for '" + cells.front() + "' has " + std::to_string(cells.size()) +
                         " cells, header has " + std::to_string(header.size()));
    }
    FeatureVector fv;
    fv.event_id = cells.front();
    fv.label = parse_label(cells.back(), "label of " + fv.event_id);
    fv.names = names;
    fv.values.reserve(names.size());
    for (std::size_t j = 0; j < names.size(); ++j) fv.values.push_back(parse_double(cells[j + 1], names[j]));
    data.add(std::move(fv));
  }
  return data;
}

// ---------------------------------------------------------------------------
// Selection

void write_score_table(std::ostream& out, const std::vector<std::string>& names, const SelectionResult& result,
                       const SelectionConfig& cfg, const std::string& config_fingerprint) {
  const auto d = static_cast<std::size_t>(result.percentile_score.size());
  if (names.size() != d) throw InvalidInput("score table: name count differs from score count");
  out << kSelectionMagic << " config=" << config_fingerprint << " measure=" << to_string(cfg.measure)
      << " d_prime=" << cfg.d_prime << " bootstraps=" << cfg.bootstraps_B_s
      << " percentile=" << format_double(cfg.percentile) << " seed=" << cfg.rng_seed << '\n';
  out << "rank,index,name,mean,percentile,selected\n";

  std::vector<std::size_t> order(d);
  for (std::size_t j = 0; j < d; ++j) order[j] = j;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return result.percentile_score[static_cast<Eigen::Index>(a)] >
           result.percentile_score[static_cast<Eigen::Index>(b)];
  });
  // Selected features first, in selection order; the rest by score.
  std::vector<std::size_t> rows = result.selected;
  for (std::size_t j : order) {
    if (std::find(result.selected.begin(), result.selected.end(), j) == result.selected.end()) rows.push_back(j);
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t j = rows[r];
    const bool sel = r < result.selected.size();
    out << r + 1 << ',' << j << ',' << names[j] << ',' << format_double(result.mean_score[static_cast<Eigen::Index>(j)])
        << ',' << format_double(result.percentile_score[static_cast<Eigen::Index>(j)]) << ',' << (sel ? 1 : 0)
        << '\n';
  }
}

SelectionFile read_score_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(kSelectionMagic, 0) != 0) {
    throw InvalidInput("not a selection report (missing '" + std::string(kSelectionMagic) + "' header)");
  }
  if (!next_data_line(in, line) || line != "rank,index,name,mean,percentile,selected") {
    throw InvalidInput("selection report has an unexpected column header");
  }
  SelectionFile out;
  while (next_data_line(in, line)) {
    const auto cells = split_csv_line(line);
    if (cells.size() != 6) throw InvalidInput("selection row '" + line + "' does not have 6 cells");
    if (parse_long(cells[5], "selected flag") == 1) {
      const long idx = parse_long(cells[1], "feature index");
      if (idx < 0) throw InvalidInput("negative feature index in selection report");
      out.selected.push_back(static_cast<std::size_t>(idx));
      out.selected_names.push_back(cells[2]);
    }
  }
  if (out.selected.empty()) throw InvalidInput("selection report selects no features");
  return out;
}

// ---------------------------------------------------------------------------
// Models

void write_model(std::ostream& out, const TrainedModel& model) {
  const std::size_t d = model.input_dim();
  if (model.selected_feature_indices.size() != d || model.selected_feature_names.size() != d ||
      model.norm_stats.dim() != d) {
    throw InvalidInput("model preprocessing does not match its input dimension");
  }
  out << kModelMagic << '\n';
  out << "kind " << to_string(model.kind) << '\n';
  out << "dim " << d << '\n';
  out << "selected";
  for (std::size_t j : model.selected_feature_indices) out << ' ' << j;
  out << "\nnames";
  for (const auto& n : model.selected_feature_names) {
    if (n.find_first_of(" \t\n") != std::string::npos) throw InvalidInput("feature name '" + n + "' contains spaces");
    out << ' ' << n;
  }
  out << '\n';
  write_values(out, "mean", model.norm_stats.mean);
  write_values(out, "stddev", model.norm_stats.stddev);
  out << "constant";
  for (bool c : model.norm_stats.constant) out << ' ' << (c ? 1 : 0);
  out << "\nconverged " << (model.converged ? 1 : 0) << "\niterations " << model.iterations << '\n';
  out << "bias " << format_double(model.bias) << '\n';
  if (model.kind == ModelKind::LR) {
    write_values(out, "weights", model.weights);
  } else {
    out << "gamma " << format_double(model.gamma) << '\n';
    out << "dual_objective " << format_double(model.dual_objective) << '\n';
    out << "support_vectors " << model.support_vectors.rows() << '\n';
    for (Eigen::Index s = 0; s < model.support_vectors.rows(); ++s) {
      out << "sv " << format_double(model.dual_coef[s]);
      for (Eigen::Index j = 0; j < model.support_vectors.cols(); ++j) {
        out << ' ' << format_double(model.support_vectors(s, j));
      }
      out << '\n';
    }
  }
}

TrainedModel read_model(std::istream& in) {
  if (require_line(in, "model file") != kModelMagic) throw InvalidInput("not a model file (bad header)");
  TrainedModel m;
  const auto kind = model_field(in, "kind");
  if (kind.size() != 1) throw InvalidInput("model file: bad kind line");
  m.kind = parse_model_kind(kind.front());
  const auto dim_tokens = model_field(in, "dim");
  if (dim_tokens.size() != 1) throw InvalidInput("model file: bad dim line");
  const auto d = static_cast<std::size_t>(parse_long(dim_tokens.front(), "dim"));
  const auto selected = model_field(in, "selected");
  if (selected.size() != d) throw InvalidInput("model file: selected list length differs from dim");
  for (const auto& s : selected) m.selected_feature_indices.push_back(static_cast<std::size_t>(parse_long(s, "selected")));
  m.selected_feature_names = model_field(in, "names");
  if (m.selected_feature_names.size() != d) throw InvalidInput("model file: names list length differs from dim");
  const auto mean = model_doubles(in, "mean", d);
  const auto sd = model_doubles(in, "stddev", d);
  m.norm_stats.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(d));
  m.norm_stats.stddev = Eigen::Map<const Eigen::VectorXd>(sd.data(), static_cast<Eigen::Index>(d));
  for (const auto& c : model_field(in, "constant")) m.norm_stats.constant.push_back(c == "1");
  if (m.norm_stats.constant.size() != d) throw InvalidInput("model file: constant list length differs from dim");
  m.converged = model_field(in, "converged") == std::vector<std::string>{"1"};
  m.iterations = static_cast<int>(parse_long(model_field(in, "iterations").at(0), "iterations"));
  m.bias = model_doubles(in, "bias", 1).front();
  if (m.kind == ModelKind::LR) {
    const auto w = model_doubles(in, "weights", d);
    m.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(d));
  } else {
    m.gamma = model_doubles(in, "gamma", 1).front();
    m.dual_objective = model_doubles(in, "dual_objective", 1).front();
    const long count = parse_long(model_field(in, "support_vectors").at(0), "support vector count");
    if (count < 0) throw InvalidInput("model file: negative support vector count");
    m.support_vectors.resize(count, static_cast<Eigen::Index>(d));
    m.dual_coef.resize(count);
    for (long s = 0; s < count; ++s) {
      const auto row = model_doubles(in, "sv", d + 1);
      m.dual_coef[s] = row[0];
      for (std::size_t j = 0; j < d; ++j) m.support_vectors(s, static_cast<Eigen::Index>(j)) = row[j + 1];
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Reports

void write_eval_json(std::ostream& out, const std::vector<std::pair<ModelKind, EvalReport>>& reports,
                     int bootstraps_B_c, const std::string& config_fingerprint) {
  json models = json::object();
  const EvalReport* lr = nullptr;
  const EvalReport* svm = nullptr;
  for (const auto& [kind, report] : reports) {
    models[std::string(to_string(kind))] = report_to_json(report);
    (kind == ModelKind::LR ? lr : svm) = &report;
  }
  json doc = {{"format", "evid-eval v1"},
              {"config", config_fingerprint},
              {"bootstraps_B_c", bootstraps_B_c},
              {"models", std::move(models)}};
  if (lr && svm) doc["svm_minus_lr_auc_mean"] = svm->auc_mean - lr->auc_mean;
  out << doc.dump(1) << '\n';
}

void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm, std::string_view method,
                         const std::string& config_fingerprint) {
  const auto pct = cm.row_percent();
  out << "# evid-confusion v1 config=" << config_fingerprint << " method=" << method
      << " accuracy=" << format_double(cm.total() > 0 ? cm.accuracy() : 0.0) << '\n';
  out << "true_label,pred_0,pred_1,pct_pred_0,pct_pred_1\n";
  for (int r = 0; r < 2; ++r) {
    out << r << ',' << cm.counts[r][0] << ',' << cm.counts[r][1] << ',' << format_double(pct[r][0]) << ','
        << format_double(pct[r][1]) << '\n';
  }
}

}  // namespace evid
