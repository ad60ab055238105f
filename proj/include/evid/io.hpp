#pragma once

/**
 * @file io.hpp
 * @brief Text file formats for every pipeline stage.
 *
 * Doubles are written in shortest round-trip form so files reproduce byte for
 * byte and parse back to the same bits. Stage files open with a
 * "# evid-<kind> v1 config=<fingerprint>" line.
 */

#include "evid/core.hpp"
#include "evid/learn.hpp"
#include "evid/modal.hpp"
#include "evid/select.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace evid {

[[nodiscard]] std::string format_double(double v);
/// Throws InvalidInput mentioning `context` on anything but a complete number.
[[nodiscard]] double parse_double(std::string_view text, std::string_view context = {});

/// 64-bit FNV-1a as 16 lowercase hex digits.
[[nodiscard]] std::string fingerprint(std::string_view text);

[[nodiscard]] std::vector<std::string> split_csv_line(std::string_view line);

// -- events ------------------------------------------------------------------

/// Columns: n, then <channel>.<stream> for every channel in canonical order.
void write_event_csv(std::ostream& out, const EventRecord& event);
/// Label and sample rate come from the manifest.
[[nodiscard]] EventRecord read_event_csv(std::istream& in, std::string event_id, EventClass label,
                                         double sample_rate_hz);

struct ManifestEntry {
  std::string event_id;
  std::string file;  ///< relative to the manifest's directory
  EventClass label{EventClass::LineTrip};
  double sample_rate_hz{30.0};
};

void write_manifest(std::ostream& out, const std::vector<ManifestEntry>& entries);
[[nodiscard]] std::vector<ManifestEntry> read_manifest(std::istream& in);

/// Reads <dir>/manifest.csv and every event it lists, in manifest order.
[[nodiscard]] std::vector<EventRecord> load_event_dir(const std::filesystem::path& dir);

// -- decompositions ----------------------------------------------------------

struct EventDecomposition {
  std::string event_id;
  EventClass label{EventClass::LineTrip};
  std::map<ChannelKind, ModalDecomposition> channels;
};

void write_decompositions(std::ostream& out, const std::vector<EventDecomposition>& items,
                          const std::string& config_fingerprint);
[[nodiscard]] std::vector<EventDecomposition> read_decompositions(std::istream& in);

// -- features ----------------------------------------------------------------

/// event_id, feature columns..., label
void write_feature_csv(std::ostream& out, const Dataset& data, const std::string& config_fingerprint);
[[nodiscard]] Dataset read_feature_csv(std::istream& in);

// -- selection ---------------------------------------------------------------

/// rank, index, name, mean, percentile, selected; one row per feature, by descending percentile.
void write_score_table(std::ostream& out, const std::vector<std::string>& names, const SelectionResult& result,
                       const SelectionConfig& cfg, const std::string& config_fingerprint);

struct SelectionFile {
  std::vector<std::size_t> selected;  ///< in rank order
  std::vector<std::string> selected_names;
};
[[nodiscard]] SelectionFile read_score_table(std::istream& in);

// -- models and reports ------------------------------------------------------

void write_model(std::ostream& out, const TrainedModel& model);
[[nodiscard]] TrainedModel read_model(std::istream& in);

/// One object per model; with both kinds present the SVM - LR mean-AUC gap is added.
void write_eval_json(std::ostream& out, const std::vector<std::pair<ModelKind, EvalReport>>& reports,
                     int bootstraps_B_c, const std::string& config_fingerprint);

void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm, std::string_view method,
                         const std::string& config_fingerprint);

}  // namespace evid
