#pragma once

/**
 * @file core.hpp
 * @brief Domain types shared by every stage of the event-identification pipeline.
 *
 * Conventions:
 *  - A channel's samples are stored as an (m streams x N samples) matrix, one PMU per row.
 *  - Angles are radians everywhere; degrees only appear in CLI display.
 *  - Class labels: 0 = line trip, 1 = generation loss.
 */

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace evid {

/// Raised on inputs that violate an operation's preconditions.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// -----------------------------------------------------------------------------
// Channels and labels
// -----------------------------------------------------------------------------

/// PMU measurement channel. Declaration order is the canonical concatenation order.
enum class ChannelKind : std::uint8_t { VPM = 0, VPA = 1, IPM = 2, IPA = 3, F = 4 };

inline constexpr std::array<ChannelKind, 5> kAllChannels{
    ChannelKind::VPM, ChannelKind::VPA, ChannelKind::IPM, ChannelKind::IPA, ChannelKind::F};

[[nodiscard]] std::string_view to_string(ChannelKind kind) noexcept;
[[nodiscard]] std::optional<ChannelKind> parse_channel(std::string_view name) noexcept;

/// Binary event class.
enum class EventClass : std::uint8_t { LineTrip = 0, GenerationLoss = 1 };

[[nodiscard]] inline int to_int(EventClass c) noexcept { return static_cast<int>(c); }
[[nodiscard]] EventClass class_from_int(int v);

// -----------------------------------------------------------------------------
// Event records
// -----------------------------------------------------------------------------

/// Multi-channel, multi-PMU sample window for one event.
struct EventRecord {
  std::string event_id;
  EventClass label{EventClass::LineTrip};
  double sample_rate_hz{30.0};
  /// channel -> (m streams x N samples)
  std::map<ChannelKind, Eigen::MatrixXd> channels;

  [[nodiscard]] double sample_period() const noexcept { return 1.0 / sample_rate_hz; }
  /// Number of samples N (0 when no channel is present).
  [[nodiscard]] Eigen::Index num_samples() const noexcept;
};

/// Report-style validation; an empty list means every invariant holds.
[[nodiscard]] std::vector<std::string> validate_event(const EventRecord& record);

// -----------------------------------------------------------------------------
// Modal results
// -----------------------------------------------------------------------------

/// Complex residue of one mode in one stream, in polar form.
struct Residue {
  double magnitude{0.0};
  double angle{0.0};  ///< radians in (-pi, pi]
};

/// One complex mode Z = exp((sigma + j omega) Ts) with its per-stream residues.
///
/// Conjugate pairs are stored once, as the member with omega >= 0; `paired`
/// marks such representatives so the pair can be rebuilt when synthesizing.
struct Mode {
  double damping_sigma{0.0};       ///< 1/s
  double angular_freq_omega{0.0};  ///< rad/s, >= 0
  bool paired{false};
  std::vector<Residue> residues;  ///< one per stream

  /// Mean residue magnitude, skipping streams flagged in `excluded`.
  [[nodiscard]] double average_residue(const std::vector<bool>& excluded = {}) const;
};

/// p-mode fit of one channel group plus fit diagnostics.
struct ModalDecomposition {
  std::vector<Mode> modes;  ///< conjugate representatives, descending average residue
  int pencil_order_p{0};
  int pencil_L{0};
  double rank_error_E_p{0.0};
  std::vector<double> reconstruction_errors;  ///< E_i per stream
  std::vector<bool> degenerate_streams;       ///< zero-norm streams, excluded from ranking
  bool low_confidence{false};                 ///< E_p above the configured threshold
  bool underdetermined{false};                ///< fewer than p usable eigenvalues

  [[nodiscard]] std::size_t num_streams() const noexcept { return reconstruction_errors.size(); }
};

// -----------------------------------------------------------------------------
// Features and datasets
// -----------------------------------------------------------------------------

/// d-dimensional feature vector for one event. `values` and `names` are parallel.
struct FeatureVector {
  std::string event_id;
  EventClass label{EventClass::LineTrip};
  std::vector<double> values;
  std::vector<std::string> names;
  bool padded{false};  ///< zero padding was needed (too few modes or streams)
};

/// Rows sharing one feature schema.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<std::string> feature_names);

  /// Appends a row; throws InvalidInput when the names differ from the schema.
  void add(FeatureVector row);

  [[nodiscard]] const std::vector<std::string>& feature_names() const noexcept { return names_; }
  [[nodiscard]] const std::vector<FeatureVector>& rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t size() const noexcept { return rows_.size(); }
  [[nodiscard]] std::size_t dim() const noexcept { return names_.size(); }
  [[nodiscard]] bool empty() const noexcept { return rows_.empty(); }

  /// Row-major (n x d) design matrix.
  [[nodiscard]] Eigen::MatrixXd matrix() const;
  /// Labels as 0/1 integers.
  [[nodiscard]] std::vector<int> labels() const;
  [[nodiscard]] std::size_t count_label(EventClass c) const;

  /// Rows at the given indices (repeats allowed).
  [[nodiscard]] Dataset subset(const std::vector<std::size_t>& indices) const;
  /// Same rows restricted to the given feature columns.
  [[nodiscard]] Dataset project(const std::vector<std::size_t>& feature_indices) const;

 private:
  std::vector<std::string> names_;
  std::vector<FeatureVector> rows_;
};

}  // namespace evid
