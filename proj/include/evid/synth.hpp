#pragma once

/**
 * @file synth.hpp
 * @brief Labeled synthetic ringdown events.
 *
 * Each event draws a set of damped oscillatory modes shared by every stream
 * and channel, then per-stream complex residues whose magnitude falls off with
 * a random "electrical distance" of the PMU from the disturbance. An affine
 * trend and white Gaussian noise are added last.
 */

#include "evid/core.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace evid {

/// Uniform ranges for one conjugate mode pair.
struct ModeBand {
  double sigma_min{-0.5};
  double sigma_max{-0.1};
  double omega_min{1.0};
  double omega_max{2.0};
  double amplitude_min{0.5};
  double amplitude_max{1.0};
};

struct ClassTemplate {
  std::string name;
  EventClass label{EventClass::LineTrip};
  std::vector<ModeBand> modes;   ///< one conjugate pair per band, so p = 2 * modes.size()
  double decay_min{0.5};         ///< residue magnitude ~ exp(-decay * distance), distance ~ U(0, 1)
  double decay_max{1.0};
  double trend_slope_max{0.0};   ///< |slope| per sample, relative to the channel scale
  bool operating_point{true};    ///< add the channel's pre-event level (e.g. 1 pu, 60 Hz)
  double snr_db_min{std::numeric_limits<double>::infinity()};
  double snr_db_max{std::numeric_limits<double>::infinity()};

  /// Report-style check: sigma <= 0, 0 < omega < pi / Ts, ordered ranges.
  [[nodiscard]] std::vector<std::string> validate(double sample_rate_hz) const;
};

struct SynthConfig {
  int num_streams{95};
  int num_samples{300};
  double sample_rate_hz{30.0};
  std::vector<ChannelKind> channels{ChannelKind::VPM, ChannelKind::VPA, ChannelKind::F};
};

/// Channel set used for a given channel count: 1 -> VPM; 3 -> VPM, VPA, F; 5 -> all.
[[nodiscard]] std::vector<ChannelKind> default_channels(int n_ch);

struct PlantedMode {
  double sigma{0.0};
  double omega{0.0};
  double amplitude{0.0};
};

/// A generated event together with its ground truth.
struct SyntheticEvent {
  EventRecord record;
  std::vector<PlantedMode> planted;                 ///< in template band order
  std::map<ChannelKind, Eigen::MatrixXd> ringdown;  ///< noise-free, trend-free signal
  double snr_db{std::numeric_limits<double>::infinity()};
};

[[nodiscard]] SyntheticEvent generate_event_with_truth(const ClassTemplate& tmpl, const SynthConfig& cfg,
                                                       std::uint64_t seed, std::string event_id = "event");

[[nodiscard]] EventRecord generate_event(const ClassTemplate& tmpl, const SynthConfig& cfg, std::uint64_t seed,
                                         std::string event_id = "event");

/// counts[c] events from templates[c]; ids are "evt-NNNNN" in generation order.
[[nodiscard]] std::vector<EventRecord> generate_corpus(const std::vector<ClassTemplate>& templates,
                                                       const std::vector<int>& counts, const SynthConfig& cfg,
                                                       std::uint64_t seed);

/// Line-trip-like and generation-loss-like templates used by the default corpus.
[[nodiscard]] std::vector<ClassTemplate> default_templates();

/// Single-class template with `pairs` well-separated conjugate pairs (p = 2 * pairs).
[[nodiscard]] ClassTemplate planted_template(int pairs, double snr_db = std::numeric_limits<double>::infinity(),
                                             EventClass label = EventClass::LineTrip);

}  // namespace evid
