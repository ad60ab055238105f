#pragma once

#include "evid/core.hpp"

#include <map>
#include <string>
#include <vector>

namespace evid {

struct FeatureConfig {
  int p_prime{3};
  int m_prime{20};
  std::vector<ChannelKind> channels{ChannelKind::VPM, ChannelKind::VPA, ChannelKind::F};

  /// Throws InvalidInput on p' < 1, m' < 1, empty or non-canonical channel list.
  void validate() const;
  /// d = 2 * n_ch * (p' + m' p')
  [[nodiscard]] std::size_t dimension() const noexcept;
};

struct RankedModes {
  std::vector<Mode> modes;  ///< exactly p' entries
  bool padded{false};
};

/// Collapses conjugate duplicates to one omega >= 0 representative, ranks by
/// average residue magnitude (ties: larger omega, then larger sigma) and keeps p'.
/// Missing modes are filled with zero modes and flagged.
[[nodiscard]] RankedModes dedup_and_rank_modes(const ModalDecomposition& dec, int p_prime);

struct ChannelFeatures {
  std::vector<double> values;
  std::vector<std::string> names;
  bool padded{false};
};

/// Feature row for one channel, layout:
///   [omega_1..omega_p', sigma_1..sigma_p',
///    |R| of the m' largest streams for mode 1, ..., mode p' (descending),
///    matching angles for mode 1, ..., mode p' (same stream order)]
[[nodiscard]] ChannelFeatures channel_features(const ModalDecomposition& dec, const FeatureConfig& cfg,
                                               ChannelKind kind = ChannelKind::VPM);

/// Concatenates channel_features over cfg.channels in canonical order.
[[nodiscard]] FeatureVector build_feature_vector(const EventRecord& event,
                                                 const std::map<ChannelKind, ModalDecomposition>& decs,
                                                 const FeatureConfig& cfg);

}  // namespace evid
