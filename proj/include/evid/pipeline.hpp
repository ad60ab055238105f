#pragma once

/**
 * @file pipeline.hpp
 * @brief Event -> decomposition -> feature row orchestration shared by the CLI and tests.
 */

#include "evid/core.hpp"
#include "evid/features.hpp"
#include "evid/modal.hpp"

#include <map>
#include <vector>

namespace evid {

struct ExtractionConfig {
  PencilConfig pencil;
  FeatureConfig features;
  bool detrend{true};  ///< remove the per-stream affine trend before the pencil fit
};

/// Decomposition plus E_p curve for every channel listed in cfg.features.channels.
[[nodiscard]] std::map<ChannelKind, ChannelAnalysis> analyze_event(const EventRecord& event,
                                                                   const ExtractionConfig& cfg);

/// Decomposes every channel listed in cfg.features.channels.
[[nodiscard]] std::map<ChannelKind, ModalDecomposition> decompose_event(const EventRecord& event,
                                                                        const ExtractionConfig& cfg);

[[nodiscard]] FeatureVector extract_features(const EventRecord& event, const ExtractionConfig& cfg);

/// One row per event, in input order. Throws InvalidInput naming the failing event.
[[nodiscard]] Dataset build_dataset(const std::vector<EventRecord>& events, const ExtractionConfig& cfg);

}  // namespace evid
