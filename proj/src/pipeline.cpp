#include "evid/pipeline.hpp"

#include "evid/preprocess.hpp"

namespace evid {

std::map<ChannelKind, ChannelAnalysis> analyze_event(const EventRecord& event, const ExtractionConfig& cfg) {
  if (auto problems = validate_event(event); !problems.empty()) {
    throw InvalidInput("event " + event.event_id + ": " + problems.front());
  }
  const EventRecord prepared = cfg.detrend ? detrend_event(event) : event;
  std::map<ChannelKind, ChannelAnalysis> out;
  for (ChannelKind kind : cfg.features.channels) {
    auto it = prepared.channels.find(kind);
    if (it == prepared.channels.end()) {
      throw InvalidInput("event " + event.event_id + " has no " + std::string(to_string(kind)) + " channel");
    }
    try {
      out.emplace(kind, analyze_channel(it->second, cfg.pencil, prepared.sample_period()));
    } catch (const InvalidInput& e) {
      throw InvalidInput("event " + event.event_id + ", channel " + std::string(to_string(kind)) + ": " + e.what());
    }
  }
  return out;
}

std::map<ChannelKind, ModalDecomposition> decompose_event(const EventRecord& event, const ExtractionConfig& cfg) {
  std::map<ChannelKind, ModalDecomposition> out;
  for (auto& [kind, analysis] : analyze_event(event, cfg)) out.emplace(kind, std::move(analysis.decomposition));
  return out;
}

FeatureVector extract_features(const EventRecord& event, const ExtractionConfig& cfg) {
  return build_feature_vector(event, decompose_event(event, cfg), cfg.features);
}

Dataset build_dataset(const std::vector<EventRecord>& events, const ExtractionConfig& cfg) {
  cfg.features.validate();
  Dataset data;
  for (const auto& event : events) {
    FeatureVector row = extract_features(event, cfg);
    if (data.empty() && data.dim() == 0) data = Dataset(row.names);
    data.add(std::move(row));
  }
  return data;
}

}  // namespace evid
