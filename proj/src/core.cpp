#include "evid/core.hpp"

#include <cmath>
#include <sstream>

namespace evid {

std::string_view to_string(ChannelKind kind) noexcept {
  switch (kind) {
    case ChannelKind::VPM: return "VPM";
    case ChannelKind::VPA: return "VPA";
    case ChannelKind::IPM: return "IPM";
    case ChannelKind::IPA: return "IPA";
    case ChannelKind::F: return "F";
  }
  return "?";
}

std::optional<ChannelKind> parse_channel(std::string_view name) noexcept {
  for (ChannelKind k : kAllChannels) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

EventClass class_from_int(int v) {
  if (v == 0) return EventClass::LineTrip;
  if (v == 1) return EventClass::GenerationLoss;
  throw InvalidInput("class label must be 0 or 1, got " + std::to_string(v));
}

Eigen::Index EventRecord::num_samples() const noexcept {
  return channels.empty() ? 0 : channels.begin()->second.cols();
}

std::vector<std::string> validate_event(const EventRecord& record) {
  std::vector<std::string> problems;
  if (!(record.sample_rate_hz > 0.0) || !std::isfinite(record.sample_rate_hz)) {
    problems.push_back("sample rate must be positive and finite");
  }
  if (record.channels.empty()) {
    problems.push_back("record has no channels");
    return problems;
  }

  // Reference length is the most common N so a single short channel is the one reported.
  std::map<Eigen::Index, int> votes;
  for (const auto& [kind, samples] : record.channels) ++votes[samples.cols()];
  Eigen::Index expected = 0;
  int best = -1;
  for (const auto& [n, count] : votes) {
    if (count > best) {
      best = count;
      expected = n;
    }
  }

  for (const auto& [kind, samples] : record.channels) {
    const auto name = std::string(to_string(kind));
    if (samples.rows() == 0) problems.push_back("channel " + name + " has no streams");
    if (samples.cols() != expected) {
      std::ostringstream msg;
      msg << "channel " << name << " length " << samples.cols() << " ≠ " << expected;
      problems.push_back(msg.str());
    }
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
      for (Eigen::Index n = 0; n < samples.cols(); ++n) {
        if (!std::isfinite(samples(i, n))) {
          std::ostringstream msg;
          msg << "non-finite sample at (" << name << ", stream " << i << ", n=" << n << ")";
          problems.push_back(msg.str());
        }
      }
    }
  }
  if (expected < 4) {
    problems.push_back("record has " + std::to_string(expected) + " samples; at least 4 required");
  }
  return problems;
}

double Mode::average_residue(const std::vector<bool>& excluded) const {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < residues.size(); ++i) {
    if (i < excluded.size() && excluded[i]) continue;
    sum += residues[i].magnitude;
    ++count;
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

Dataset::Dataset(std::vector<std::string> feature_names) : names_(std::move(feature_names)) {}

void Dataset::add(FeatureVector row) {
  if (row.values.size() != row.names.size()) {
    throw InvalidInput("feature vector " + row.event_id + " has mismatched names/values");
  }
  if (names_.empty() && rows_.empty()) {
    names_ = row.names;
  } else if (row.names != names_) {
    for (std::size_t j = 0; j < std::min(row.names.size(), names_.size()); ++j) {
      if (row.names[j] != names_[j]) {
        throw InvalidInput("schema mismatch at column " + std::to_string(j) + ": expected '" +
                           names_[j] + "', got '" + row.names[j] + "'");
      }
    }
    throw InvalidInput("schema mismatch: expected " + std::to_string(names_.size()) +
                       " features, got " + std::to_string(row.names.size()));
  }
  rows_.push_back(std::move(row));
}

Eigen::MatrixXd Dataset::matrix() const {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows_.size()), static_cast<Eigen::Index>(dim()));
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    for (std::size_t c = 0; c < dim(); ++c) {
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows_[r].values[c];
    }
  }
  return x;
}

std::vector<int> Dataset::labels() const {
  std::vector<int> y;
  y.reserve(rows_.size());
  for (const auto& r : rows_) y.push_back(to_int(r.label));
  return y;
}

std::size_t Dataset::count_label(EventClass c) const {
  std::size_t n = 0;
  for (const auto& r : rows_) n += (r.label == c) ? 1 : 0;
  return n;
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  Dataset out(names_);
  out.rows_.reserve(indices.size());
  for (std::size_t i : indices) out.rows_.push_back(rows_.at(i));
  return out;
}

Dataset Dataset::project(const std::vector<std::size_t>& feature_indices) const {
  std::vector<std::string> names;
  names.reserve(feature_indices.size());
  for (std::size_t j : feature_indices) names.push_back(names_.at(j));
  Dataset out(names);
  out.rows_.reserve(rows_.size());
  for (const auto& r : rows_) {
    FeatureVector fv;
    fv.event_id = r.event_id;
    fv.label = r.label;
    fv.padded = r.padded;
    fv.names = names;
    fv.values.reserve(feature_indices.size());
    for (std::size_t j : feature_indices) fv.values.push_back(r.values[j]);
    out.rows_.push_back(std::move(fv));
  }
  return out;
}

}  // namespace evid
