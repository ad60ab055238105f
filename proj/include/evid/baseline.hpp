#pragma once

/**
 * @file baseline.hpp
 * @brief Subspace-angle nearest-neighbour event identifier.
 *
 * Each event window (m streams x N samples) is summarized by the span of its
 * r dominant right singular vectors. A test event takes the label of the
 * dictionary entry whose span is closest in principal angles.
 */

#include "evid/core.hpp"
#include "evid/learn.hpp"

#include <string>
#include <vector>

namespace evid {

enum class AngleAggregation { Mean, Max };

[[nodiscard]] std::string_view to_string(AngleAggregation a) noexcept;
[[nodiscard]] AngleAggregation parse_aggregation(std::string_view name);

struct EventSubspace {
  Eigen::MatrixXd basis;  ///< N x r, orthonormal columns
  bool padded{false};     ///< rank < r; trailing columns complete the basis arbitrarily
};

/// Right singular vectors of the r largest singular values. Requires 1 <= r <= min(m, N).
[[nodiscard]] EventSubspace event_subspace(const Eigen::MatrixXd& data, int r);

/// Principal angles in ascending order (radians). Small angles are taken from
/// sines so that equal spans give angles near machine precision.
[[nodiscard]] Eigen::VectorXd principal_angles(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

[[nodiscard]] double subspace_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                       AngleAggregation aggregation = AngleAggregation::Mean);

struct DictionaryEntry {
  std::string event_id;
  EventClass label{EventClass::LineTrip};
  Eigen::MatrixXd basis;
};

class SubspaceDictionary {
 public:
  /// Rejects an empty entry list and bases whose shape differs from window_N x r.
  SubspaceDictionary(std::vector<DictionaryEntry> entries, int r = 5, int window_N = 300,
                     AngleAggregation aggregation = AngleAggregation::Mean);

  [[nodiscard]] const std::vector<DictionaryEntry>& entries() const noexcept { return entries_; }
  [[nodiscard]] int r() const noexcept { return r_; }
  [[nodiscard]] int window_N() const noexcept { return window_N_; }
  [[nodiscard]] AngleAggregation aggregation() const noexcept { return aggregation_; }

 private:
  std::vector<DictionaryEntry> entries_;
  int r_;
  int window_N_;
  AngleAggregation aggregation_;
};

struct Classification {
  EventClass label{EventClass::LineTrip};
  double distance{0.0};
  std::size_t nearest{0};  ///< dictionary entry index; first entry wins ties
};

/// 1-nearest-neighbour by subspace distance. `test_event` is m x window_N.
[[nodiscard]] Classification classify_by_dictionary(const Eigen::MatrixXd& test_event, const SubspaceDictionary& dict);

struct BaselineConfig {
  int r{5};
  int window_N{300};
  AngleAggregation aggregation{AngleAggregation::Mean};
  bool detrend{true};
  ChannelKind channel{ChannelKind::VPM};
};

/// First window_N samples of the configured channel, detrended per stream when enabled.
[[nodiscard]] Eigen::MatrixXd baseline_window(const EventRecord& event, const BaselineConfig& cfg);

/// k-fold protocol: the dictionary holds the training folds, each test event is classified against it.
[[nodiscard]] KFoldResult baseline_kfold(const std::vector<EventRecord>& events, const BaselineConfig& cfg,
                                         const std::vector<int>& fold_of_row);

}  // namespace evid
