#pragma once

/**
 * @file select.hpp
 * @brief Z-score normalization and bootstrapped filter feature selection.
 *
 * Three filter measures score each feature against the binary label on its
 * own: one-way ANOVA F, |Pearson r| (sure independence screening) and a
 * k-nearest-neighbour mutual information estimate. Scores are collected over
 * bootstrap resamples and features are ranked by a high percentile.
 */

#include "evid/core.hpp"
#include "evid/rng.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace evid {

enum class Measure { F, SIS, MI };

[[nodiscard]] std::string_view to_string(Measure m) noexcept;
/// Accepts "F", "S"/"SIS", "M"/"MI" (case-sensitive).
[[nodiscard]] Measure parse_measure(std::string_view name);

struct SelectionConfig {
  Measure measure{Measure::MI};
  int d_prime{10};
  int bootstraps_B_s{200};
  double percentile{95.0};
  int knn_k{3};
  std::uint64_t rng_seed{0};

  /// Throws InvalidInput unless 1 <= d' <= d, B_s >= 1, 0 < percentile <= 100, k >= 1.
  void validate(std::size_t d) const;
};

/// Per-feature training mean and population standard deviation.
struct NormStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;       ///< 1 where the feature is constant
  std::vector<bool> constant;   ///< std < 1e-12 on the training data

  [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(mean.size()); }
  [[nodiscard]] Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
  [[nodiscard]] Dataset apply(const Dataset& data) const;
  /// Stats restricted to a subset of features.
  [[nodiscard]] NormStats project(const std::vector<std::size_t>& indices) const;
};

/// Population-std z-scoring of the columns of x. Requires >= 2 rows.
[[nodiscard]] NormStats zscore_fit(const Eigen::MatrixXd& x);

struct Normalized {
  Dataset data;
  NormStats stats;
};

[[nodiscard]] Normalized zscore_fit_transform(const Dataset& train);

/// F-value for a constant feature is 0; zero within-group variance with distinct
/// group means gives this sentinel instead of +inf.
inline constexpr double kFValueCap = 1e12;

/// One-way ANOVA F statistic across the label groups.
[[nodiscard]] double f_value(std::span<const double> feature, std::span<const int> labels);

struct SisScore {
  double score{0.0};      ///< |Pearson r| in [0, 1]
  bool constant{false};   ///< feature or labels constant; score forced to 0
};

[[nodiscard]] SisScore sis_score(std::span<const double> feature, std::span<const int> labels);

/// kNN estimate (nats) of I(feature; label) for a continuous feature and a
/// discrete label. The feature is standardized and jittered by 1e-10 N(0,1)
/// draws from `seed` so ties resolve identically for identical columns.
[[nodiscard]] double mutual_information(std::span<const double> feature, std::span<const int> labels, int k,
                                        std::uint64_t seed);

/// Linear-interpolation percentile (q in [0, 100]) of unsorted values.
[[nodiscard]] double percentile(std::vector<double> values, double q);

/// Score of a single feature under a measure; `seed` only matters for MI.
[[nodiscard]] double filter_score(Measure measure, std::span<const double> feature, std::span<const int> labels,
                                  int knn_k, std::uint64_t seed);

/// Indices of a size-n resample with replacement in which every label of
/// `labels` that has members appears at least once. Redraws up to 100 times.
[[nodiscard]] std::vector<std::size_t> bootstrap_resample(std::span<const int> labels, Rng& rng,
                                                          int min_per_class = 1);

struct SelectionResult {
  std::vector<std::size_t> selected;  ///< d' feature indices, descending percentile score
  Eigen::MatrixXd score_table;        ///< d x B_s
  Eigen::VectorXd mean_score;
  Eigen::VectorXd percentile_score;
};

[[nodiscard]] SelectionResult bootstrap_select(const Dataset& train, const SelectionConfig& cfg);

}  // namespace evid
