#pragma once

/**
 * @file learn.hpp
 * @brief Logistic regression, RBF-kernel SVM, ROC AUC and the evaluation protocols.
 *
 * Trainers take datasets whose columns are already normalized and reduced to
 * the selected features. TrainedModel remembers that preprocessing so it can
 * score raw full-width rows.
 */

#include "evid/core.hpp"
#include "evid/select.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace evid {

enum class ModelKind { LR, SVM_RBF };

[[nodiscard]] std::string_view to_string(ModelKind kind) noexcept;
/// Accepts "lr" / "LR" and "svm" / "SVM" / "SVM_RBF".
[[nodiscard]] ModelKind parse_model_kind(std::string_view name);

struct LrConfig {
  double l2_lambda{1e-2};
  int max_iters{20000};
  double tol{1e-6};  ///< on the gradient norm
};

struct SvmConfig {
  double C{1.0};
  std::optional<double> gamma;  ///< nullopt = auto, 1 / (d' * mean feature variance)
  int max_iters{1000000};
  double tol{1e-3};  ///< KKT violation
};

struct LearnerConfig {
  ModelKind kind{ModelKind::LR};
  LrConfig lr;
  SvmConfig svm;
};

struct TrainedModel {
  ModelKind kind{ModelKind::LR};

  // LR
  Eigen::VectorXd weights;
  double bias{0.0};

  // SVM: decision = sum_i coef_i K(sv_i, x) + bias, coef_i = alpha_i y_i (y in {-1, +1})
  Eigen::MatrixXd support_vectors;  ///< one per row
  Eigen::VectorXd dual_coef;
  double gamma{0.0};
  double dual_objective{0.0};  ///< 1/2 a'Qa - sum(a) at the solution

  /// Columns of the full feature schema the model reads, and their names.
  std::vector<std::size_t> selected_feature_indices;
  std::vector<std::string> selected_feature_names;
  /// Normalization for the selected columns (identity when default-constructed).
  NormStats norm_stats;

  bool converged{true};
  int iterations{0};

  [[nodiscard]] std::size_t input_dim() const noexcept;
  /// Raw decision values for rows already normalized and projected.
  [[nodiscard]] Eigen::VectorXd decision_function(const Eigen::MatrixXd& x) const;
  /// P(class 1): logistic of the decision value (for the SVM, a monotone score map).
  [[nodiscard]] Eigen::VectorXd predict_proba(const Eigen::MatrixXd& x) const;
  /// Decision values for full-schema rows: selects, normalizes, then scores.
  /// Throws InvalidInput naming the first column that does not match.
  [[nodiscard]] Eigen::VectorXd score_dataset(const Dataset& data) const;
};

struct LossAndGradient {
  double loss{0.0};
  Eigen::VectorXd grad_w;
  double grad_b{0.0};
};

/// Mean negative log-likelihood + (lambda / 2) ||w||^2 (bias unpenalized), labels in {0, 1}.
[[nodiscard]] LossAndGradient lr_loss_and_gradient(const Eigen::MatrixXd& x, std::span<const int> labels,
                                                   const Eigen::VectorXd& w, double b, double l2_lambda);

/// Full-batch gradient descent with Armijo backtracking from w = 0, b = 0.
[[nodiscard]] TrainedModel train_lr(const Dataset& train, const LrConfig& cfg = {});

/// gamma for "auto": 1 / (d * mean population variance of the columns); 1 / d for constant data.
[[nodiscard]] double auto_gamma(const Eigen::MatrixXd& x);

[[nodiscard]] Eigen::MatrixXd rbf_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double gamma);

/// Soft-margin dual solved by SMO with second-order working-set selection.
[[nodiscard]] TrainedModel train_svm_rbf(const Dataset& train, const SvmConfig& cfg = {});

[[nodiscard]] TrainedModel train_model(const Dataset& train, const LearnerConfig& cfg);

/// Mann-Whitney AUC: (concordant + 0.5 tied pairs) / (n0 n1); label 1 is positive.
[[nodiscard]] double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct ConfusionMatrix {
  /// counts[true label][predicted label]
  std::array<std::array<long, 2>, 2> counts{};

  [[nodiscard]] long total() const noexcept;
  [[nodiscard]] double accuracy() const;
  /// Row-normalized percentages (each non-empty row sums to 100).
  [[nodiscard]] std::array<std::array<double, 2>, 2> row_percent() const;
};

struct EvalReport {
  double auc_mean{0.0};
  double auc_p5{0.0};
  double auc_p95{0.0};
  std::vector<double> per_bootstrap_auc;  ///< in bootstrap order
  std::optional<ConfusionMatrix> confusion;
  int nonconverged_fits{0};
};

/// B_c models trained on resamples of `train`, each scored by AUC on `test`.
[[nodiscard]] EvalReport bootstrap_evaluate(const Dataset& train, const Dataset& test, const LearnerConfig& cfg,
                                            int bootstraps_B_c, std::uint64_t seed);

/// Fold id (0..folds-1) per row; classes are dealt round-robin after a seeded shuffle.
/// Rejected when a class has fewer than `folds` members.
[[nodiscard]] std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed);

/// Row indices of a stratified train/test split with `test_count` test rows.
struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};
[[nodiscard]] SplitIndices stratified_split(std::span<const int> labels, std::size_t test_count, std::uint64_t seed);

/// Z-score on the training rows, optional bootstrapped selection, then training.
/// The returned model scores raw rows of the same schema.
[[nodiscard]] TrainedModel fit_pipeline(const Dataset& train_raw, const LearnerConfig& cfg,
                                        const std::optional<SelectionConfig>& selection);

struct KFoldResult {
  ConfusionMatrix confusion;
  std::vector<int> fold_of_row;
  std::vector<int> predicted;  ///< out-of-fold prediction per row
};

/// Out-of-fold predictions (fit_pipeline per fold, probability >= threshold means class 1),
/// pooled into one confusion matrix.
[[nodiscard]] KFoldResult kfold_confusion(const Dataset& data, const LearnerConfig& cfg, int folds, double threshold,
                                          std::uint64_t seed,
                                          const std::optional<SelectionConfig>& selection = std::nullopt);

/// Same protocol with an externally supplied fold assignment.
[[nodiscard]] KFoldResult kfold_confusion(const Dataset& data, const LearnerConfig& cfg,
                                          const std::vector<int>& fold_of_row, double threshold,
                                          const std::optional<SelectionConfig>& selection = std::nullopt);

}  // namespace evid
