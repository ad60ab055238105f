#include "evid/learn.hpp"

#include "evid/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace evid {
namespace {

double softplus(double s) { return s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); }

double sigmoid(double s) {
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

void require_both_classes(std::span<const int> labels, std::string_view what) {
  bool has0 = false, has1 = false;
  for (int y : labels) {
    if (y == 0) has0 = true;
    else if (y == 1) has1 = true;
    else throw InvalidInput(std::string(what) + ": labels must be 0 or 1");
  }
  if (!has0 || !has1) throw InvalidInput(std::string(what) + " needs both classes present");
}

double lr_loss_only(const Eigen::MatrixXd& x, std::span<const int> labels, const Eigen::VectorXd& w, double b,
                    double lambda) {
  const Eigen::VectorXd s = (x * w).array() + b;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) loss += softplus(s[i]) - labels[static_cast<std::size_t>(i)] * s[i];
  return loss / static_cast<double>(s.size()) + 0.5 * lambda * w.squaredNorm();
}

void set_identity_preprocessing(TrainedModel& model, const Dataset& train) {
  const std::size_t d = train.dim();
  model.selected_feature_indices.resize(d);
  std::iota(model.selected_feature_indices.begin(), model.selected_feature_indices.end(), 0);
  model.selected_feature_names = train.feature_names();
  model.norm_stats.mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  model.norm_stats.stddev = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(d));
  model.norm_stats.constant.assign(d, false);
}

}  // namespace

std::string_view to_string(ModelKind kind) noexcept {
  return kind == ModelKind::LR ? "LR" : "SVM_RBF";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "lr" || name == "LR") return ModelKind::LR;
  if (name == "svm" || name == "SVM" || name == "SVM_RBF" || name == "svm_rbf") return ModelKind::SVM_RBF;
  throw InvalidInput("unknown model kind '" + std::string(name) + "' (expected lr or svm)");
}

// ---------------------------------------------------------------------------
// Model scoring

std::size_t TrainedModel::input_dim() const noexcept {
  return kind == ModelKind::LR ? static_cast<std::size_t>(weights.size())
                               : static_cast<std::size_t>(support_vectors.cols());
}

Eigen::VectorXd TrainedModel::decision_function(const Eigen::MatrixXd& x) const {
  if (static_cast<std::size_t>(x.cols()) != input_dim()) {
    throw InvalidInput("model expects " + std::to_string(input_dim()) + " features, got " + std::to_string(x.cols()));
  }
  if (kind == ModelKind::LR) return (x * weights).array() + bias;
  if (support_vectors.rows() == 0) return Eigen::VectorXd::Constant(x.rows(), bias);
  return (rbf_kernel(x, support_vectors, gamma) * dual_coef).array() + bias;
}

Eigen::VectorXd TrainedModel::predict_proba(const Eigen::MatrixXd& x) const {
  return decision_function(x).unaryExpr([](double s) { return sigmoid(s); });
}

Eigen::VectorXd TrainedModel::score_dataset(const Dataset& data) const {
  const auto& names = data.feature_names();
  if (selected_feature_indices.size() != selected_feature_names.size()) {
    throw InvalidInput("model feature index and name lists differ in length");
  }
  for (std::size_t k = 0; k < selected_feature_indices.size(); ++k) {
    const std::size_t j = selected_feature_indices[k];
    if (j >= names.size()) {
      throw InvalidInput("model column '" + selected_feature_names[k] + "' (index " + std::to_string(j) +
                         ") is missing from a dataset with " + std::to_string(names.size()) + " features");
    }
    if (names[j] != selected_feature_names[k]) {
      throw InvalidInput("schema mismatch at column " + std::to_string(j) + ": model expects '" +
                         selected_feature_names[k] + "', dataset has '" + names[j] + "'");
    }
  }
  const Eigen::MatrixXd full = data.matrix();
  Eigen::MatrixXd x(full.rows(), static_cast<Eigen::Index>(selected_feature_indices.size()));
  for (std::size_t k = 0; k < selected_feature_indices.size(); ++k) {
    x.col(static_cast<Eigen::Index>(k)) = full.col(static_cast<Eigen::Index>(selected_feature_indices[k]));
  }
  return decision_function(norm_stats.apply(x));
}

// ---------------------------------------------------------------------------
// Logistic regression

LossAndGradient lr_loss_and_gradient(const Eigen::MatrixXd& x, std::span<const int> labels, const Eigen::VectorXd& w,
                                     double b, double l2_lambda) {
  if (static_cast<std::size_t>(x.rows()) != labels.size() || x.cols() != w.size()) {
    throw InvalidInput("lr_loss_and_gradient: shape mismatch");
  }
  if (x.rows() == 0) throw InvalidInput("lr_loss_and_gradient: no rows");
  const auto n = static_cast<double>(x.rows());
  const Eigen::VectorXd s = (x * w).array() + b;
  Eigen::VectorXd resid(s.size());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    loss += softplus(s[i]) - y * s[i];
    resid[i] = sigmoid(s[i]) - y;
  }
  LossAndGradient out;
  out.loss = loss / n + 0.5 * l2_lambda * w.squaredNorm();
  out.grad_w = x.transpose() * resid / n + l2_lambda * w;
  out.grad_b = resid.sum() / n;
  return out;
}

TrainedModel train_lr(const Dataset& train, const LrConfig& cfg) {
  if (cfg.l2_lambda < 0.0) throw InvalidInput("LR lambda must be >= 0");
  const Eigen::MatrixXd x = train.matrix();
  const std::vector<int> y = train.labels();
  require_both_classes(y, "logistic regression");

  TrainedModel model;
  model.kind = ModelKind::LR;
  set_identity_preprocessing(model, train);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(x.cols());
  double b = 0.0;
  double step = 1.0;
  model.converged = false;

  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    const LossAndGradient lg = lr_loss_and_gradient(x, y, w, b, cfg.l2_lambda);
    const double g2 = lg.grad_w.squaredNorm() + lg.grad_b * lg.grad_b;
    if (std::sqrt(g2) <= cfg.tol) {
      model.converged = true;
      break;
    }
    step = std::min(step * 2.0, 1e6);
    bool accepted = false;
    while (step > 1e-16) {
      const Eigen::VectorXd w_next = w - step * lg.grad_w;
      const double b_next = b - step * lg.grad_b;
      if (lr_loss_only(x, y, w_next, b_next, cfg.l2_lambda) <= lg.loss - 0.5 * step * g2) {
        w = w_next;
        b = b_next;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no descent possible at machine precision
  }
  model.iterations = it;
  model.weights = std::move(w);
  model.bias = b;
  return model;
}

// ---------------------------------------------------------------------------
// RBF support vector machine

double auto_gamma(const Eigen::MatrixXd& x) {
  if (x.cols() == 0 || x.rows() == 0) throw InvalidInput("auto gamma of an empty matrix");
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const double var = (x.rowwise() - mean).array().square().mean();
  const auto d = static_cast<double>(x.cols());
  return var > 0.0 ? 1.0 / (d * var) : 1.0 / d;
}

Eigen::MatrixXd rbf_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double gamma) {
  if (a.cols() != b.cols()) throw InvalidInput("rbf_kernel: column count mismatch");
  const Eigen::VectorXd na = a.rowwise().squaredNorm();
  const Eigen::VectorXd nb = b.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = (-2.0 * a * b.transpose()).colwise() + na;
  d2.rowwise() += nb.transpose();
  return (-gamma * d2.array().max(0.0)).exp().matrix();
}

TrainedModel train_svm_rbf(const Dataset& train, const SvmConfig& cfg) {
  if (!(cfg.C > 0.0)) throw InvalidInput("SVM C must be > 0");
  if (cfg.gamma && !(*cfg.gamma > 0.0)) throw InvalidInput("SVM gamma must be > 0");
  const Eigen::MatrixXd x = train.matrix();
  const std::vector<int> labels = train.labels();
  require_both_classes(labels, "SVM");

  const auto n = x.rows();
  const double gamma = cfg.gamma ? *cfg.gamma : auto_gamma(x);
  const Eigen::MatrixXd k = rbf_kernel(x, x, gamma);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = labels[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;

  const double c = cfg.C;
  constexpr double kTau = 1e-12;
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, -1.0);  // Q alpha - e
  auto upper = [&](Eigen::Index t) { return alpha[t] >= c; };
  auto lower = [&](Eigen::Index t) { return alpha[t] <= 0.0; };
  auto q = [&](Eigen::Index i, Eigen::Index j) { return y[i] * y[j] * k(i, j); };

  TrainedModel model;
  model.kind = ModelKind::SVM_RBF;
  model.converged = false;
  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    // Maximal violating i, then j by the largest second-order objective decrease.
    double gmax = -std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (y[t] > 0 ? !upper(t) : !lower(t)) {
        const double v = -y[t] * grad[t];
        if (v >= gmax) {
          gmax = v;
          i = t;
        }
      }
    }
    double gmax2 = -std::numeric_limits<double>::infinity();
    Eigen::Index j = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; i >= 0 && t < n; ++t) {
      if (y[t] > 0 ? lower(t) : upper(t)) continue;
      const double v = y[t] * grad[t];
      gmax2 = std::max(gmax2, v);
      const double diff = gmax + v;
      if (diff > 0.0) {
        double a = k(i, i) + k(t, t) - 2.0 * y[i] * y[t] * k(i, t);
        if (a <= 0.0) a = kTau;
        const double obj = -(diff * diff) / a;
        if (obj <= best) {
          best = obj;
          j = t;
        }
      }
    }
    if (i < 0 || j < 0 || gmax + gmax2 < cfg.tol) {
      model.converged = true;
      break;
    }

    const double ai_old = alpha[i], aj_old = alpha[j];
    if (y[i] != y[j]) {
      double quad = k(i, i) + k(j, j) + 2.0 * q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double quad = k(i, i) + k(j, j) - 2.0 * q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }
    const double di = alpha[i] - ai_old, dj = alpha[j] - aj_old;
    for (Eigen::Index t = 0; t < n; ++t) grad[t] += q(t, i) * di + q(t, j) * dj;
  }
  model.iterations = it;

  // Bias from free vectors, or the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  int free_count = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (upper(t)) {
      if (y[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (lower(t)) {
      if (y[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  const double rho = free_count > 0 ? free_sum / free_count : 0.5 * (ub + lb);

  model.dual_objective = 0.5 * alpha.dot(grad - Eigen::VectorXd::Ones(n));
  model.gamma = gamma;
  model.bias = -rho;
  std::vector<Eigen::Index> sv;
  for (Eigen::Index t = 0; t < n; ++t) {
    if (alpha[t] > 0.0) sv.push_back(t);
  }
  model.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), x.cols());
  model.dual_coef.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t s = 0; s < sv.size(); ++s) {
    model.support_vectors.row(static_cast<Eigen::Index>(s)) = x.row(sv[s]);
    model.dual_coef[static_cast<Eigen::Index>(s)] = alpha[sv[s]] * y[sv[s]];
  }
  set_identity_preprocessing(model, train);
  return model;
}

TrainedModel train_model(const Dataset& train, const LearnerConfig& cfg) {
  return cfg.kind == ModelKind::LR ? train_lr(train, cfg.lr) : train_svm_rbf(train, cfg.svm);
}

// ---------------------------------------------------------------------------
// Evaluation

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw InvalidInput("roc_auc: scores and labels differ in length");
  require_both_classes(labels, "roc_auc");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Walk groups of equal score; every positive beats the negatives seen so far.
  double concordant = 0.0, tied = 0.0, negatives_below = 0.0;
  double n0 = 0.0, n1 = 0.0;
  for (std::size_t g = 0; g < order.size();) {
    std::size_t e = g;
    double pos = 0.0, neg = 0.0;
    while (e < order.size() && scores[order[e]] == scores[order[g]]) {
      (labels[order[e]] == 1 ? pos : neg) += 1.0;
      ++e;
    }
    concordant += pos * negatives_below;
    tied += pos * neg;
    negatives_below += neg;
    n0 += neg;
    n1 += pos;
    g = e;
  }
  return (concordant + 0.5 * tied) / (n0 * n1);
}

long ConfusionMatrix::total() const noexcept {
  return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
}

double ConfusionMatrix::accuracy() const {
  if (total() == 0) throw InvalidInput("accuracy of an empty confusion matrix");
  return static_cast<double>(counts[0][0] + counts[1][1]) / static_cast<double>(total());
}

std::array<std::array<double, 2>, 2> ConfusionMatrix::row_percent() const {
  std::array<std::array<double, 2>, 2> out{};
  for (int r = 0; r < 2; ++r) {
    const long row = counts[r][0] + counts[r][1];
    for (int c = 0; c < 2; ++c) out[r][c] = row > 0 ? 100.0 * static_cast<double>(counts[r][c]) / row : 0.0;
  }
  return out;
}

EvalReport bootstrap_evaluate(const Dataset& train, const Dataset& test, const LearnerConfig& cfg,
                              int bootstraps_B_c, std::uint64_t seed) {
  if (bootstraps_B_c < 1) throw InvalidInput("B_c must be >= 1");
  if (train.feature_names() != test.feature_names()) {
    const auto& a = train.feature_names();
    const auto& b = test.feature_names();
    for (std::size_t j = 0; j < std::min(a.size(), b.size()); ++j) {
      if (a[j] != b[j]) throw InvalidInput("train/test schema mismatch at column '" + a[j] + "' vs '" + b[j] + "'");
    }
    throw InvalidInput("train/test schema mismatch: " + std::to_string(a.size()) + " vs " +
                       std::to_string(b.size()) + " columns");
  }
  const std::vector<int> y_train = train.labels();
  const std::vector<int> y_test = test.labels();
  require_both_classes(y_test, "evaluation test set");
  const Eigen::MatrixXd x_test = test.matrix();

  EvalReport report;
  report.per_bootstrap_auc.reserve(static_cast<std::size_t>(bootstraps_B_c));
  for (int b = 0; b < bootstraps_B_c; ++b) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
    const TrainedModel model = train_model(train.subset(bootstrap_resample(y_train, rng)), cfg);
    if (!model.converged) ++report.nonconverged_fits;
    const Eigen::VectorXd s = model.decision_function(x_test);
    report.per_bootstrap_auc.push_back(roc_auc(std::span<const double>(s.data(), static_cast<std::size_t>(s.size())), y_test));
  }
  std::vector<double> sorted = report.per_bootstrap_auc;
  std::sort(sorted.begin(), sorted.end());
  report.auc_mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  report.auc_p5 = percentile(sorted, 5.0);
  report.auc_p95 = percentile(sorted, 95.0);
  return report;
}

std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed) {
  if (folds < 2) throw InvalidInput("k-fold needs at least 2 folds");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  if (by_class.size() < 2) throw InvalidInput("k-fold needs both classes present");
  for (const auto& [label, rows] : by_class) {
    if (rows.size() < static_cast<std::size_t>(folds)) {
      throw InvalidInput("class " + std::to_string(label) + " has " + std::to_string(rows.size()) +
                         " rows, fewer than the " + std::to_string(folds) + " folds requested");
    }
  }
  Rng rng(seed);
  std::vector<int> fold(labels.size(), -1);
  std::size_t next = 0;
  for (auto& [label, rows] : by_class) {
    std::shuffle(rows.begin(), rows.end(), rng);
    for (std::size_t r : rows) fold[r] = static_cast<int>(next++ % static_cast<std::size_t>(folds));
  }
  return fold;
}

SplitIndices stratified_split(std::span<const int> labels, std::size_t test_count, std::uint64_t seed) {
  const std::size_t n = labels.size();
  if (test_count == 0 || test_count >= n) throw InvalidInput("test size must lie in [1, n - 1]");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < n; ++i) by_class[labels[i]].push_back(i);

  // Proportional allocation, largest remainder first.
  std::map<int, std::size_t> take;
  std::vector<std::pair<double, int>> remainder;
  std::size_t assigned = 0;
  for (const auto& [label, rows] : by_class) {
    const double exact = static_cast<double>(test_count) * static_cast<double>(rows.size()) / static_cast<double>(n);
    take[label] = static_cast<std::size_t>(std::floor(exact));
    assigned += take[label];
    remainder.emplace_back(-(exact - std::floor(exact)), label);
  }
  std::sort(remainder.begin(), remainder.end());
  for (std::size_t r = 0; assigned < test_count; ++r, ++assigned) ++take[remainder[r % remainder.size()].second];

  Rng rng(seed);
  SplitIndices out;
  for (auto& [label, rows] : by_class) {
    if (take[label] == 0 || take[label] >= rows.size()) {
      throw InvalidInput("stratified split leaves class " + std::to_string(label) + " empty on one side");
    }
    std::shuffle(rows.begin(), rows.end(), rng);
    out.test.insert(out.test.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(take[label]));
    out.train.insert(out.train.end(), rows.begin() + static_cast<std::ptrdiff_t>(take[label]), rows.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

TrainedModel fit_pipeline(const Dataset& train_raw, const LearnerConfig& cfg,
                          const std::optional<SelectionConfig>& selection) {
  const Normalized norm = zscore_fit_transform(train_raw);
  std::vector<std::size_t> idx;
  if (selection) {
    idx = bootstrap_select(norm.data, *selection).selected;
  } else {
    idx.resize(train_raw.dim());
    std::iota(idx.begin(), idx.end(), 0);
  }
  TrainedModel model = train_model(norm.data.project(idx), cfg);
  model.selected_feature_indices = idx;
  model.selected_feature_names.clear();
  for (std::size_t j : idx) model.selected_feature_names.push_back(train_raw.feature_names()[j]);
  model.norm_stats = norm.stats.project(idx);
  return model;
}

KFoldResult kfold_confusion(const Dataset& data, const LearnerConfig& cfg, int folds, double threshold,
                            std::uint64_t seed, const std::optional<SelectionConfig>& selection) {
  return kfold_confusion(data, cfg, stratified_folds(data.labels(), folds, seed), threshold, selection);
}

KFoldResult kfold_confusion(const Dataset& data, const LearnerConfig& cfg, const std::vector<int>& fold_of_row,
                            double threshold, const std::optional<SelectionConfig>& selection) {
  if (fold_of_row.size() != data.size()) throw InvalidInput("fold assignment length differs from the dataset");
  if (!(threshold > 0.0 && threshold < 1.0)) throw InvalidInput("threshold must lie in (0, 1)");
  const int folds = fold_of_row.empty() ? 0 : *std::max_element(fold_of_row.begin(), fold_of_row.end()) + 1;
  if (folds < 2) throw InvalidInput("k-fold needs at least 2 folds");
  const std::vector<int> labels = data.labels();

  KFoldResult out;
  out.fold_of_row = fold_of_row;
  out.predicted.assign(data.size(), -1);
  for (int f = 0; f < folds; ++f) {
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t r = 0; r < data.size(); ++r) (fold_of_row[r] == f ? test_idx : train_idx).push_back(r);
    if (test_idx.empty()) throw InvalidInput("fold " + std::to_string(f) + " is empty");
    std::optional<SelectionConfig> fold_selection = selection;
    if (fold_selection) fold_selection->rng_seed = derive_seed(selection->rng_seed, static_cast<std::uint64_t>(f));
    const TrainedModel model = fit_pipeline(data.subset(train_idx), cfg, fold_selection);
    const Eigen::VectorXd s = model.score_dataset(data.subset(test_idx));
    for (std::size_t t = 0; t < test_idx.size(); ++t) {
      const int pred = sigmoid(s[static_cast<Eigen::Index>(t)]) >= threshold ? 1 : 0;
      out.predicted[test_idx[t]] = pred;
      ++out.confusion.counts[static_cast<std::size_t>(labels[test_idx[t]])][static_cast<std::size_t>(pred)];
    }
  }
  return out;
}

}  // namespace evid
