#include "evid/learn.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

using namespace evid;

namespace {

Dataset make_dataset(const Eigen::MatrixXd& x, const std::vector<int>& y) {
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < x.cols(); ++j) names.push_back("c" + std::to_string(j));
  Dataset d(names);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    FeatureVector fv;
    fv.event_id = "r" + std::to_string(i);
    fv.label = class_from_int(y[static_cast<std::size_t>(i)]);
    fv.names = names;
    fv.values.assign(x.row(i).begin(), x.row(i).end());
    d.add(std::move(fv));
  }
  return d;
}

double brute_force_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double num = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      num += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return num / pairs;
}

// Two Gaussian blobs shifted by `shift` along every axis.
Dataset blobs(int n, int d, double shift, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd x(n, d);
  std::vector<int> y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    y[static_cast<std::size_t>(i)] = i % 2;
    for (int j = 0; j < d; ++j) x(i, j) = g(rng) + shift * (i % 2);
  }
  return make_dataset(x, y);
}

std::vector<double> as_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// Brute-force dual: every split of the variables into lower / free / upper,
// the free block solved from the KKT system, the best feasible point kept.
double enumerate_svm_dual(const Eigen::MatrixXd& q, const Eigen::VectorXd& y, double c) {
  const int n = static_cast<int>(y.size());
  int combos = 1;
  for (int i = 0; i < n; ++i) combos *= 3;
  double best = std::numeric_limits<double>::infinity();
  for (int code = 0; code < combos; ++code) {
    std::vector<int> state(static_cast<std::size_t>(n));
    int rest = code;
    std::vector<int> free_idx;
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      state[static_cast<std::size_t>(i)] = rest % 3;
      rest /= 3;
      if (state[static_cast<std::size_t>(i)] == 1) free_idx.push_back(i);
      if (state[static_cast<std::size_t>(i)] == 2) alpha[i] = c;
    }
    const int f = static_cast<int>(free_idx.size());
    if (f == 0) {
      if (std::abs(y.dot(alpha)) > 1e-12) continue;
    } else {
      Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(f + 1, f + 1);
      Eigen::VectorXd rhs(f + 1);
      for (int a = 0; a < f; ++a) {
        double fixed = 0.0;
        for (int j = 0; j < n; ++j) {
          if (state[static_cast<std::size_t>(j)] != 1) fixed += q(free_idx[a], j) * alpha[j];
        }
        for (int b = 0; b < f; ++b) kkt(a, b) = q(free_idx[a], free_idx[b]);
        kkt(a, f) = y[free_idx[a]];
        kkt(f, a) = y[free_idx[a]];
        rhs[a] = 1.0 - fixed;
      }
      double fixed_y = 0.0;
      for (int j = 0; j < n; ++j) {
        if (state[static_cast<std::size_t>(j)] != 1) fixed_y += y[j] * alpha[j];
      }
      rhs[f] = -fixed_y;
      Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
      if (lu.rank() < f + 1) continue;
      Eigen::VectorXd sol = lu.solve(rhs);
      bool feasible = true;
      for (int a = 0; a < f; ++a) {
        if (sol[a] < -1e-12 || sol[a] > c + 1e-12) feasible = false;
        alpha[free_idx[a]] = sol[a];
      }
      if (!feasible) continue;
    }
    best = std::min(best, 0.5 * alpha.dot(q * alpha) - alpha.sum());
  }
  return best;
}

}  // namespace

TEST(Auc, HandExamples) {
  EXPECT_DOUBLE_EQ(roc_auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1}), 0.75);
  EXPECT_DOUBLE_EQ(roc_auc(std::vector<double>{1, 2, 3, 4}, std::vector<int>{0, 0, 1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(roc_auc(std::vector<double>{4, 3, 2, 1}, std::vector<int>{0, 0, 1, 1}), 0.0);
  EXPECT_DOUBLE_EQ(roc_auc(std::vector<double>{5, 5, 5, 5}, std::vector<int>{0, 1, 0, 1}), 0.5);
  EXPECT_THROW((void)roc_auc(std::vector<double>{1, 2}, std::vector<int>{1, 1}), InvalidInput);
  EXPECT_THROW((void)roc_auc(std::vector<double>{1, 2}, std::vector<int>{0}), InvalidInput);
}

TEST(Auc, EqualsPairCountingWithTies) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 60);
    std::vector<double> s(static_cast<std::size_t>(n));
    std::vector<int> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      s[static_cast<std::size_t>(i)] = static_cast<double>(rng() % 7);
      y[static_cast<std::size_t>(i)] = static_cast<int>(rng() % 2);
    }
    y[0] = 0;
    y[1] = 1;
    EXPECT_EQ(roc_auc(s, y), brute_force_auc(s, y));
  }
}

TEST(Auc, InvariantUnderMonotoneTransform) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::vector<double> s(80), t(80);
  std::vector<int> y(80);
  for (std::size_t i = 0; i < 80; ++i) {
    y[i] = static_cast<int>(i % 2);
    s[i] = g(rng) + 0.5 * y[i];
    t[i] = std::exp(3.0 * s[i]) + 2.0;
  }
  EXPECT_DOUBLE_EQ(roc_auc(s, y), roc_auc(t, y));
  std::vector<double> flipped(80);
  for (std::size_t i = 0; i < 80; ++i) flipped[i] = -s[i];
  EXPECT_NEAR(roc_auc(flipped, y), 1.0 - roc_auc(s, y), 1e-15);
}

TEST(LogisticRegression, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> g;
  Eigen::MatrixXd x(40, 5);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
  std::vector<int> y(40);
  for (std::size_t i = 0; i < 40; ++i) y[i] = static_cast<int>(i % 3 == 0);
  const double lambda = 0.1, h = 1e-5;
  for (int point = 0; point < 20; ++point) {
    Eigen::VectorXd w(5);
    for (auto& v : w) v = g(rng);
    const double b = g(rng);
    const auto lg = lr_loss_and_gradient(x, y, w, b, lambda);
    Eigen::VectorXd fd(6);
    for (int j = 0; j < 5; ++j) {
      Eigen::VectorXd wp = w, wm = w;
      wp[j] += h;
      wm[j] -= h;
      fd[j] = (lr_loss_and_gradient(x, y, wp, b, lambda).loss - lr_loss_and_gradient(x, y, wm, b, lambda).loss) / (2 * h);
    }
    fd[5] = (lr_loss_and_gradient(x, y, w, b + h, lambda).loss - lr_loss_and_gradient(x, y, w, b - h, lambda).loss) / (2 * h);
    Eigen::VectorXd analytic(6);
    analytic << lg.grad_w, lg.grad_b;
    EXPECT_LE((analytic - fd).norm(), 1e-5 * std::max(1.0, analytic.norm()));
  }
}

TEST(LogisticRegression, LossAtOriginIsLn2) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(10, 3);
  std::vector<int> y{0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
  EXPECT_NEAR(lr_loss_and_gradient(x, y, Eigen::VectorXd::Zero(3), 0.0, 1.0).loss, std::log(2.0), 1e-15);
}

TEST(LogisticRegression, SeparatesBlobsAndConverges) {
  auto train = blobs(100, 3, 3.0, 1);
  auto model = train_lr(train);
  EXPECT_TRUE(model.converged);
  auto test = blobs(100, 3, 3.0, 2);
  const auto s = as_vector(model.decision_function(test.matrix()));
  EXPECT_GT(roc_auc(s, test.labels()), 0.97);
  const auto p = model.predict_proba(test.matrix());
  EXPECT_TRUE((p.array() > 0.0).all() && (p.array() < 1.0).all());
}

TEST(LogisticRegression, StationaryPointOfObjective) {
  auto train = blobs(60, 2, 1.0, 3);
  LrConfig cfg;
  cfg.tol = 1e-9;
  auto model = train_lr(train, cfg);
  auto lg = lr_loss_and_gradient(train.matrix(), train.labels(), model.weights, model.bias, cfg.l2_lambda);
  EXPECT_LT(std::hypot(lg.grad_w.norm(), lg.grad_b), 1e-8);
}

TEST(LogisticRegression, NonConvergenceIsFlagged) {
  LrConfig cfg;
  cfg.max_iters = 1;
  auto model = train_lr(blobs(40, 2, 1.0, 4), cfg);
  EXPECT_FALSE(model.converged);
}

TEST(LogisticRegression, RandomLabelsGiveChanceAuc) {
  auto train = blobs(200, 4, 0.0, 5);
  auto test = blobs(400, 4, 0.0, 6);
  auto model = train_lr(train);
  EXPECT_NEAR(roc_auc(as_vector(model.decision_function(test.matrix())), test.labels()), 0.5, 0.1);
}

TEST(Svm, SolvesXor) {
  Eigen::MatrixXd x(4, 2);
  x << 0, 0, 1, 1, 0, 1, 1, 0;
  auto data = make_dataset(x, {0, 0, 1, 1});
  SvmConfig cfg;
  cfg.C = 10.0;
  cfg.gamma = 1.0;
  auto model = train_svm_rbf(data, cfg);
  EXPECT_TRUE(model.converged);
  const auto s = model.decision_function(x);
  EXPECT_LT(s[0], 0.0);
  EXPECT_LT(s[1], 0.0);
  EXPECT_GT(s[2], 0.0);
  EXPECT_GT(s[3], 0.0);
}

TEST(Svm, DualMatchesEnumeration) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXd x(6, 2);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
    std::vector<int> labels{0, 1, 0, 1, 1, 0};
    SvmConfig cfg;
    cfg.C = 0.5 + trial;
    cfg.gamma = 0.7;
    cfg.tol = 1e-10;
    auto model = train_svm_rbf(make_dataset(x, labels), cfg);
    Eigen::VectorXd y(6);
    for (int i = 0; i < 6; ++i) y[i] = labels[static_cast<std::size_t>(i)] ? 1.0 : -1.0;
    Eigen::MatrixXd q = (y * y.transpose()).cwiseProduct(rbf_kernel(x, x, 0.7));
    EXPECT_NEAR(model.dual_objective, enumerate_svm_dual(q, y, cfg.C), 1e-6);
  }
}

TEST(Svm, SmallCShrinksScoreSpread) {
  auto train = blobs(60, 2, 1.5, 7);
  auto test = blobs(40, 2, 1.5, 8);
  double previous = std::numeric_limits<double>::infinity();
  for (double c : {1.0, 0.01, 1e-4}) {
    SvmConfig cfg;
    cfg.C = c;
    auto s = train_svm_rbf(train, cfg).decision_function(test.matrix());
    const double spread = s.maxCoeff() - s.minCoeff();
    EXPECT_LE(spread, previous + 1e-12);
    previous = spread;
  }
  EXPECT_LT(previous, 1e-2);
}

TEST(Svm, AutoGammaAndKernel) {
  Eigen::MatrixXd x(2, 2);
  x << 0, 0, 2, 0;
  EXPECT_DOUBLE_EQ(auto_gamma(x), 1.0 / (2.0 * 0.5));
  EXPECT_DOUBLE_EQ(auto_gamma(Eigen::MatrixXd::Ones(3, 4)), 0.25);
  auto k = rbf_kernel(x, x, 0.5);
  EXPECT_DOUBLE_EQ(k(0, 0), 1.0);
  EXPECT_NEAR(k(0, 1), std::exp(-2.0), 1e-15);
}

TEST(ModelKindNames, Parse) {
  EXPECT_EQ(parse_model_kind("lr"), ModelKind::LR);
  EXPECT_EQ(parse_model_kind("SVM_RBF"), ModelKind::SVM_RBF);
  EXPECT_THROW((void)parse_model_kind("tree"), InvalidInput);
}

TEST(Confusion, AccuracyAndRowPercent) {
  ConfusionMatrix cm;
  cm.counts = {{{8, 2}, {1, 9}}};
  EXPECT_EQ(cm.total(), 20);
  EXPECT_DOUBLE_EQ(cm.accuracy(), 0.85);
  auto pct = cm.row_percent();
  EXPECT_DOUBLE_EQ(pct[0][0], 80.0);
  EXPECT_DOUBLE_EQ(pct[1][0] + pct[1][1], 100.0);
}

TEST(BootstrapEvaluate, SingleBootstrapCollapsesInterval) {
  auto train = blobs(40, 2, 2.0, 9);
  auto test = blobs(30, 2, 2.0, 10);
  auto r = bootstrap_evaluate(train, test, LearnerConfig{}, 1, 3);
  ASSERT_EQ(r.per_bootstrap_auc.size(), 1u);
  EXPECT_EQ(r.auc_mean, r.per_bootstrap_auc[0]);
  EXPECT_EQ(r.auc_p5, r.auc_mean);
  EXPECT_EQ(r.auc_p95, r.auc_mean);
}

TEST(BootstrapEvaluate, DeterministicAndOrdered) {
  auto train = blobs(40, 2, 1.0, 11);
  auto test = blobs(30, 2, 1.0, 12);
  LearnerConfig cfg;
  cfg.kind = ModelKind::SVM_RBF;
  auto a = bootstrap_evaluate(train, test, cfg, 25, 5);
  auto b = bootstrap_evaluate(train, test, cfg, 25, 5);
  EXPECT_EQ(a.per_bootstrap_auc, b.per_bootstrap_auc);
  EXPECT_LE(a.auc_p5, a.auc_p95);
  for (double v : a.per_bootstrap_auc) EXPECT_TRUE(v >= 0.0 && v <= 1.0);
}

TEST(BootstrapEvaluate, SchemaMismatchNamesColumn) {
  auto train = blobs(20, 2, 1.0, 1);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(10, 2);
  std::vector<std::string> names{"c0", "other"};
  Dataset test(names);
  for (int i = 0; i < 10; ++i) {
    FeatureVector fv;
    fv.names = names;
    fv.values = {x(i, 0), x(i, 1)};
    fv.label = class_from_int(i % 2);
    test.add(fv);
  }
  try {
    (void)bootstrap_evaluate(train, test, LearnerConfig{}, 2, 0);
    FAIL();
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("other"), std::string::npos);
  }
}

TEST(Folds, StratifiedPartition) {
  std::vector<int> y;
  for (int i = 0; i < 37; ++i) y.push_back(i < 22 ? 0 : 1);
  auto fold = stratified_folds(y, 5, 9);
  ASSERT_EQ(fold.size(), y.size());
  for (int f = 0; f < 5; ++f) {
    int c0 = 0, c1 = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (fold[i] != f) continue;
      (y[i] ? c1 : c0)++;
    }
    EXPECT_GE(c0, 4);
    EXPECT_LE(c0, 5);
    EXPECT_GE(c1, 3);
    EXPECT_LE(c1, 3 + 1);
  }
  EXPECT_EQ(fold, stratified_folds(y, 5, 9));
  EXPECT_THROW((void)stratified_folds(std::vector<int>{0, 0, 1}, 2, 0), InvalidInput);
}

TEST(Split, ProportionalAndDisjoint) {
  std::vector<int> y;
  for (int i = 0; i < 300; ++i) y.push_back(i % 2);
  auto s = stratified_split(y, 100, 4);
  EXPECT_EQ(s.test.size(), 100u);
  EXPECT_EQ(s.train.size(), 200u);
  std::set<std::size_t> all(s.train.begin(), s.train.end());
  all.insert(s.test.begin(), s.test.end());
  EXPECT_EQ(all.size(), 300u);
  int ones = 0;
  for (auto i : s.test) ones += y[i];
  EXPECT_EQ(ones, 50);
}

TEST(KFold, SeparableDataIsDiagonal) {
  auto data = blobs(60, 3, 6.0, 13);
  auto r = kfold_confusion(data, LearnerConfig{}, 5, 0.5, 1);
  EXPECT_EQ(r.confusion.total(), 60);
  EXPECT_EQ(r.confusion.counts[0][1] + r.confusion.counts[1][0], 0);
}

TEST(KFold, ShuffledLabelsNearChance) {
  auto data = blobs(200, 3, 0.0, 14);
  auto r = kfold_confusion(data, LearnerConfig{}, 5, 0.5, 2);
  EXPECT_NEAR(r.confusion.accuracy(), 0.5, 0.1);
}

TEST(FitPipeline, SelectedColumnsAndRawScoring) {
  auto data = blobs(80, 6, 0.0, 15);
  // Make column 4 informative, scaled far from unit variance.
  Eigen::MatrixXd x = data.matrix();
  const auto y = data.labels();
  for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, 4) = 1000.0 * (y[static_cast<std::size_t>(i)] + 0.2 * x(i, 0));
  auto raw = make_dataset(x, y);
  SelectionConfig sel;
  sel.d_prime = 2;
  sel.bootstraps_B_s = 10;
  auto model = fit_pipeline(raw, LearnerConfig{}, sel);
  ASSERT_EQ(model.selected_feature_indices.size(), 2u);
  EXPECT_EQ(model.selected_feature_indices[0], 4u);
  EXPECT_EQ(model.selected_feature_names[0], "c4");
  EXPECT_EQ(model.input_dim(), 2u);
  EXPECT_GT(roc_auc(as_vector(model.score_dataset(raw)), y), 0.95);
}
