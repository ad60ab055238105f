#include "evid/select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>

namespace evid {
namespace {

constexpr double kConstantStd = 1e-12;
constexpr int kMaxRedraws = 100;

void check_pair(std::span<const double> feature, std::span<const int> labels) {
  if (feature.size() != labels.size()) throw InvalidInput("feature and label vectors differ in length");
  if (feature.empty()) throw InvalidInput("empty feature vector");
}

// Group sizes keyed by label value.
std::map<int, std::size_t> label_counts(std::span<const int> labels) {
  std::map<int, std::size_t> counts;
  for (int y : labels) ++counts[y];
  return counts;
}

// psi(1..n) through psi(m + 1) = psi(m) + 1 / m.
std::vector<double> digamma_table(std::size_t n) {
  std::vector<double> psi(n + 1, 0.0);
  if (n >= 1) psi[1] = -std::numbers::egamma;
  for (std::size_t m = 1; m < n; ++m) psi[m + 1] = psi[m] + 1.0 / static_cast<double>(m);
  return psi;
}

}  // namespace

std::string_view to_string(Measure m) noexcept {
  switch (m) {
    case Measure::F: return "F";
    case Measure::SIS: return "S";
    case Measure::MI: return "M";
  }
  return "?";
}

Measure parse_measure(std::string_view name) {
  if (name == "F") return Measure::F;
  if (name == "S" || name == "SIS") return Measure::SIS;
  if (name == "M" || name == "MI") return Measure::MI;
  throw InvalidInput("unknown selection measure '" + std::string(name) + "' (expected F, S or M)");
}

void SelectionConfig::validate(std::size_t d) const {
  if (d_prime < 1 || static_cast<std::size_t>(d_prime) > d) {
    throw InvalidInput("d' = " + std::to_string(d_prime) + " must lie in [1, " + std::to_string(d) + "]");
  }
  if (bootstraps_B_s < 1) throw InvalidInput("B_s must be >= 1");
  if (!(percentile > 0.0 && percentile <= 100.0)) throw InvalidInput("percentile must lie in (0, 100]");
  if (knn_k < 1) throw InvalidInput("k must be >= 1");
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd NormStats::apply(const Eigen::MatrixXd& x) const {
  if (x.cols() != mean.size()) {
    throw InvalidInput("normalization expects " + std::to_string(mean.size()) + " features, got " +
                       std::to_string(x.cols()));
  }
  Eigen::MatrixXd out = x.rowwise() - mean.transpose();
  out.array().rowwise() /= stddev.transpose().array();
  return out;
}

Dataset NormStats::apply(const Dataset& data) const {
  const Eigen::MatrixXd z = apply(data.matrix());
  Dataset out(data.feature_names());
  for (std::size_t r = 0; r < data.size(); ++r) {
    FeatureVector row = data.rows()[r];
    for (std::size_t j = 0; j < row.values.size(); ++j) {
      row.values[j] = z(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
    }
    out.add(std::move(row));
  }
  return out;
}

NormStats NormStats::project(const std::vector<std::size_t>& indices) const {
  NormStats out;
  out.mean.resize(static_cast<Eigen::Index>(indices.size()));
  out.stddev.resize(out.mean.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= dim()) throw InvalidInput("feature index out of range in normalization stats");
    const auto j = static_cast<Eigen::Index>(indices[k]);
    out.mean[static_cast<Eigen::Index>(k)] = mean[j];
    out.stddev[static_cast<Eigen::Index>(k)] = stddev[j];
    out.constant.push_back(constant[indices[k]]);
  }
  return out;
}

NormStats zscore_fit(const Eigen::MatrixXd& x) {
  if (x.rows() < 2) throw InvalidInput("z-score needs at least 2 training rows");
  NormStats s;
  s.mean = x.colwise().mean().transpose();
  s.stddev.resize(x.cols());
  s.constant.assign(static_cast<std::size_t>(x.cols()), false);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double sd = std::sqrt((x.col(j).array() - s.mean[j]).square().mean());
    if (sd < kConstantStd) {
      s.stddev[j] = 1.0;
      s.constant[static_cast<std::size_t>(j)] = true;
    } else {
      s.stddev[j] = sd;
    }
  }
  return s;
}

Normalized zscore_fit_transform(const Dataset& train) {
  Normalized out;
  out.stats = zscore_fit(train.matrix());
  out.data = out.stats.apply(train);
  return out;
}

// ---------------------------------------------------------------------------

double f_value(std::span<const double> feature, std::span<const int> labels) {
  check_pair(feature, labels);
  std::map<int, std::pair<double, std::size_t>> groups;  // label -> (sum, count)
  for (std::size_t i = 0; i < feature.size(); ++i) {
    auto& g = groups[labels[i]];
    g.first += feature[i];
    ++g.second;
  }
  if (groups.size() < 2) throw InvalidInput("F-value needs both classes present");
  const auto n = static_cast<double>(feature.size());
  const auto k = static_cast<double>(groups.size());
  if (n <= k) throw InvalidInput("F-value needs more samples than classes");

  const double grand = std::accumulate(feature.begin(), feature.end(), 0.0) / n;
  std::map<int, double> group_mean;
  double ss_between = 0.0;
  for (const auto& [label, g] : groups) {
    const double mu = g.first / static_cast<double>(g.second);
    group_mean[label] = mu;
    ss_between += static_cast<double>(g.second) * (mu - grand) * (mu - grand);
  }
  double ss_within = 0.0;
  for (std::size_t i = 0; i < feature.size(); ++i) {
    const double r = feature[i] - group_mean[labels[i]];
    ss_within += r * r;
  }
  const double ms_between = ss_between / (k - 1.0);
  const double ms_within = ss_within / (n - k);
  if (ms_within <= 0.0) return ms_between > 0.0 ? kFValueCap : 0.0;
  return std::min(ms_between / ms_within, kFValueCap);
}

SisScore sis_score(std::span<const double> feature, std::span<const int> labels) {
  check_pair(feature, labels);
  const auto n = static_cast<double>(feature.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < feature.size(); ++i) {
    mx += feature[i];
    my += labels[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < feature.size(); ++i) {
    const double dx = feature[i] - mx;
    const double dy = labels[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0 || std::sqrt(sxx / n) < kConstantStd) return {0.0, true};
  return {std::min(1.0, std::abs(sxy) / std::sqrt(sxx * syy)), false};
}

double mutual_information(std::span<const double> feature, std::span<const int> labels, int k,
                          std::uint64_t seed) {
  check_pair(feature, labels);
  if (k < 1) throw InvalidInput("MI needs k >= 1");
  const std::size_t n = feature.size();
  const auto counts = label_counts(labels);
  for (const auto& [label, count] : counts) {
    if (count <= static_cast<std::size_t>(k)) {
      throw InvalidInput("MI: class " + std::to_string(label) + " has " + std::to_string(count) +
                         " samples, needs more than k = " + std::to_string(k));
    }
  }

  // Standardize, then jitter so exact ties cannot occur.
  double mean = 0.0;
  for (double v : feature) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : feature) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(n));
  const double scale = sd < kConstantStd ? 1.0 : sd;

  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = (feature[i] - mean) / scale + 1e-10 * gauss(rng);

  std::vector<double> all = x;
  std::sort(all.begin(), all.end());
  const std::vector<double> psi = digamma_table(std::max(n, static_cast<std::size_t>(k)));

  double sum_psi_class = 0.0;
  double sum_psi_m = 0.0;
  for (const auto& [label, count] : counts) {
    std::vector<double> cls;
    cls.reserve(count);
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i] == label) cls.push_back(x[i]);
    }
    std::sort(cls.begin(), cls.end());
    const auto c = static_cast<std::ptrdiff_t>(cls.size());
    for (std::ptrdiff_t j = 0; j < c; ++j) {
      // Walk outwards to the k-th nearest same-class neighbour.
      std::ptrdiff_t lo = j - 1, hi = j + 1;
      double radius = 0.0;
      for (int step = 0; step < k; ++step) {
        const double dl = lo >= 0 ? cls[static_cast<std::size_t>(j)] - cls[static_cast<std::size_t>(lo)]
                                  : std::numeric_limits<double>::infinity();
        const double dh = hi < c ? cls[static_cast<std::size_t>(hi)] - cls[static_cast<std::size_t>(j)]
                                 : std::numeric_limits<double>::infinity();
        if (dl <= dh) {
          radius = dl;
          --lo;
        } else {
          radius = dh;
          ++hi;
        }
      }
      const double v = cls[static_cast<std::size_t>(j)];
      // Samples strictly inside the radius, the point itself included. Distances are
      // formed exactly as above so the k-th neighbour never counts through rounding.
      const auto pos = std::lower_bound(all.begin(), all.end(), v) - all.begin();
      std::ptrdiff_t m = 0;
      for (auto t = pos - 1; t >= 0 && v - all[static_cast<std::size_t>(t)] < radius; --t) ++m;
      for (auto t = pos; t < static_cast<std::ptrdiff_t>(n) && all[static_cast<std::size_t>(t)] - v < radius; ++t) ++m;
      m = std::max<std::ptrdiff_t>(1, m);
      sum_psi_m += psi[static_cast<std::size_t>(m)];
    }
    sum_psi_class += static_cast<double>(count) * psi[count];
  }

  const auto nd = static_cast<double>(n);
  const double mi = psi[n] - sum_psi_class / nd + psi[static_cast<std::size_t>(k)] - sum_psi_m / nd;
  return std::max(0.0, mi);
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidInput("percentile of an empty set");
  if (!(q >= 0.0 && q <= 100.0)) throw InvalidInput("percentile q must lie in [0, 100]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0) return values[lo];
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

double filter_score(Measure measure, std::span<const double> feature, std::span<const int> labels, int knn_k,
                    std::uint64_t seed) {
  switch (measure) {
    case Measure::F: return f_value(feature, labels);
    case Measure::SIS: return sis_score(feature, labels).score;
    case Measure::MI: return mutual_information(feature, labels, knn_k, seed);
  }
  throw InvalidInput("unknown measure");
}

std::vector<std::size_t> bootstrap_resample(std::span<const int> labels, Rng& rng, int min_per_class) {
  const std::size_t n = labels.size();
  if (n == 0) throw InvalidInput("bootstrap of an empty dataset");
  const auto present = label_counts(labels);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<std::size_t> idx(n);
  for (int attempt = 0; attempt <= kMaxRedraws; ++attempt) {
    std::map<int, int> drawn;
    for (auto& i : idx) {
      i = pick(rng);
      ++drawn[labels[i]];
    }
    bool ok = true;
    for (const auto& [label, count] : present) {
      (void)count;
      if (drawn[label] < min_per_class) ok = false;
    }
    if (ok) return idx;
  }
  throw InvalidInput("bootstrap resample lost a class " + std::to_string(kMaxRedraws + 1) +
                     " times in a row; the training set is too small or too imbalanced");
}

SelectionResult bootstrap_select(const Dataset& train, const SelectionConfig& cfg) {
  cfg.validate(train.dim());
  if (train.count_label(EventClass::LineTrip) == 0 || train.count_label(EventClass::GenerationLoss) == 0) {
    throw InvalidInput("feature selection needs both classes in the training set");
  }
  const Eigen::MatrixXd x = train.matrix();
  const std::vector<int> y = train.labels();
  const auto d = x.cols();
  const int min_per_class = cfg.measure == Measure::MI ? cfg.knn_k + 1 : 1;

  SelectionResult out;
  out.score_table.resize(d, cfg.bootstraps_B_s);
  std::vector<double> column(y.size());
  std::vector<int> yb(y.size());
  for (int b = 0; b < cfg.bootstraps_B_s; ++b) {
    Rng rng(derive_seed(cfg.rng_seed, static_cast<std::uint64_t>(b)));
    const auto idx = bootstrap_resample(y, rng, min_per_class);
    const std::uint64_t jitter_seed = rng();
    for (std::size_t r = 0; r < idx.size(); ++r) yb[r] = y[idx[r]];
    for (Eigen::Index j = 0; j < d; ++j) {
      for (std::size_t r = 0; r < idx.size(); ++r) column[r] = x(static_cast<Eigen::Index>(idx[r]), j);
      out.score_table(j, b) = filter_score(cfg.measure, column, yb, cfg.knn_k, jitter_seed);
    }
  }

  out.mean_score = out.score_table.rowwise().mean();
  out.percentile_score.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    std::vector<double> row(out.score_table.row(j).begin(), out.score_table.row(j).end());
    out.percentile_score[j] = percentile(std::move(row), cfg.percentile);
  }

  std::vector<std::size_t> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return out.percentile_score[static_cast<Eigen::Index>(a)] > out.percentile_score[static_cast<Eigen::Index>(b)];
  });
  order.resize(static_cast<std::size_t>(cfg.d_prime));
  out.selected = std::move(order);
  return out;
}

}  // namespace evid
