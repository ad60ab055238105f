#include "evid/baseline.hpp"

#include "evid/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace evid {

std::string_view to_string(AngleAggregation a) noexcept { return a == AngleAggregation::Mean ? "mean" : "max"; }

AngleAggregation parse_aggregation(std::string_view name) {
  if (name == "mean") return AngleAggregation::Mean;
  if (name == "max") return AngleAggregation::Max;
  throw InvalidInput("unknown angle aggregation '" + std::string(name) + "' (expected mean or max)");
}

EventSubspace event_subspace(const Eigen::MatrixXd& data, int r) {
  if (r < 1 || r > std::min(data.rows(), data.cols())) {
    throw InvalidInput("subspace rank r = " + std::to_string(r) + " must lie in [1, min(m, N)]");
  }
  if (!data.allFinite()) throw InvalidInput("event window contains non-finite samples");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(data, Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double tol = s.size() > 0 && s[0] > 0.0
                         ? s[0] * static_cast<double>(std::max(data.rows(), data.cols())) *
                               std::numeric_limits<double>::epsilon()
                         : 0.0;
  Eigen::Index rank = 0;
  while (rank < s.size() && s[rank] > tol) ++rank;

  EventSubspace out;
  const Eigen::Index keep = std::min<Eigen::Index>(rank, r);
  out.basis.resize(data.cols(), r);
  out.basis.leftCols(keep) = svd.matrixV().leftCols(keep);
  if (keep < r) {
    // Complete with canonical directions, Gram-Schmidt against the kept columns.
    out.padded = true;
    Eigen::Index filled = keep;
    for (Eigen::Index e = 0; e < data.cols() && filled < r; ++e) {
      Eigen::VectorXd v = Eigen::VectorXd::Unit(data.cols(), e);
      for (int pass = 0; pass < 2; ++pass) {
        v -= out.basis.leftCols(filled) * (out.basis.leftCols(filled).transpose() * v);
      }
      const double norm = v.norm();
      if (norm > 0.5) out.basis.col(filled++) = v / norm;
    }
  }
  return out;
}

Eigen::VectorXd principal_angles(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows()) throw InvalidInput("principal angles need equal ambient dimension");
  if (a.cols() == 0 || b.cols() == 0) throw InvalidInput("principal angles of an empty basis");
  const Eigen::MatrixXd m = a.transpose() * b;
  const Eigen::Index q = std::min(a.cols(), b.cols());

  // Cosines, descending -> angles ascending.
  Eigen::VectorXd cosines = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues().head(q);
  // Sines from the part of the smaller basis outside the other span, ascending.
  const Eigen::MatrixXd& small = a.cols() <= b.cols() ? a : b;
  const Eigen::MatrixXd& large = a.cols() <= b.cols() ? b : a;
  const Eigen::MatrixXd resid = small - large * (large.transpose() * small);
  Eigen::VectorXd sines = Eigen::JacobiSVD<Eigen::MatrixXd>(resid).singularValues();
  std::sort(sines.begin(), sines.end());

  Eigen::VectorXd angles(q);
  for (Eigen::Index k = 0; k < q; ++k) {
    const double c = std::clamp(cosines[k], 0.0, 1.0);
    const double s = k < sines.size() ? std::clamp(sines[k], 0.0, 1.0) : 0.0;
    angles[k] = c * c < 0.5 ? std::acos(c) : std::asin(s);
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

double subspace_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, AngleAggregation aggregation) {
  const Eigen::VectorXd angles = principal_angles(a, b);
  return aggregation == AngleAggregation::Mean ? angles.mean() : angles.maxCoeff();
}

SubspaceDictionary::SubspaceDictionary(std::vector<DictionaryEntry> entries, int r, int window_N,
                                       AngleAggregation aggregation)
    : entries_(std::move(entries)), r_(r), window_N_(window_N), aggregation_(aggregation) {
  if (entries_.empty()) throw InvalidInput("subspace dictionary needs at least one entry");
  if (r_ < 1 || window_N_ < r_) throw InvalidInput("dictionary needs 1 <= r <= N");
  for (const auto& e : entries_) {
    if (e.basis.rows() != window_N_ || e.basis.cols() != r_) {
      throw InvalidInput("dictionary entry " + e.event_id + " has a " + std::to_string(e.basis.rows()) + "x" +
                         std::to_string(e.basis.cols()) + " basis, expected " + std::to_string(window_N_) + "x" +
                         std::to_string(r_));
    }
  }
}

Classification classify_by_dictionary(const Eigen::MatrixXd& test_event, const SubspaceDictionary& dict) {
  if (test_event.cols() != dict.window_N()) {
    throw InvalidInput("test window has " + std::to_string(test_event.cols()) + " samples, dictionary uses " +
                       std::to_string(dict.window_N()));
  }
  const Eigen::MatrixXd basis = event_subspace(test_event, dict.r()).basis;
  Classification best;
  best.distance = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < dict.entries().size(); ++k) {
    const double dist = subspace_distance(basis, dict.entries()[k].basis, dict.aggregation());
    if (dist < best.distance) {
      best = {dict.entries()[k].label, dist, k};
    }
  }
  return best;
}

Eigen::MatrixXd baseline_window(const EventRecord& event, const BaselineConfig& cfg) {
  auto it = event.channels.find(cfg.channel);
  if (it == event.channels.end()) {
    throw InvalidInput("event " + event.event_id + " has no " + std::string(to_string(cfg.channel)) + " channel");
  }
  const Eigen::MatrixXd& data = it->second;
  if (data.cols() < cfg.window_N) {
    throw InvalidInput("event " + event.event_id + " has " + std::to_string(data.cols()) +
                       " samples, baseline window needs " + std::to_string(cfg.window_N));
  }
  Eigen::MatrixXd window = data.leftCols(cfg.window_N);
  if (cfg.detrend) {
    std::vector<double> row(static_cast<std::size_t>(cfg.window_N));
    for (Eigen::Index i = 0; i < window.rows(); ++i) {
      for (Eigen::Index t = 0; t < window.cols(); ++t) row[static_cast<std::size_t>(t)] = window(i, t);
      const auto d = detrend_stream(row);
      for (Eigen::Index t = 0; t < window.cols(); ++t) window(i, t) = d.values[static_cast<std::size_t>(t)];
    }
  }
  return window;
}

KFoldResult baseline_kfold(const std::vector<EventRecord>& events, const BaselineConfig& cfg,
                           const std::vector<int>& fold_of_row) {
  if (fold_of_row.size() != events.size()) throw InvalidInput("fold assignment length differs from the event list");
  const int folds = events.empty() ? 0 : *std::max_element(fold_of_row.begin(), fold_of_row.end()) + 1;
  if (folds < 2) throw InvalidInput("k-fold needs at least 2 folds");

  std::vector<Eigen::MatrixXd> bases;
  bases.reserve(events.size());
  for (const auto& e : events) bases.push_back(event_subspace(baseline_window(e, cfg), cfg.r).basis);

  KFoldResult out;
  out.fold_of_row = fold_of_row;
  out.predicted.assign(events.size(), -1);
  for (int f = 0; f < folds; ++f) {
    std::vector<DictionaryEntry> entries;
    for (std::size_t k = 0; k < events.size(); ++k) {
      if (fold_of_row[k] != f) entries.push_back({events[k].event_id, events[k].label, bases[k]});
    }
    const SubspaceDictionary dict(std::move(entries), cfg.r, cfg.window_N, cfg.aggregation);
    for (std::size_t k = 0; k < events.size(); ++k) {
      if (fold_of_row[k] != f) continue;
      double best = std::numeric_limits<double>::infinity();
      EventClass label = EventClass::LineTrip;
      for (const auto& entry : dict.entries()) {
        const double dist = subspace_distance(bases[k], entry.basis, cfg.aggregation);
        if (dist < best) {
          best = dist;
          label = entry.label;
        }
      }
      const int pred = to_int(label);
      out.predicted[k] = pred;
      ++out.confusion.counts[static_cast<std::size_t>(to_int(events[k].label))][static_cast<std::size_t>(pred)];
    }
  }
  return out;
}

}  // namespace evid
