#include "evid/preprocess.hpp"

#include <cmath>

namespace evid {

DetrendedStream detrend_stream(std::span<const double> samples) {
  const std::size_t count = samples.size();
  if (count < 2) throw InvalidInput("detrend needs at least 2 samples");
  for (double v : samples) {
    if (!std::isfinite(v)) throw InvalidInput("detrend input contains a non-finite sample");
  }

  // Centered normal equations: slope = sum((n - n_bar)(y - y_bar)) / sum((n - n_bar)^2).
  const double n = static_cast<double>(count);
  const double n_bar = (n - 1.0) / 2.0;
  double y_bar = 0.0;
  for (double v : samples) y_bar += v;
  y_bar /= n;

  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double dx = static_cast<double>(i) - n_bar;
    sxy += dx * (samples[i] - y_bar);
    sxx += dx * dx;
  }

  DetrendedStream out;
  out.fit.slope_w1 = sxy / sxx;
  out.fit.intercept_w0 = y_bar - out.fit.slope_w1 * n_bar;
  out.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.values[i] = (samples[i] - y_bar) - out.fit.slope_w1 * (static_cast<double>(i) - n_bar);
  }
  return out;
}

EventRecord detrend_event(const EventRecord& record) {
  EventRecord out;
  out.event_id = record.event_id;
  out.label = record.label;
  out.sample_rate_hz = record.sample_rate_hz;
  for (const auto& [kind, samples] : record.channels) {
    Eigen::MatrixXd detrended(samples.rows(), samples.cols());
    std::vector<double> row(static_cast<std::size_t>(samples.cols()));
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
      for (Eigen::Index n = 0; n < samples.cols(); ++n) row[static_cast<std::size_t>(n)] = samples(i, n);
      const auto fit = detrend_stream(row);
      for (Eigen::Index n = 0; n < samples.cols(); ++n) detrended(i, n) = fit.values[static_cast<std::size_t>(n)];
    }
    out.channels.emplace(kind, std::move(detrended));
  }
  return out;
}

}  // namespace evid
