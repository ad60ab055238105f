#pragma once

#include "evid/core.hpp"

#include <span>
#include <vector>

namespace evid {

/// Linear least-squares fit w0 + w1 * n over the sample index n.
struct DetrendFit {
  double intercept_w0{0.0};
  double slope_w1{0.0};
};

struct DetrendedStream {
  std::vector<double> values;
  DetrendFit fit;
};

/// Removes the least-squares line (regressor = sample index) from one stream.
/// Requires N >= 2 and finite samples.
[[nodiscard]] DetrendedStream detrend_stream(std::span<const double> samples);

/// Detrends every stream of every channel; id, label and rate are kept.
[[nodiscard]] EventRecord detrend_event(const EventRecord& record);

}  // namespace evid
