#include "evid/preprocess.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace evid;

TEST(Detrend, AlternatingSequenceByHand) {
  // Fit of [0, 1, 0, 1] on n = 0..3: slope 0.2, intercept 0.2.
  const std::vector<double> y{0, 1, 0, 1};
  auto out = detrend_stream(y);
  EXPECT_NEAR(out.fit.slope_w1, 0.2, 1e-12);
  EXPECT_NEAR(out.fit.intercept_w0, 0.2, 1e-12);
  const double expected[] = {-0.2, 0.6, -0.6, 0.2};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(out.values[i], expected[i], 1e-12);
}

TEST(Detrend, ExactLineBecomesZero) {
  std::vector<double> y;
  for (int n = 0; n < 50; ++n) y.push_back(3.5 - 0.25 * n);
  auto out = detrend_stream(y);
  EXPECT_NEAR(out.fit.intercept_w0, 3.5, 1e-10);
  EXPECT_NEAR(out.fit.slope_w1, -0.25, 1e-12);
  for (double v : out.values) EXPECT_NEAR(v, 0.0, 1e-10);
}

TEST(Detrend, ResidualOrthogonalToRegressors) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> y(37);
    for (double& v : y) v = 5.0 * g(rng);
    auto out = detrend_stream(y);
    double s0 = 0, s1 = 0;
    for (std::size_t n = 0; n < y.size(); ++n) {
      s0 += out.values[n];
      s1 += static_cast<double>(n) * out.values[n];
    }
    EXPECT_NEAR(s0, 0.0, 1e-9);
    EXPECT_NEAR(s1, 0.0, 1e-7);
  }
}

TEST(Detrend, Idempotent) {
  std::vector<double> y{3, 1, 4, 1, 5, 9, 2, 6};
  auto once = detrend_stream(y);
  auto twice = detrend_stream(once.values);
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(once.values[i], twice.values[i], 1e-12);
}

TEST(Detrend, RejectsShortOrNonFinite) {
  EXPECT_THROW((void)detrend_stream(std::vector<double>{1.0}), InvalidInput);
  EXPECT_THROW((void)detrend_stream(std::vector<double>{1.0, std::numeric_limits<double>::infinity(), 2.0}),
               InvalidInput);
}

TEST(Detrend, EventKeepsMetadataAndShapes) {
  EventRecord e;
  e.event_id = "x";
  e.label = EventClass::GenerationLoss;
  e.sample_rate_hz = 60.0;
  Eigen::MatrixXd m(2, 5);
  m << 1, 2, 3, 4, 5, 0, 1, 0, 1, 0;
  e.channels[ChannelKind::VPA] = m;
  auto d = detrend_event(e);
  EXPECT_EQ(d.event_id, "x");
  EXPECT_EQ(d.label, EventClass::GenerationLoss);
  EXPECT_EQ(d.sample_rate_hz, 60.0);
  const auto& out = d.channels.at(ChannelKind::VPA);
  ASSERT_EQ(out.rows(), 2);
  ASSERT_EQ(out.cols(), 5);
  EXPECT_NEAR(out.row(0).norm(), 0.0, 1e-12);
  EXPECT_GT(out.row(1).norm(), 0.1);
}
