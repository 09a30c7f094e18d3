#include "ionet/evaluation.hpp"

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "ionet/error.hpp"
#include "ionet/rng.hpp"
#include "ionet/simulator.hpp"
#include "ionet/window_model.hpp"

namespace ionet {
namespace {

// Straight truth along x at 1 m/s, 100 Hz.
std::vector<TruthPose> straight(double seconds) {
  std::vector<TruthPose> truth;
  const auto n = static_cast<std::size_t>(std::llround(seconds * 100.0));
  for (std::size_t k = 0; k <= n; ++k) {
    TruthPose p;
    p.t = static_cast<double>(k) * 0.01;
    p.position = Vec3(p.t, 0, 0);
    p.velocity = Vec3(1, 0, 0);
    truth.push_back(p);
  }
  return truth;
}

std::vector<TrackPoint> as_track(std::span<const TruthPose> truth, double dx = 0.0, double dy = 0.0) {
  std::vector<TrackPoint> track;
  for (const auto& p : truth) track.push_back({p.t, {p.position.x() + dx, p.position.y() + dy, 0.0}});
  return track;
}

ErrorSeries series_of(std::vector<double> errors) {
  ErrorSeries s;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    s.t.push_back(static_cast<double>(i));
    s.distance.push_back(static_cast<double>(i));
  }
  s.error = std::move(errors);
  return s;
}

TEST(PositionErrors, PerfectEstimate) {
  const auto truth = straight(10.0);
  const auto s = position_errors(as_track(truth), truth);
  EXPECT_EQ(s.size(), truth.size());
  for (double e : s.error) EXPECT_EQ(e, 0.0);
  EXPECT_NEAR(s.distance.back(), 10.0, 1e-9);
}

TEST(PositionErrors, ConstantOffset) {
  const auto truth = straight(10.0);
  for (double e : position_errors(as_track(truth, 1.0, 0.0), truth).error) EXPECT_NEAR(e, 1.0, 1e-12);
}

TEST(PositionErrors, RotatedEstimate) {
  // Estimate walks north instead of east: at distance d the gap is d·√2.
  const auto truth = straight(10.0);
  std::vector<TrackPoint> est;
  for (const auto& p : truth) est.push_back({p.t, {0.0, p.position.x(), 0.0}});
  const auto s = position_errors(est, truth);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(s.error[i], s.distance[i] * std::sqrt(2.0), 1e-9);
}

TEST(PositionErrors, NearestTimestampWithinHalfSample) {
  const auto truth = straight(1.0);
  const std::vector<TrackPoint> est{{0.504, {0.5, 0.0, 0.0}}, {0.5051, {0.51, 0.0, 0.0}}, {5.0, {0, 0, 0}}};
  const auto s = position_errors(est, truth);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_NEAR(s.error[0], 0.0, 1e-12);
  EXPECT_NEAR(s.error[1], 0.0, 1e-12);
}

TEST(PositionErrors, NoOverlap) {
  const auto truth = straight(1.0);
  const std::vector<TrackPoint> est{{7.0, {}}};
  try {
    position_errors(est, truth);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kAlignment);
  }
}

TEST(Percentile, Examples) {
  EXPECT_EQ(percentile_error(series_of({1, 1, 1, 1})), 1.0);
  EXPECT_EQ(percentile_error(series_of({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}), 0.9), 9.0);
  EXPECT_EQ(percentile_error(series_of({10, 9, 8, 7, 6, 5, 4, 3, 2, 1}), 1.0), 10.0);
  EXPECT_THROW(percentile_error(ErrorSeries{}), Error);
}

TEST(Percentile, HalfNormal) {
  Rng rng(2024);
  std::vector<double> x(100000);
  for (double& v : x) v = std::abs(rng.normal());
  EXPECT_NEAR(percentile_error(series_of(x), 0.9), 1.645, 0.05);
}

TEST(Cdf, StepAndConsistency) {
  const auto flat = error_cdf(series_of({1, 1, 1}), 0.5);
  ASSERT_EQ(flat.size(), 3u);
  EXPECT_EQ(flat[1].fraction, 0.0);
  EXPECT_EQ(flat[2].error, 1.0);
  EXPECT_EQ(flat[2].fraction, 1.0);

  Rng rng(8);
  std::vector<double> x(1000);
  for (double& v : x) v = rng.uniform(0.0, 5.0);
  const auto s = series_of(x);
  for (double f : {0.1, 0.25, 0.5, 0.75, 0.9, 0.99}) {
    const double e = percentile_error(s, f);
    EXPECT_GE(cdf_at(s, e), f);
    EXPECT_LT(cdf_at(s, std::nextafter(e, 0.0)), f);
  }
  const auto curve = error_cdf(s, 0.1);
  for (const auto& point : curve) EXPECT_DOUBLE_EQ(point.fraction, cdf_at(s, point.error));
  EXPECT_EQ(curve.back().fraction, 1.0);
}

TEST(ErrorAtDistance, Marks) {
  const auto truth = straight(120.0);
  const std::vector<double> marks{50.0, 100.0};
  const auto perfect = error_at_distance(position_errors(as_track(truth), truth), marks);
  ASSERT_EQ(perfect.size(), 3u);
  for (double e : perfect) EXPECT_EQ(e, 0.0);

  std::vector<TrackPoint> drift;
  for (const auto& p : truth) drift.push_back({p.t, {p.position.x() * 1.01, 0.0, 0.0}});
  const auto d = error_at_distance(position_errors(drift, truth), marks);
  EXPECT_NEAR(d[0], 0.5, 1e-9);
  EXPECT_NEAR(d[1], 1.0, 1e-9);
  EXPECT_NEAR(d[2], 1.2, 1e-9);

  const std::vector<double> far{500.0};
  try {
    error_at_distance(position_errors(drift, truth), far);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kOutOfRange);
  }
}

TEST(ErrorAtDistance, StrapdownWorseThanChainedLabels) {
  MotionProfile p;
  p.duration = 120.0;
  p.random_turns = true;
  const auto truth = synth_walk(p, 4);
  const GravityVector g;
  const auto clean = inverse_imu(truth, g);
  NoiseModel bias;
  bias.accel.bias = Vec3(0.05, -0.03, 0.0);
  const auto noisy = corrupt(clean, bias);

  const NavState init{truth[0].attitude, truth[0].velocity, truth[0].position};
  const auto sins = planar_track(integrate_track(noisy, init, g, 0.01), noisy);
  const auto windows = segment(clean, 200, 200);
  const auto poses = chain({0, 0, 0}, label_windows(truth, windows));
  std::vector<TrackPoint> chained;
  for (std::size_t i = 0; i < poses.size(); ++i) chained.push_back({truth[windows[i].start_index + 200].t, poses[i]});

  const std::vector<double> marks{50.0, 100.0};
  const auto a = error_at_distance(position_errors(sins, truth), marks);
  const auto b = error_at_distance(position_errors(chained, truth), marks);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_GT(a[i], b[i]);
}

}  // namespace
}  // namespace ionet
