#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ionet/strapdown.hpp"
#include "ionet/types.hpp"

namespace ionet {

struct StepEvent {
  std::size_t index = 0;      // sample position of the peak
  double peak_accel = 0.0;    // filtered |a| at the peak, m/s²
  double valley_accel = 0.0;  // filtered |a| minimum since the previous step, m/s²
};

struct PdrConfig {
  std::size_t smoothing_samples = 25;  // moving-average width (0.25 s at 100 Hz)
  double peak_threshold = 0.6;         // m/s² above gravity
  double min_step_interval = 0.3;      // s
  // K in K·(peak − valley)^¼, calibrated on a 10 min simulated walk at
  // 0.8–1.5 m/s (see calibrate_step_coefficient).
  double step_coefficient = 0.56;
  double gravity = kStandardGravity;

  /// Throws kInvalidInput unless min_step_interval > 0 and K > 0.
  void validate() const;
};

/// Symmetric moving average, truncated at the stream ends.
std::vector<double> smooth(std::span<const double> values, std::size_t width);

/// Local maxima of the smoothed acceleration magnitude that exceed
/// gravity + threshold, at least min_step_interval apart (the larger peak
/// wins). Throws kUnsupportedRate below 50 Hz.
std::vector<StepEvent> detect_steps(std::span<const ImuSample> stream, const PdrConfig& cfg);

/// K·(peak − valley)^¼; zero when peak == valley.
double step_length(const StepEvent& event, const PdrConfig& cfg);

/// K that makes the summed step lengths of `stream` equal `distance`.
double calibrate_step_coefficient(std::span<const ImuSample> stream, double distance,
                                  const PdrConfig& cfg);

/// Start pose, one pose per detected step, then the last position held to
/// the final sample. Heading is the yaw of the gyro-integrated attitude,
/// starting level at start.psi.
std::vector<TrackPoint> pdr_track(std::span<const ImuSample> stream, const Pose2D& start,
                                  const PdrConfig& cfg);

}  // namespace ionet
