#include "ionet/pdr.hpp"

#include <algorithm>
#include <cmath>

#include "ionet/error.hpp"
#include "ionet/so3.hpp"
#include "ionet/window_model.hpp"

namespace ionet {

void PdrConfig::validate() const {
  if (!(min_step_interval > 0.0)) throw Error(ErrorKind::kInvalidInput, "min_step_interval must be positive");
  if (!(step_coefficient > 0.0)) throw Error(ErrorKind::kInvalidInput, "step coefficient must be positive");
  if (smoothing_samples == 0) throw Error(ErrorKind::kInvalidInput, "smoothing window must be positive");
}

std::vector<double> smooth(std::span<const double> values, std::size_t width) {
  const std::size_t n = values.size();
  std::vector<double> out(n);
  if (n == 0) return out;
  const std::size_t half = width / 2;
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + values[i];
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n, i + half + 1);
    out[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }
  return out;
}

std::vector<StepEvent> detect_steps(std::span<const ImuSample> stream, const PdrConfig& cfg) {
  cfg.validate();
  if (stream.size() < 3) return {};
  const double dt = uniform_dt(stream);
  if (1.0 / dt < 50.0 - 1e-9) {
    throw Error(ErrorKind::kUnsupportedRate, "step detection needs at least 50 Hz sampling");
  }
  std::vector<double> magnitude(stream.size());
  for (std::size_t k = 0; k < stream.size(); ++k) magnitude[k] = stream[k].a.norm();
  const std::vector<double> f = smooth(magnitude, cfg.smoothing_samples);

  const auto min_gap = static_cast<std::size_t>(std::ceil(cfg.min_step_interval / dt - 1e-9));
  auto valley_between = [&](std::size_t from, std::size_t to) {
    return *std::min_element(f.begin() + static_cast<std::ptrdiff_t>(from),
                             f.begin() + static_cast<std::ptrdiff_t>(to) + 1);
  };

  std::vector<StepEvent> steps;
  for (std::size_t i = 1; i + 1 < f.size(); ++i) {
    if (!(f[i] > f[i - 1] && f[i] >= f[i + 1])) continue;
    if (f[i] - cfg.gravity <= cfg.peak_threshold) continue;
    if (!steps.empty() && i - steps.back().index < min_gap) {
      if (f[i] <= steps.back().peak_accel) continue;
      steps.pop_back();
    }
    const std::size_t from = steps.empty() ? 0 : steps.back().index;
    steps.push_back({i, f[i], valley_between(from, i)});
  }
  return steps;
}

double step_length(const StepEvent& event, const PdrConfig& cfg) {
  const double swing = event.peak_accel - event.valley_accel;
  if (swing <= 0.0) return 0.0;
  return cfg.step_coefficient * std::sqrt(std::sqrt(swing));
}

double calibrate_step_coefficient(std::span<const ImuSample> stream, double distance,
                                  const PdrConfig& cfg) {
  PdrConfig unit = cfg;
  unit.step_coefficient = 1.0;
  double total = 0.0;
  for (const StepEvent& e : detect_steps(stream, unit)) total += step_length(e, unit);
  if (total <= 0.0) throw Error(ErrorKind::kInsufficientData, "no steps detected for calibration");
  return distance / total;
}

std::vector<TrackPoint> pdr_track(std::span<const ImuSample> stream, const Pose2D& start,
                                  const PdrConfig& cfg) {
  const std::vector<StepEvent> steps = detect_steps(stream, cfg);
  const double dt = uniform_dt(stream);
  std::vector<TrackPoint> track;
  track.reserve(steps.size() + 1);
  Pose2D pose = start;
  pose.psi = so3::wrap_angle(pose.psi);
  track.push_back({stream.front().t - dt, pose});

  RotationMatrix attitude = so3::rot_z(start.psi);
  std::size_t next = 0;
  for (std::size_t k = 0; k < stream.size(); ++k) {
    attitude = so3::update_attitude(attitude, so3::rodrigues_increment(stream[k].w, dt));
    if (next == steps.size() || k != steps[next].index) continue;
    pose.psi = so3::yaw_of(attitude);
    const double length = step_length(steps[next], cfg);
    pose.x += length * std::cos(pose.psi);
    pose.y += length * std::sin(pose.psi);
    track.push_back({stream[k].t, pose});
    ++next;
  }
  // Position held from the last step to the end of the stream.
  if (track.back().t < stream.back().t) {
    pose.psi = so3::yaw_of(attitude);
    track.push_back({stream.back().t, pose});
  }
  return track;
}

}  // namespace ionet
