#include "ionet/strapdown.hpp"

#include <cmath>
#include <sstream>

#include "ionet/error.hpp"
#include "ionet/so3.hpp"

namespace ionet {

namespace {

constexpr int kReorthonormalizeEvery = 256;

bool finite(const ImuSample& s) {
  return std::isfinite(s.t) && s.a.allFinite() && s.w.allFinite();
}

}  // namespace

GravityVector::GravityVector(double g0) : g_(0.0, 0.0, -g0) {
  if (!std::isfinite(g0) || g0 < 9.7 || g0 > 9.9) {
    std::ostringstream msg;
    msg << "gravity magnitude " << g0 << " outside [9.7, 9.9]; use GravityVector::unchecked";
    throw Error(ErrorKind::kInvalidInput, msg.str());
  }
}

GravityVector GravityVector::unchecked(const Vec3& g) {
  if (!g.allFinite()) {
    throw Error(ErrorKind::kInvalidInput, "gravity vector must be finite");
  }
  return GravityVector(g, true);
}

NavState propagate(const NavState& state, const ImuSample& sample, double dt,
                   const GravityVector& g) {
  if (!finite(sample)) {
    throw Error(ErrorKind::kInvalidInput, "propagate: non-finite IMU sample");
  }
  if (!std::isfinite(dt) || dt <= 0.0) {
    throw Error(ErrorKind::kInvalidInput, "propagate: dt must be positive");
  }
  NavState next;
  next.C = so3::update_attitude(state.C, so3::rodrigues_increment(sample.w, dt));
  next.v = state.v + (state.C * sample.a + g.vector()) * dt;
  next.L = state.L + state.v * dt;
  return next;
}

Trajectory integrate_track(std::span<const ImuSample> samples, const NavState& initial,
                           const GravityVector& g, double dt) {
  if (samples.empty()) {
    throw Error(ErrorKind::kEmptyInput, "integrate_track: empty IMU stream");
  }
  Trajectory out;
  out.reserve(samples.size());
  NavState state = initial;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (k > 0 && !(samples[k].t > samples[k - 1].t)) {
      std::ostringstream msg;
      msg << "integrate_track: timestamps not strictly increasing at sample " << k;
      throw Error(ErrorKind::kInvalidInput, msg.str());
    }
    state = propagate(state, samples[k], dt, g);
    if ((k + 1) % kReorthonormalizeEvery == 0) {
      state.C = so3::reorthonormalize(state.C);
    }
    out.push_back(state);
  }
  return out;
}

std::vector<TrackPoint> planar_track(const Trajectory& trajectory,
                                     std::span<const ImuSample> samples) {
  if (trajectory.size() != samples.size()) {
    throw Error(ErrorKind::kAlignment, "planar_track: trajectory and samples differ in length");
  }
  std::vector<TrackPoint> track;
  track.reserve(trajectory.size());
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    const NavState& s = trajectory[k];
    // Tumbling attitudes can leave the body x-axis vertical; keep the last heading.
    double psi = track.empty() ? 0.0 : track.back().pose.psi;
    if (std::hypot(s.C(0, 0), s.C(1, 0)) >= 1e-6) psi = so3::yaw_of(s.C);
    track.push_back({samples[k].t, Pose2D{s.L.x(), s.L.y(), psi}});
  }
  return track;
}

TiltDrift tilt_drift(double tilt, double duration, double g0) {
  const double accel = g0 * std::sin(std::abs(tilt));
  return {accel, accel * duration, 0.5 * accel * duration * duration};
}

}  // namespace ionet
