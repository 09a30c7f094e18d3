#pragma once

#include <span>
#include <vector>

#include "ionet/types.hpp"

namespace ionet {

/// One IMU reading. `a` is specific force (what an accelerometer senses, so
/// +g0 on the up axis when at rest), `w` angular rate, both in the body frame.
struct ImuSample {
  double t = 0.0;
  Vec3 a = Vec3::Zero();
  Vec3 w = Vec3::Zero();
};

/// Strapdown latent state: attitude, velocity and location in the
/// navigation frame.
struct NavState {
  RotationMatrix C = RotationMatrix::Identity();
  Vec3 v = Vec3::Zero();
  Vec3 L = Vec3::Zero();
};

using Trajectory = std::vector<NavState>;

inline constexpr double kStandardGravity = 9.80665;

/// The gravitational field in the navigation frame. It points down, so the
/// default is (0, 0, −g0).
class GravityVector {
 public:
  GravityVector() : GravityVector(kStandardGravity) {}

  /// (0, 0, −g0); throws kInvalidInput unless g0 ∈ [9.7, 9.9].
  explicit GravityVector(double g0);

  /// Any finite vector, skipping the magnitude range check.
  static GravityVector unchecked(const Vec3& g);

  const Vec3& vector() const noexcept { return g_; }
  double magnitude() const noexcept { return g_.norm(); }

 private:
  explicit GravityVector(const Vec3& g, bool) : g_(g) {}
  Vec3 g_;
};

/// One explicit-Euler strapdown step:
///   C' = C·Ω(w, dt)
///   v' = v + (C·a + g)·dt   (pre-update attitude)
///   L' = L + v·dt           (pre-update velocity)
NavState propagate(const NavState& state, const ImuSample& sample, double dt,
                   const GravityVector& g);

/// Folds propagate over a uniformly sampled stream; element k is the state
/// after consuming sample k. Attitude is re-projected onto SO(3) every 256
/// steps. Throws kEmptyInput on an empty stream and kInvalidInput on
/// non-increasing timestamps.
Trajectory integrate_track(std::span<const ImuSample> samples, const NavState& initial,
                           const GravityVector& g, double dt);

/// Planar projection of a strapdown trajectory: (L.x, L.y, yaw(C)) stamped
/// with the sample times.
std::vector<TrackPoint> planar_track(const Trajectory& trajectory,
                                     std::span<const ImuSample> samples);

struct TiltDrift {
  double accel_error;     // m/s²
  double velocity_error;  // m/s
  double position_error;  // m
};

/// Horizontal drift caused by an uncorrected attitude tilt over `duration`:
/// a = g0 sin(tilt), v = a·T, p = a·T²/2.
TiltDrift tilt_drift(double tilt, double duration, double g0 = kStandardGravity);

}  // namespace ionet
