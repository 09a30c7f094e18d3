#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ionet/strapdown.hpp"
#include "ionet/types.hpp"

namespace ionet {

enum class MotionKind { kWalk, kTrolley, kScripted };

/// Constant turn rate applied over [start, start + duration).
struct TurnSegment {
  double start = 0.0;     // s
  double duration = 0.0;  // s
  double rate = 0.0;      // rad/s
};

/// Scripted motion piece: constant speed and turn rate.
struct ScriptSegment {
  double duration = 0.0;   // s
  double speed = 0.0;      // m/s
  double turn_rate = 0.0;  // rad/s
};

struct MotionProfile {
  MotionKind kind = MotionKind::kWalk;
  double duration = 60.0;  // s
  double rate = 100.0;     // Hz

  // Commanded speed. With speed_min < speed_max a new target in the range
  // is drawn every ~speed_change_interval seconds and blended smoothly.
  double speed_min = 1.0;
  double speed_max = 1.0;
  double speed_change_interval = 6.0;

  // Walk only. 0 derives the cadence from the gait model (stride grows
  // with speed); a positive value pins the cadence instead.
  double step_frequency = 0.0;
  double sway = 0.03;  // roll amplitude of the carried device, rad

  // Trolley only: speed-proportional wheel vibration (vertical velocity
  // jitter per m/s of speed).
  double rumble = 0.004;

  double initial_heading = 0.0;
  std::vector<TurnSegment> turns;
  bool random_turns = false;
  double max_turn_rate = 0.6;  // rad/s, for random_turns

  std::vector<ScriptSegment> script;  // scripted only
};

/// Additive and multiplicative errors of one sensor triad.
struct SensorErrors {
  Vec3 bias = Vec3::Zero();
  Vec3 bias_random_walk = Vec3::Zero();  // units/√s
  Vec3 white_noise = Vec3::Zero();       // units/√Hz
  Vec3 scale = Vec3::Zero();             // fraction, |s| <= 0.05
  Mat3 misalignment = Mat3::Zero();      // off-diagonal small angles, <= 2°

  bool is_zero() const;
};

/// x ← (I + M)·diag(1 + s)·x_true + b₀ + b_rw(t) + white.
struct NoiseModel {
  SensorErrors accel;
  SensorErrors gyro;
  std::uint64_t seed = 0;

  bool is_zero() const { return accel.is_zero() && gyro.is_zero(); }
  /// Throws kInvalidInput if scale or misalignment limits are violated.
  void validate() const;
};

/// Consumer-MEMS-like error model with biases drawn from `seed`. Strong
/// enough that open-loop strapdown diverges within a minute.
NoiseModel consumer_mems_noise(std::uint64_t seed);

/// Nominal step length (m) of the gait model at a walking speed.
double gait_step_length(double speed);

/// Walking gait: heading from the turn schedule, vertical bob and forward
/// speed oscillation at the cadence, a slow roll sway of the device.
/// Positions follow the Euler rule L(k) = L(k−1) + v(k−1)·dt.
std::vector<TruthPose> synth_walk(const MotionProfile& profile, std::uint64_t seed);

/// Wheeled motion: smooth speed profile, no periodic component.
std::vector<TruthPose> synth_trolley(const MotionProfile& profile, std::uint64_t seed);

/// Piecewise-constant speed and turn rate, level attitude.
std::vector<TruthPose> synth_scripted(const MotionProfile& profile);

/// Dispatches on profile.kind.
std::vector<TruthPose> synthesize(const MotionProfile& profile, std::uint64_t seed);

/// Exact inverse of the strapdown recursion: sample k − 1 carries
/// w = log(C(k−1)ᵀC(k))/dt and a = C(k−1)ᵀ((v(k) − v(k−1))/dt − g), stamped
/// with truth[k].t. Returns truth.size() − 1 samples. Throws kAliasing
/// if consecutive attitudes differ by about π or more.
std::vector<ImuSample> inverse_imu(std::span<const TruthPose> truth, const GravityVector& g);

/// Applies the sensor error model; deterministic in model.seed. An all-zero
/// model returns the input unchanged.
std::vector<ImuSample> corrupt(std::span<const ImuSample> samples, const NoiseModel& model);

/// Structured-text (JSON) configuration readers. Unknown keys are rejected
/// with kConfig.
MotionProfile parse_motion_profile(std::string_view json_text);
MotionProfile load_motion_profile(const std::filesystem::path& path);
NoiseModel parse_noise_model(std::string_view json_text);
NoiseModel load_noise_model(const std::filesystem::path& path);

/// Canonical JSON renderings, used for manifests and hashing.
std::string to_json(const MotionProfile& profile);
std::string to_json(const NoiseModel& model);

}  // namespace ionet
