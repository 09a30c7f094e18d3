#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ionet/strapdown.hpp"
#include "ionet/types.hpp"

namespace ionet {

inline constexpr std::size_t kDefaultWindow = 200;
inline constexpr std::size_t kDefaultStride = 10;

/// A view of n consecutive samples of a uniformly sampled stream. The
/// window does not own its samples; the stream must outlive it.
struct Window {
  std::span<const ImuSample> samples;
  double dt = 0.01;
  std::size_t start_index = 0;

  std::size_t size() const noexcept { return samples.size(); }
};

/// Horizontal distance and heading change over one window.
struct PolarDelta {
  double dl = 0.0;
  double dpsi = 0.0;
};

/// Initial velocity and gravity expressed in the body frame at window start.
struct BodyInitState {
  Vec3 v0_body = Vec3::Zero();
  Vec3 g0_body = Vec3::Zero();
};

enum class ChainMode {
  kNonOverlapping,  // stride == n, one pose per window
  kDense,           // stride < n, deltas scaled by stride/n
};

/// Sample interval of a stream, checked uniform to 1e-9 s. Throws
/// kInsufficientData for fewer than two samples and kInvalidInput for
/// irregular or non-increasing timestamps.
double uniform_dt(std::span<const ImuSample> stream);

/// Windows starting at 0, stride, 2·stride, …; a tail shorter than n is
/// dropped. Throws kInsufficientData when the stream is shorter than n.
std::vector<Window> segment(std::span<const ImuSample> stream, std::size_t n = kDefaultWindow,
                            std::size_t stride = kDefaultStride);

/// T = Σ_{k=1}^{n−1} (n−k) · [Π_{i=1}^{k−1} Ω(i)] · a_k.
Vec3 compute_T(const Window& window);

/// ΔL = n·v0·dt + C0·T·dt² + n(n−1)/2 · g·dt², identical to the
/// displacement of n strapdown steps from (C0, v0).
Vec3 window_displacement(const Window& window, const Vec3& v0, const RotationMatrix& c0,
                         const GravityVector& g);

/// ‖n·v0ᵇ·dt + T·dt² + n(n−1)/2 · g0ᵇ·dt²‖, evaluated without C0.
double horizontal_distance(const Window& window, const BodyInitState& init);

/// Body-frame initial state from a navigation-frame attitude and velocity.
BodyInitState body_init_state(const RotationMatrix& c0, const Vec3& v0_nav,
                              const GravityVector& g);

/// yaw(C_ref · Π_{i=1}^{n−1} Ω(i)) − yaw(C_ref), wrapped.
double heading_change(const Window& window, const RotationMatrix& c_ref);

/// Accumulating Cartesian projection: ψ ← wrap(ψ + Δψ), then
/// (x, y) += Δl·(cos ψ, sin ψ). One pose per delta.
std::vector<Pose2D> chain(const Pose2D& start, std::span<const PolarDelta> deltas);

/// Chaining for windows overlapping with `stride` < n: each delta is scaled
/// by stride/n before projection.
std::vector<Pose2D> chain_dense(const Pose2D& start, std::span<const PolarDelta> deltas,
                                std::size_t stride, std::size_t n);

/// Training labels from ground truth. `truth` holds the initial state
/// followed by one pose per IMU sample (truth[k + 1].t == samples[k].t).
///
/// Δl is the horizontal chord from truth[s] to truth[s + n]. Δψ is the yaw
/// change across the window, which the window's own gyro data determines.
/// Windows starting before n instead carry the angle from the start yaw to
/// their chord, so that the chained heading points along the chord.
/// Chaining consecutive non-overlapping labels from (x₀, y₀, yaw₀) then
/// reproduces the truth positions exactly on straight and constant-rate
/// turning tracks; where the turn rate varies the heading error stays
/// bounded by the turn within half a window.
///
/// Throws kAlignment when a window falls outside `truth` or its
/// timestamps disagree with it.
std::vector<PolarDelta> label_windows(std::span<const TruthPose> truth,
                                      std::span<const Window> windows);

}  // namespace ionet
