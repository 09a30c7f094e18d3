#pragma once

#include "ionet/types.hpp"

namespace ionet::so3 {

/// Below this rotation angle the Rodrigues coefficients switch to their
/// Taylor series.
inline constexpr double kSmallAngle = 1e-8;

/// Attitude products are re-projected onto SO(3) once ‖RᵀR − I‖∞ exceeds this.
inline constexpr double kDriftTolerance = 1e-12;

/// Wraps an angle to (−π, π].
double wrap_angle(double angle);

/// [v×], so that skew(v) * u == v.cross(u).
Mat3 skew(const Vec3& v);

/// ‖RᵀR − I‖∞ (max absolute entry).
double orthogonality_error(const Mat3& r);

/// Rotation over one sample interval from a body angular rate:
/// Ω = I + sin σ/σ [σ×] + (1 − cos σ)/σ² [σ×]², σ = w·dt.
/// Throws kInvalidInput for non-finite input or dt <= 0.
RotationMatrix rodrigues_increment(const Vec3& w, double dt);

/// Rotation vector of R (inverse of the Rodrigues map), small-angle safe.
/// Throws kAliasing when the rotation angle is within 1e-6 of π, where the
/// axis is ambiguous.
Vec3 rotation_log(const RotationMatrix& r);

/// C·Ω, re-orthonormalized when the product has drifted off SO(3).
RotationMatrix update_attitude(const RotationMatrix& c, const RotationMatrix& omega);

/// Nearest proper rotation via the iterative polar correction
/// R ← 1.5R − 0.5 R RᵀR. Throws kDegenerate if the input is further than
/// 1e-3 from orthogonal or has negative determinant.
RotationMatrix reorthonormalize(const RotationMatrix& c);

/// Heading of the body x-axis: atan2(C₂₁, C₁₁) in (−π, π]. Throws
/// kDegenerate when the body x-axis is within 1e-6 of vertical.
double yaw_of(const RotationMatrix& c);

RotationMatrix rot_x(double angle);
RotationMatrix rot_y(double angle);
RotationMatrix rot_z(double angle);

}  // namespace ionet::so3
