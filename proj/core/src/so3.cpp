#include "ionet/so3.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/LU>

#include "ionet/error.hpp"

namespace ionet {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kDegenerate: return "degenerate";
    case ErrorKind::kEmptyInput: return "empty-input";
    case ErrorKind::kInsufficientData: return "insufficient-data";
    case ErrorKind::kAlignment: return "alignment";
    case ErrorKind::kOutOfRange: return "out-of-range";
    case ErrorKind::kAliasing: return "aliasing";
    case ErrorKind::kUnsupportedRate: return "unsupported-rate";
    case ErrorKind::kModelContract: return "model-contract";
    case ErrorKind::kNumericOverflow: return "numeric-overflow";
    case ErrorKind::kTrainingDiverged: return "training-diverged";
    case ErrorKind::kCorruptFile: return "corrupt-file";
    case ErrorKind::kVersionMismatch: return "version-mismatch";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kConfig: return "config";
  }
  return "unknown";
}

namespace so3 {

namespace {

constexpr double kPi = std::numbers::pi;

Vec3 vee(const Mat3& m) { return {m(2, 1), m(0, 2), m(1, 0)}; }

}  // namespace

double wrap_angle(double angle) {
  double wrapped = std::remainder(angle, 2.0 * kPi);
  if (wrapped <= -kPi) wrapped += 2.0 * kPi;
  return wrapped;
}

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return s;
}

double orthogonality_error(const Mat3& r) {
  return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
}

RotationMatrix rodrigues_increment(const Vec3& w, double dt) {
  if (!w.allFinite() || !std::isfinite(dt) || dt <= 0.0) {
    throw Error(ErrorKind::kInvalidInput, "rodrigues_increment: non-finite rate or dt <= 0");
  }
  const Vec3 sigma = w * dt;
  const double angle2 = sigma.squaredNorm();
  const double angle = std::sqrt(angle2);
  double a;
  double b;
  if (angle < kSmallAngle) {
    a = 1.0 - angle2 / 6.0;
    b = 0.5 - angle2 / 24.0;
  } else {
    a = std::sin(angle) / angle;
    b = (1.0 - std::cos(angle)) / angle2;
  }
  const Mat3 k = skew(sigma);
  return Mat3::Identity() + a * k + b * (k * k);
}

Vec3 rotation_log(const RotationMatrix& r) {
  if (!r.allFinite()) {
    throw Error(ErrorKind::kInvalidInput, "rotation_log: non-finite matrix");
  }
  const Vec3 v = 0.5 * vee(r - r.transpose());
  const double s = v.norm();
  const double c = 0.5 * (r.trace() - 1.0);
  const double angle = std::atan2(s, c);
  if (angle > kPi - 1e-6) {
    throw Error(ErrorKind::kAliasing,
                "rotation_log: rotation angle too close to pi to recover a unique axis");
  }
  if (angle < kSmallAngle) {
    return v * (1.0 + angle * angle / 6.0);
  }
  return v * (angle / s);
}

RotationMatrix update_attitude(const RotationMatrix& c, const RotationMatrix& omega) {
  RotationMatrix out = c * omega;
  if (orthogonality_error(out) > kDriftTolerance) {
    out = reorthonormalize(out);
  }
  return out;
}

RotationMatrix reorthonormalize(const RotationMatrix& c) {
  if (!c.allFinite()) {
    throw Error(ErrorKind::kInvalidInput, "reorthonormalize: non-finite matrix");
  }
  double err = orthogonality_error(c);
  if (err > 1e-3 || c.determinant() <= 0.0) {
    std::ostringstream msg;
    msg << "reorthonormalize: matrix is not close to a proper rotation (orthogonality error "
        << err << ")";
    throw Error(ErrorKind::kDegenerate, msg.str());
  }
  RotationMatrix r = c;
  for (int iter = 0; iter < 10 && err > 1e-15; ++iter) {
    r = 1.5 * r - 0.5 * r * (r.transpose() * r);
    err = orthogonality_error(r);
  }
  return r;
}

double yaw_of(const RotationMatrix& c) {
  const double east = c(0, 0);
  const double north = c(1, 0);
  if (std::hypot(east, north) < 1e-6) {
    throw Error(ErrorKind::kDegenerate, "yaw_of: body x-axis is vertical, heading undefined");
  }
  return wrap_angle(std::atan2(north, east));
}

RotationMatrix rot_x(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  RotationMatrix r;
  r << 1, 0, 0,
       0, c, -s,
       0, s, c;
  return r;
}

RotationMatrix rot_y(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  RotationMatrix r;
  r << c, 0, s,
       0, 1, 0,
       -s, 0, c;
  return r;
}

RotationMatrix rot_z(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  RotationMatrix r;
  r << c, -s, 0,
       s, c, 0,
       0, 0, 1;
  return r;
}

}  // namespace so3
}  // namespace ionet
