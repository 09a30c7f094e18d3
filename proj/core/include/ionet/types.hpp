#pragma once

#include <Eigen/Core>

namespace ionet {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Body-to-navigation direction cosine matrix. Navigation frame is
/// x-east, y-north, z-up.
using RotationMatrix = Eigen::Matrix3d;

/// Ground-truth state of the carrier at time t (position, attitude and
/// velocity in the navigation frame).
struct TruthPose {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
  RotationMatrix attitude = RotationMatrix::Identity();
  Vec3 velocity = Vec3::Zero();
};

/// Planar pose used for chained odometry output.
struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;  // radians, wrapped to (-pi, pi]
};

/// A planar pose stamped with the time it refers to.
struct TrackPoint {
  double t = 0.0;
  Pose2D pose;
};

}  // namespace ionet
