#pragma once

// Independent reference computations used only by tests.

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ionet/rng.hpp"
#include "ionet/strapdown.hpp"

namespace ionet::testing {

/// Rotation matrix of the unit quaternion exp(σ/2), written out from the
/// quaternion components (no Rodrigues form involved).
inline Eigen::Matrix3d quaternion_exp_rotation(const Eigen::Vector3d& sigma) {
  const double angle = sigma.norm();
  double w = std::cos(0.5 * angle);
  double k = angle > 0.0 ? std::sin(0.5 * angle) / angle : 0.5;
  const double x = k * sigma.x();
  const double y = k * sigma.y();
  const double z = k * sigma.z();
  Eigen::Matrix3d r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
       2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
       2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

/// Euler position after `steps` steps of constant net acceleration from
/// rest: Σ_{k=0}^{steps−1} (k·a·dt)·dt = a·dt²·steps(steps−1)/2.
inline double euler_position_from_rest(double accel, double dt, int steps) {
  double position = 0.0;
  double velocity = 0.0;
  for (int k = 0; k < steps; ++k) {
    position += velocity * dt;
    velocity += accel * dt;
  }
  return position;
}

/// Displacement of n explicit-Euler strapdown steps, accumulated with a
/// plain loop independent of propagate()/compute_T().
inline Eigen::Vector3d brute_force_displacement(std::span<const ImuSample> samples, double dt,
                                                const Eigen::Matrix3d& c0, const Eigen::Vector3d& v0,
                                                const Eigen::Vector3d& g) {
  Eigen::Matrix3d c = c0;
  Eigen::Vector3d v = v0;
  Eigen::Vector3d l = Eigen::Vector3d::Zero();
  for (const ImuSample& s : samples) {
    const Eigen::Matrix3d omega = quaternion_exp_rotation(s.w * dt);
    l += v * dt;
    v += (c * s.a + g) * dt;
    c = c * omega;
  }
  return l;
}

inline Eigen::Matrix3d random_rotation(std::uint64_t seed) {
  ionet::Rng rng(seed);
  Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
  axis.normalize();
  return quaternion_exp_rotation(axis * rng.uniform(0.0, 3.1));
}

}  // namespace ionet::testing

namespace ionet::testing {

/// Periodogram |Σ x_k e^{−2πi f k dt}|² at frequency f, by direct summation.
inline double power_at(std::span<const double> x, double dt, double f) {
  double re = 0.0;
  double im = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double phase = 2.0 * 3.14159265358979323846 * f * static_cast<double>(k) * dt;
    re += x[k] * std::cos(phase);
    im -= x[k] * std::sin(phase);
  }
  return re * re + im * im;
}

/// Mean-removed copy.
inline std::vector<double> demean(std::vector<double> x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  for (double& v : x) v -= mean;
  return x;
}

}  // namespace ionet::testing
