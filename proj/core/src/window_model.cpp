#include "ionet/window_model.hpp"

#include <cmath>
#include <sstream>

#include "ionet/error.hpp"
#include "ionet/so3.hpp"

namespace ionet {

namespace {

constexpr double kTimeTolerance = 1e-9;
// Chords shorter than this carry no usable direction.
constexpr double kMinChord = 1e-9;

void check_window(const Window& window) {
  if (window.size() < 2) {
    throw Error(ErrorKind::kInvalidInput, "window needs at least 2 samples");
  }
  if (!std::isfinite(window.dt) || window.dt <= 0.0) {
    throw Error(ErrorKind::kInvalidInput, "window dt must be positive");
  }
}

double triangular(std::size_t n) { return 0.5 * static_cast<double>(n) * static_cast<double>(n - 1); }

}  // namespace

double uniform_dt(std::span<const ImuSample> stream) {
  if (stream.size() < 2) {
    throw Error(ErrorKind::kInsufficientData, "need at least two samples to infer the sample interval");
  }
  const double dt = (stream.back().t - stream.front().t) / static_cast<double>(stream.size() - 1);
  if (!(dt > 0.0)) {
    throw Error(ErrorKind::kInvalidInput, "timestamps are not increasing");
  }
  for (std::size_t k = 1; k < stream.size(); ++k) {
    const double step = stream[k].t - stream[k - 1].t;
    if (std::abs(step - dt) > kTimeTolerance * std::max(1.0, std::abs(stream[k].t))) {
      std::ostringstream msg;
      msg << "non-uniform sampling at sample " << k << " (step " << step << " s, expected " << dt
          << " s); resample first";
      throw Error(ErrorKind::kInvalidInput, msg.str());
    }
  }
  return dt;
}

std::vector<Window> segment(std::span<const ImuSample> stream, std::size_t n, std::size_t stride) {
  if (n < 2) throw Error(ErrorKind::kInvalidInput, "window length must be at least 2");
  if (stride == 0) throw Error(ErrorKind::kInvalidInput, "stride must be positive");
  if (stream.size() < n) {
    std::ostringstream msg;
    msg << "stream has " << stream.size() << " samples, window needs " << n;
    throw Error(ErrorKind::kInsufficientData, msg.str());
  }
  const double dt = uniform_dt(stream);
  std::vector<Window> windows;
  windows.reserve((stream.size() - n) / stride + 1);
  for (std::size_t start = 0; start + n <= stream.size(); start += stride) {
    windows.push_back(Window{stream.subspan(start, n), dt, start});
  }
  return windows;
}

Vec3 compute_T(const Window& window) {
  check_window(window);
  const std::size_t n = window.size();
  Vec3 t = Vec3::Zero();
  RotationMatrix product = RotationMatrix::Identity();
  for (std::size_t k = 1; k <= n - 1; ++k) {
    if (k >= 2) {
      product = product * so3::rodrigues_increment(window.samples[k - 2].w, window.dt);
    }
    t += static_cast<double>(n - k) * (product * window.samples[k - 1].a);
  }
  return t;
}

Vec3 window_displacement(const Window& window, const Vec3& v0, const RotationMatrix& c0,
                         const GravityVector& g) {
  check_window(window);
  const double n = static_cast<double>(window.size());
  const double dt = window.dt;
  return n * v0 * dt + c0 * compute_T(window) * (dt * dt) +
         triangular(window.size()) * g.vector() * (dt * dt);
}

double horizontal_distance(const Window& window, const BodyInitState& init) {
  check_window(window);
  const double n = static_cast<double>(window.size());
  const double dt = window.dt;
  const Vec3 body = n * init.v0_body * dt + compute_T(window) * (dt * dt) +
                    triangular(window.size()) * init.g0_body * (dt * dt);
  return body.norm();
}

BodyInitState body_init_state(const RotationMatrix& c0, const Vec3& v0_nav,
                              const GravityVector& g) {
  return {c0.transpose() * v0_nav, c0.transpose() * g.vector()};
}

double heading_change(const Window& window, const RotationMatrix& c_ref) {
  check_window(window);
  RotationMatrix c = c_ref;
  for (std::size_t i = 0; i + 1 < window.size(); ++i) {
    c = c * so3::rodrigues_increment(window.samples[i].w, window.dt);
  }
  return so3::wrap_angle(so3::yaw_of(c) - so3::yaw_of(c_ref));
}

std::vector<Pose2D> chain(const Pose2D& start, std::span<const PolarDelta> deltas) {
  std::vector<Pose2D> poses;
  poses.reserve(deltas.size());
  Pose2D pose = start;
  pose.psi = so3::wrap_angle(pose.psi);
  for (const PolarDelta& d : deltas) {
    pose.psi = so3::wrap_angle(pose.psi + d.dpsi);
    pose.x += d.dl * std::cos(pose.psi);
    pose.y += d.dl * std::sin(pose.psi);
    poses.push_back(pose);
  }
  return poses;
}

std::vector<Pose2D> chain_dense(const Pose2D& start, std::span<const PolarDelta> deltas,
                                std::size_t stride, std::size_t n) {
  if (stride == 0 || n == 0 || stride > n) {
    throw Error(ErrorKind::kInvalidInput, "dense chaining needs 0 < stride <= n");
  }
  const double scale = static_cast<double>(stride) / static_cast<double>(n);
  std::vector<PolarDelta> scaled;
  scaled.reserve(deltas.size());
  for (const PolarDelta& d : deltas) scaled.push_back({d.dl * scale, d.dpsi * scale});
  return chain(start, scaled);
}

std::vector<PolarDelta> label_windows(std::span<const TruthPose> truth,
                                      std::span<const Window> windows) {
  auto chord = [&](std::size_t s, std::size_t n) -> Eigen::Vector2d {
    return (truth[s + n].position - truth[s].position).head<2>();
  };
  auto yaw = [&](std::size_t k) { return so3::yaw_of(truth[k].attitude); };

  std::vector<PolarDelta> labels;
  labels.reserve(windows.size());
  std::size_t n_common = 0;
  for (const Window& w : windows) {
    check_window(w);
    const std::size_t n = w.size();
    if (n_common == 0) n_common = n;
    if (n != n_common) {
      throw Error(ErrorKind::kInvalidInput, "label_windows: windows must share one length");
    }
    const std::size_t s = w.start_index;
    if (s + n >= truth.size()) {
      std::ostringstream msg;
      msg << "label_windows: window at " << s << " extends past truth (" << truth.size()
          << " poses, expected samples + 1)";
      throw Error(ErrorKind::kAlignment, msg.str());
    }
    for (std::size_t j : {std::size_t{0}, n - 1}) {
      if (std::abs(truth[s + j + 1].t - w.samples[j].t) > kTimeTolerance * std::max(1.0, std::abs(w.samples[j].t))) {
        std::ostringstream msg;
        msg << "label_windows: truth timestamp " << truth[s + j + 1].t
            << " does not match IMU timestamp " << w.samples[j].t << " at sample " << s + j;
        throw Error(ErrorKind::kAlignment, msg.str());
      }
    }
    const Eigen::Vector2d c = chord(s, n);
    double dpsi = 0.0;
    if (s >= n) {
      dpsi = so3::wrap_angle(yaw(s + n) - yaw(s));
    } else if (c.norm() > kMinChord) {
      // Leading windows turn the chain from the start yaw onto the chord.
      dpsi = so3::wrap_angle(std::atan2(c.y(), c.x()) - yaw(s));
    }
    labels.push_back({c.norm(), dpsi});
  }
  return labels;
}

}  // namespace ionet
