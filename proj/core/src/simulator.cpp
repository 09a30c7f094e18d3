#include "ionet/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "ionet/error.hpp"
#include "ionet/rng.hpp"
#include "ionet/so3.hpp"

namespace ionet {

namespace {

using json = nlohmann::json;

constexpr double kPi = std::numbers::pi;
constexpr double kSpeedOscillation = 0.15;  // fraction of commanded speed
constexpr double kMaxMisalignment = 2.0 * kPi / 180.0;

enum SeedStream : std::uint64_t { kSpeedStream = 1, kTurnStream = 2, kRumbleStream = 3 };

void check_profile(const MotionProfile& p) {
  if (!(p.duration > 0.0) && p.script.empty()) {
    throw Error(ErrorKind::kInvalidInput, "motion profile duration must be positive");
  }
  if (!(p.rate >= 50.0)) {
    throw Error(ErrorKind::kInvalidInput, "motion profile rate must be at least 50 Hz");
  }
  if (p.speed_min < 0.0 || p.speed_max < p.speed_min) {
    throw Error(ErrorKind::kInvalidInput, "motion profile needs 0 <= speed_min <= speed_max");
  }
}

std::size_t sample_count(double duration, double rate) {
  return static_cast<std::size_t>(std::llround(duration * rate));
}

/// Smoothly blended random speed targets.
class SpeedSchedule {
 public:
  SpeedSchedule(const MotionProfile& p, std::uint64_t seed) {
    if (p.speed_max <= p.speed_min) {
      times_ = {0.0};
      speeds_ = {p.speed_min};
      return;
    }
    Rng rng(derive_seed(seed, kSpeedStream));
    double t = 0.0;
    const double interval = std::max(p.speed_change_interval, 0.5);
    while (true) {
      times_.push_back(t);
      speeds_.push_back(rng.uniform(p.speed_min, p.speed_max));
      if (t > p.duration) break;
      t += interval * rng.uniform(0.7, 1.3);
    }
  }

  double at(double t) const {
    if (times_.size() == 1) return speeds_.front();
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    if (it == times_.end()) return speeds_.back();
    const std::size_t hi = static_cast<std::size_t>(it - times_.begin());
    const std::size_t lo = hi - 1;
    const double u = (t - times_[lo]) / (times_[hi] - times_[lo]);
    const double blend = 0.5 * (1.0 - std::cos(kPi * u));
    return speeds_[lo] + (speeds_[hi] - speeds_[lo]) * blend;
  }

 private:
  std::vector<double> times_;
  std::vector<double> speeds_;
};

std::vector<TurnSegment> turn_schedule(const MotionProfile& p, std::uint64_t seed) {
  std::vector<TurnSegment> turns = p.turns;
  if (p.random_turns) {
    Rng rng(derive_seed(seed, kTurnStream));
    double t = rng.uniform(1.0, 4.0);
    while (t < p.duration) {
      const double duration = rng.uniform(1.0, 4.0);
      const double rate = rng.uniform(-p.max_turn_rate, p.max_turn_rate);
      turns.push_back({t, duration, rate});
      t += duration + rng.uniform(2.0, 8.0);
    }
  }
  return turns;
}

double heading_at(double t, double initial, std::span<const TurnSegment> turns) {
  double psi = initial;
  for (const TurnSegment& s : turns) {
    const double overlap = std::clamp(t - s.start, 0.0, s.duration);
    psi += s.rate * overlap;
  }
  return so3::wrap_angle(psi);
}

/// Fills positions from velocities with L(k) = L(k−1) + v(k−1)·dt.
void integrate_positions(std::vector<TruthPose>& poses, double dt) {
  for (std::size_t k = 1; k < poses.size(); ++k) {
    poses[k].position = poses[k - 1].position + poses[k - 1].velocity * dt;
  }
}

void check_sensor(const SensorErrors& s, std::string_view name) {
  auto fail = [&](const std::string& what) {
    throw Error(ErrorKind::kInvalidInput, std::string(name) + ": " + what);
  };
  if (!s.bias.allFinite() || !s.bias_random_walk.allFinite() || !s.white_noise.allFinite() ||
      !s.scale.allFinite() || !s.misalignment.allFinite()) {
    fail("non-finite noise parameter");
  }
  if ((s.bias_random_walk.array() < 0.0).any() || (s.white_noise.array() < 0.0).any()) {
    fail("noise densities must be non-negative");
  }
  if (s.scale.cwiseAbs().maxCoeff() > 0.05) fail("scale factor error exceeds 5%");
  if (s.misalignment.diagonal().cwiseAbs().maxCoeff() != 0.0) {
    fail("misalignment diagonal must be zero");
  }
  if (s.misalignment.cwiseAbs().maxCoeff() > kMaxMisalignment) fail("misalignment exceeds 2 degrees");
}

double truth_dt(std::span<const TruthPose> truth) {
  if (truth.size() < 2) {
    throw Error(ErrorKind::kInsufficientData, "truth stream needs at least two poses");
  }
  const double dt = (truth.back().t - truth.front().t) / static_cast<double>(truth.size() - 1);
  if (!(dt > 0.0)) throw Error(ErrorKind::kInvalidInput, "truth timestamps are not increasing");
  for (std::size_t k = 1; k < truth.size(); ++k) {
    if (std::abs(truth[k].t - truth[k - 1].t - dt) > 1e-9 * std::max(1.0, std::abs(truth[k].t))) {
      throw Error(ErrorKind::kInvalidInput, "truth stream is not uniformly sampled");
    }
  }
  return dt;
}

// --- JSON helpers -----------------------------------------------------------

Vec3 vec3_from(const json& j, std::string_view key) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(ErrorKind::kConfig, std::string(key) + " must be an array of 3 numbers");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json to_array(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json to_rows(const Mat3& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back(json::array({m(r, 0), m(r, 1), m(r, 2)}));
  return rows;
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed,
                    std::string_view where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(ErrorKind::kConfig, std::string(where) + ": unknown key '" + key + "'");
    }
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kConfig, "cannot open config file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string(what) + ": " + e.what());
  }
}

SensorErrors sensor_from_json(const json& j, SensorErrors base, std::string_view name) {
  reject_unknown(j, {"bias", "bias_random_walk", "white_noise", "scale", "misalignment"}, name);
  if (j.contains("bias")) base.bias = vec3_from(j["bias"], "bias");
  if (j.contains("bias_random_walk")) base.bias_random_walk = vec3_from(j["bias_random_walk"], "bias_random_walk");
  if (j.contains("white_noise")) base.white_noise = vec3_from(j["white_noise"], "white_noise");
  if (j.contains("scale")) base.scale = vec3_from(j["scale"], "scale");
  if (j.contains("misalignment")) {
    const json& m = j["misalignment"];
    if (!m.is_array() || m.size() != 3) {
      throw Error(ErrorKind::kConfig, "misalignment must be a 3x3 array");
    }
    for (int r = 0; r < 3; ++r) base.misalignment.row(r) = vec3_from(m[r], "misalignment row").transpose();
  }
  return base;
}

json sensor_to_json(const SensorErrors& s) {
  return {{"bias", to_array(s.bias)},
          {"bias_random_walk", to_array(s.bias_random_walk)},
          {"white_noise", to_array(s.white_noise)},
          {"scale", to_array(s.scale)},
          {"misalignment", to_rows(s.misalignment)}};
}

}  // namespace

bool SensorErrors::is_zero() const {
  return bias.isZero(0.0) && bias_random_walk.isZero(0.0) && white_noise.isZero(0.0) &&
         scale.isZero(0.0) && misalignment.isZero(0.0);
}

void NoiseModel::validate() const {
  check_sensor(accel, "accel");
  check_sensor(gyro, "gyro");
}

NoiseModel consumer_mems_noise(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0xB1A5));
  NoiseModel m;
  m.seed = seed;
  constexpr double kDeg = kPi / 180.0;
  for (int i = 0; i < 3; ++i) {
    m.accel.bias[i] = 0.05 * rng.normal();
    m.gyro.bias[i] = 0.002 * rng.normal();
    m.accel.scale[i] = rng.uniform(-0.01, 0.01);
    m.gyro.scale[i] = rng.uniform(-0.01, 0.01);
  }
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      if (r == c) continue;
      m.accel.misalignment(r, c) = rng.uniform(-0.3, 0.3) * kDeg;
      m.gyro.misalignment(r, c) = rng.uniform(-0.3, 0.3) * kDeg;
    }
  }
  m.accel.white_noise = Vec3::Constant(0.02);
  m.gyro.white_noise = Vec3::Constant(0.0015);
  m.accel.bias_random_walk = Vec3::Constant(0.001);
  m.gyro.bias_random_walk = Vec3::Constant(1e-4);
  return m;
}

double gait_step_length(double speed) { return 0.35 + 0.35 * std::max(speed, 0.0); }

std::vector<TruthPose> synth_walk(const MotionProfile& profile, std::uint64_t seed) {
  check_profile(profile);
  if (profile.kind != MotionKind::kWalk) {
    throw Error(ErrorKind::kInvalidInput, "synth_walk needs a walk profile");
  }
  const double dt = 1.0 / profile.rate;
  const std::size_t n = sample_count(profile.duration, profile.rate);
  const SpeedSchedule speed(profile, seed);
  const std::vector<TurnSegment> turns = turn_schedule(profile, seed);

  std::vector<TruthPose> poses(n + 1);
  double phase = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double v_cmd = speed.at(t);
    const double cadence = profile.step_frequency > 0.0
                               ? profile.step_frequency
                               : (v_cmd > 0.0 ? v_cmd / gait_step_length(v_cmd) : 0.0);
    const double gait = std::min(1.0, v_cmd / 0.3);  // fades bob and sway out near standstill
    const double bob = (0.012 + 0.01 * v_cmd) * gait;
    const double forward = v_cmd * (1.0 + kSpeedOscillation * std::sin(phase));
    const double psi = heading_at(t, profile.initial_heading, turns);

    TruthPose& p = poses[k];
    p.t = t;
    p.velocity = Vec3(forward * std::cos(psi), forward * std::sin(psi),
                      bob * 2.0 * kPi * cadence * std::cos(phase));
    const double roll = profile.sway * gait * std::sin(0.5 * phase);
    const double pitch = 0.5 * profile.sway * gait * std::sin(phase);
    p.attitude = so3::rot_z(psi) * so3::rot_y(pitch) * so3::rot_x(roll);

    phase += 2.0 * kPi * cadence * dt;
  }
  integrate_positions(poses, dt);
  return poses;
}

std::vector<TruthPose> synth_trolley(const MotionProfile& profile, std::uint64_t seed) {
  check_profile(profile);
  if (profile.kind != MotionKind::kTrolley) {
    throw Error(ErrorKind::kInvalidInput, "synth_trolley needs a trolley profile");
  }
  const double dt = 1.0 / profile.rate;
  const std::size_t n = sample_count(profile.duration, profile.rate);
  const SpeedSchedule speed(profile, seed);
  const std::vector<TurnSegment> turns = turn_schedule(profile, seed);
  Rng rumble(derive_seed(seed, kRumbleStream));

  std::vector<TruthPose> poses(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double u = speed.at(t);
    const double psi = heading_at(t, profile.initial_heading, turns);
    TruthPose& p = poses[k];
    p.t = t;
    const double vz = (k == 0 || profile.rumble == 0.0) ? 0.0 : profile.rumble * u * rumble.normal();
    p.velocity = Vec3(u * std::cos(psi), u * std::sin(psi), vz);
    p.attitude = so3::rot_z(psi);
  }
  integrate_positions(poses, dt);
  return poses;
}

std::vector<TruthPose> synth_scripted(const MotionProfile& profile) {
  if (profile.script.empty()) {
    throw Error(ErrorKind::kInvalidInput, "scripted profile needs at least one segment");
  }
  if (!(profile.rate >= 50.0)) {
    throw Error(ErrorKind::kInvalidInput, "motion profile rate must be at least 50 Hz");
  }
  double total = 0.0;
  std::vector<TurnSegment> turns;
  for (const ScriptSegment& s : profile.script) {
    if (!(s.duration > 0.0)) throw Error(ErrorKind::kInvalidInput, "script segment duration must be positive");
    turns.push_back({total, s.duration, s.turn_rate});
    total += s.duration;
  }
  const double dt = 1.0 / profile.rate;
  const std::size_t n = sample_count(total, profile.rate);
  std::vector<TruthPose> poses(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * dt;
    std::size_t seg = 0;
    for (double end = profile.script[0].duration; seg + 1 < profile.script.size() && t >= end;) {
      ++seg;
      end += profile.script[seg].duration;
    }
    const double psi = heading_at(t, profile.initial_heading, turns);
    const double u = profile.script[seg].speed;
    TruthPose& p = poses[k];
    p.t = t;
    p.velocity = Vec3(u * std::cos(psi), u * std::sin(psi), 0.0);
    p.attitude = so3::rot_z(psi);
  }
  integrate_positions(poses, dt);
  return poses;
}

std::vector<TruthPose> synthesize(const MotionProfile& profile, std::uint64_t seed) {
  switch (profile.kind) {
    case MotionKind::kWalk: return synth_walk(profile, seed);
    case MotionKind::kTrolley: return synth_trolley(profile, seed);
    case MotionKind::kScripted: return synth_scripted(profile);
  }
  throw Error(ErrorKind::kInvalidInput, "unknown motion kind");
}

std::vector<ImuSample> inverse_imu(std::span<const TruthPose> truth, const GravityVector& g) {
  const double dt = truth_dt(truth);
  std::vector<ImuSample> samples;
  samples.reserve(truth.size() - 1);
  for (std::size_t k = 1; k < truth.size(); ++k) {
    const TruthPose& prev = truth[k - 1];
    const TruthPose& cur = truth[k];
    ImuSample s;
    s.t = cur.t;
    try {
      s.w = so3::rotation_log(prev.attitude.transpose() * cur.attitude) / dt;
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << "inverse_imu: attitude step at t=" << cur.t << " s is not recoverable: " << e.what();
      throw Error(ErrorKind::kAliasing, msg.str());
    }
    s.a = prev.attitude.transpose() * ((cur.velocity - prev.velocity) / dt - g.vector());
    samples.push_back(s);
  }
  return samples;
}

std::vector<ImuSample> corrupt(std::span<const ImuSample> samples, const NoiseModel& model) {
  model.validate();
  std::vector<ImuSample> out(samples.begin(), samples.end());
  if (model.is_zero() || samples.empty()) return out;

  double dt = 0.01;
  if (samples.size() >= 2) {
    dt = (samples.back().t - samples.front().t) / static_cast<double>(samples.size() - 1);
  }
  Rng rng(model.seed);
  Vec3 accel_walk = Vec3::Zero();
  Vec3 gyro_walk = Vec3::Zero();
  const double sqrt_dt = std::sqrt(dt);
  const Mat3 accel_mix = Mat3::Identity() + model.accel.misalignment;
  const Mat3 gyro_mix = Mat3::Identity() + model.gyro.misalignment;
  const Vec3 accel_scale = Vec3::Ones() + model.accel.scale;
  const Vec3 gyro_scale = Vec3::Ones() + model.gyro.scale;

  auto draw = [&rng]() { return Vec3(rng.normal(), rng.normal(), rng.normal()); };
  for (ImuSample& s : out) {
    accel_walk += model.accel.bias_random_walk.cwiseProduct(draw()) * sqrt_dt;
    gyro_walk += model.gyro.bias_random_walk.cwiseProduct(draw()) * sqrt_dt;
    const Vec3 accel_white = model.accel.white_noise.cwiseProduct(draw()) / sqrt_dt;
    const Vec3 gyro_white = model.gyro.white_noise.cwiseProduct(draw()) / sqrt_dt;
    s.a = accel_mix * accel_scale.cwiseProduct(s.a) + model.accel.bias + accel_walk + accel_white;
    s.w = gyro_mix * gyro_scale.cwiseProduct(s.w) + model.gyro.bias + gyro_walk + gyro_white;
  }
  return out;
}

MotionProfile parse_motion_profile(std::string_view json_text) {
  const json j = parse_json(json_text, "motion profile");
  if (!j.is_object()) throw Error(ErrorKind::kConfig, "motion profile must be a JSON object");
  reject_unknown(j,
                 {"kind", "duration", "rate", "speed", "speed_min", "speed_max",
                  "speed_change_interval", "step_frequency", "sway", "rumble", "initial_heading",
                  "turns", "random_turns", "max_turn_rate", "script"},
                 "motion profile");
  MotionProfile p;
  try {
    const std::string kind = j.value("kind", std::string("walk"));
    if (kind == "walk") p.kind = MotionKind::kWalk;
    else if (kind == "trolley") p.kind = MotionKind::kTrolley;
    else if (kind == "scripted") p.kind = MotionKind::kScripted;
    else throw Error(ErrorKind::kConfig, "motion profile: unknown kind '" + kind + "'");
    p.duration = j.value("duration", p.duration);
    p.rate = j.value("rate", p.rate);
    if (j.contains("speed")) p.speed_min = p.speed_max = j["speed"].get<double>();
    p.speed_min = j.value("speed_min", p.speed_min);
    p.speed_max = j.value("speed_max", p.speed_max);
    p.speed_change_interval = j.value("speed_change_interval", p.speed_change_interval);
    p.step_frequency = j.value("step_frequency", p.step_frequency);
    p.sway = j.value("sway", p.sway);
    p.rumble = j.value("rumble", p.rumble);
    p.initial_heading = j.value("initial_heading", p.initial_heading);
    p.random_turns = j.value("random_turns", p.random_turns);
    p.max_turn_rate = j.value("max_turn_rate", p.max_turn_rate);
    for (const json& t : j.value("turns", json::array())) {
      reject_unknown(t, {"start", "duration", "rate"}, "turn segment");
      p.turns.push_back({t.at("start").get<double>(), t.at("duration").get<double>(),
                         t.at("rate").get<double>()});
    }
    for (const json& s : j.value("script", json::array())) {
      reject_unknown(s, {"duration", "speed", "turn_rate"}, "script segment");
      p.script.push_back({s.at("duration").get<double>(), s.value("speed", 0.0),
                          s.value("turn_rate", 0.0)});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("motion profile: ") + e.what());
  }
  if (p.kind == MotionKind::kScripted) {
    p.duration = 0.0;
    for (const ScriptSegment& s : p.script) p.duration += s.duration;
  }
  try {
    check_profile(p);
  } catch (const Error& e) {
    throw Error(ErrorKind::kConfig, e.what());
  }
  return p;
}

MotionProfile load_motion_profile(const std::filesystem::path& path) {
  try {
    return parse_motion_profile(read_text(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

NoiseModel parse_noise_model(std::string_view json_text) {
  const json j = parse_json(json_text, "noise model");
  if (!j.is_object()) throw Error(ErrorKind::kConfig, "noise model must be a JSON object");
  reject_unknown(j, {"preset", "seed", "accel", "gyro"}, "noise model");
  NoiseModel m;
  try {
    const std::uint64_t seed = j.value("seed", std::uint64_t{0});
    const std::string preset = j.value("preset", std::string("none"));
    if (preset == "consumer_mems") m = consumer_mems_noise(seed);
    else if (preset != "none") throw Error(ErrorKind::kConfig, "noise model: unknown preset '" + preset + "'");
    m.seed = seed;
    if (j.contains("accel")) m.accel = sensor_from_json(j["accel"], m.accel, "accel");
    if (j.contains("gyro")) m.gyro = sensor_from_json(j["gyro"], m.gyro, "gyro");
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("noise model: ") + e.what());
  }
  try {
    m.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::kConfig, e.what());
  }
  return m;
}

NoiseModel load_noise_model(const std::filesystem::path& path) {
  try {
    return parse_noise_model(read_text(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::string to_json(const MotionProfile& p) {
  json j;
  switch (p.kind) {
    case MotionKind::kWalk: j["kind"] = "walk"; break;
    case MotionKind::kTrolley: j["kind"] = "trolley"; break;
    case MotionKind::kScripted: j["kind"] = "scripted"; break;
  }
  j["duration"] = p.duration;
  j["rate"] = p.rate;
  j["speed_min"] = p.speed_min;
  j["speed_max"] = p.speed_max;
  j["speed_change_interval"] = p.speed_change_interval;
  j["step_frequency"] = p.step_frequency;
  j["sway"] = p.sway;
  j["rumble"] = p.rumble;
  j["initial_heading"] = p.initial_heading;
  j["random_turns"] = p.random_turns;
  j["max_turn_rate"] = p.max_turn_rate;
  j["turns"] = json::array();
  for (const TurnSegment& t : p.turns) {
    j["turns"].push_back({{"start", t.start}, {"duration", t.duration}, {"rate", t.rate}});
  }
  j["script"] = json::array();
  for (const ScriptSegment& s : p.script) {
    j["script"].push_back({{"duration", s.duration}, {"speed", s.speed}, {"turn_rate", s.turn_rate}});
  }
  return j.dump();
}

std::string to_json(const NoiseModel& m) {
  json j;
  j["seed"] = m.seed;
  j["accel"] = sensor_to_json(m.accel);
  j["gyro"] = sensor_to_json(m.gyro);
  return j.dump();
}

}  // namespace ionet
