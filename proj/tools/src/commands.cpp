#include "ionet_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "config.hpp"
#include "ionet/dataset_io.hpp"
#include "ionet/evaluation.hpp"
#include "ionet/neural_odometry.hpp"
#include "ionet/pdr.hpp"
#include "ionet/rng.hpp"
#include "ionet/simulator.hpp"
#include "ionet/so3.hpp"
#include "ionet/strapdown.hpp"
#include "ionet/window_model.hpp"

namespace ionet::cli {

namespace {

constexpr const char* kManifest = "manifest.json";

// Walking produces 1.5–2 steps/s; far fewer means step detection failed.
constexpr double kMinPlausibleStepRate = 0.2;

fs::path output_dir_for(const ConfigFile& cfg, const Overrides& o) {
  if (o.output_dir) return *o.output_dir;
  if (cfg.doc.contains("output_dir")) return resolve(cfg.base_dir, get_string(cfg.doc, "output_dir", ""));
  return default_output_dir();
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create directory " + dir.string() + ": " + ec.message());
}

std::string file_hash(const fs::path& p) { return fnv1a_hex(read_file(p)); }

struct TrackData {
  fs::path dir;
  std::vector<ImuSample> imu;
  std::vector<TruthPose> truth;  // empty when the directory has no truth.csv
};

TrackData read_track_dir(const fs::path& dir, bool need_truth) {
  TrackData t;
  t.dir = dir;
  t.imu = read_imu_csv(dir / "imu.csv");
  if (fs::exists(dir / "truth.csv")) {
    t.truth = read_truth_csv(dir / "truth.csv");
    if (t.truth.size() != t.imu.size() + 1) {
      std::ostringstream msg;
      msg << dir.string() << ": truth.csv has " << t.truth.size() << " rows, expected imu rows + 1 ("
          << t.imu.size() + 1 << ")";
      throw Error(ErrorKind::kAlignment, msg.str());
    }
  } else if (need_truth) {
    throw Error(ErrorKind::kIo, "missing " + (dir / "truth.csv").string());
  }
  return t;
}

/// A dataset directory is either one track (imu.csv present) or a parent
/// of track subdirectories.
std::vector<fs::path> track_dirs(const fs::path& root) {
  if (fs::exists(root / "imu.csv")) return {root};
  std::vector<fs::path> dirs;
  if (fs::is_directory(root)) {
    for (const auto& entry : fs::directory_iterator(root)) {
      if (entry.is_directory() && fs::exists(entry.path() / "imu.csv")) dirs.push_back(entry.path());
    }
  }
  if (dirs.empty()) throw Error(ErrorKind::kIo, "no imu.csv found in " + root.string() + " or its subdirectories");
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

std::vector<fs::path> path_list(const ConfigFile& cfg, std::string_view key) {
  std::vector<fs::path> out;
  const auto it = cfg.doc.find(std::string(key));
  if (it == cfg.doc.end()) return out;
  if (it->is_string()) {
    out.push_back(resolve(cfg.base_dir, it->get<std::string>()));
  } else if (it->is_array()) {
    for (const json& v : *it) {
      if (!v.is_string()) throw Error(ErrorKind::kConfig, std::string(key) + " must list paths");
      out.push_back(resolve(cfg.base_dir, v.get<std::string>()));
    }
  } else {
    throw Error(ErrorKind::kConfig, std::string(key) + " must be a path or a list of paths");
  }
  return out;
}

NoiseModel noise_model_from(const json& value, const fs::path& base, std::uint64_t seed) {
  json obj;
  if (value.is_string()) {
    const fs::path p = resolve(base, value.get<std::string>());
    if (!fs::exists(p)) throw Error(ErrorKind::kConfig, "cannot open noise model file: " + p.string());
    try {
      obj = json::parse(read_file(p));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kConfig, p.string() + ": invalid JSON: " + e.what());
    }
  } else if (value.is_object()) {
    obj = value;
  } else {
    throw Error(ErrorKind::kConfig, "'noise' must be an object or a path to a noise model file");
  }
  if (!obj.is_object()) throw Error(ErrorKind::kConfig, "noise model must be a JSON object");
  obj["seed"] = seed;
  return parse_noise_model(obj.dump());
}

TruthPose start_state(const TrackData& t) {
  if (!t.truth.empty()) return t.truth.front();
  TruthPose p;
  const double dt = t.imu.size() > 1 ? t.imu[1].t - t.imu[0].t : 0.01;
  p.t = t.imu.front().t - dt;
  return p;
}

Pose2D planar(const TruthPose& p) {
  return {p.position.x(), p.position.y(), so3::yaw_of(p.attitude)};
}

PdrConfig pdr_config_from(const json& j) {
  PdrConfig c;
  if (j.is_null()) return c;
  if (!j.is_object()) throw Error(ErrorKind::kConfig, "'pdr' must be an object");
  reject_unknown(j, {"smoothing_samples", "peak_threshold", "min_step_interval", "step_coefficient", "gravity"}, "pdr");
  c.smoothing_samples = static_cast<std::size_t>(get_integer(j, "smoothing_samples", static_cast<std::int64_t>(c.smoothing_samples)));
  c.peak_threshold = get_number(j, "peak_threshold", c.peak_threshold);
  c.min_step_interval = get_number(j, "min_step_interval", c.min_step_interval);
  c.step_coefficient = get_number(j, "step_coefficient", c.step_coefficient);
  c.gravity = get_number(j, "gravity", c.gravity);
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::kConfig, std::string("pdr: ") + e.what());
  }
  return c;
}

json seeds_from_manifest(const fs::path& dir) {
  const fs::path p = dir / kManifest;
  if (!fs::exists(p)) return nullptr;
  try {
    const json m = json::parse(read_file(p));
    json seeds = json::object();
    for (const char* key : {"seed", "motion_seed", "noise_seed"}) {
      if (m.contains(key)) seeds[key] = m[key];
    }
    return seeds;
  } catch (const json::exception&) {
    return nullptr;
  }
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
    case ErrorKind::kInvalidInput:
      return kExitConfig;
    case ErrorKind::kIo:
    case ErrorKind::kCorruptFile:
    case ErrorKind::kVersionMismatch:
    case ErrorKind::kAlignment:
    case ErrorKind::kEmptyInput:
    case ErrorKind::kInsufficientData:
    case ErrorKind::kUnsupportedRate:
    case ErrorKind::kModelContract:
    case ErrorKind::kOutOfRange:
      return kExitData;
    case ErrorKind::kNumericOverflow:
    case ErrorKind::kDegenerate:
    case ErrorKind::kAliasing:
      return kExitNumeric;
    case ErrorKind::kTrainingDiverged:
      return kExitTraining;
  }
  return kExitFailure;
}

fs::path default_output_dir() {
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return env;
  return "ionet_out";
}

// --- simulate -------------------------------------------------------------------

SimulateResult cmd_simulate(const fs::path& config, const Overrides& o, std::ostream& log) {
  const ConfigFile cfg = load_config(config);
  reject_unknown(cfg.doc, {"profile", "noise", "seed", "tracks", "output_dir"}, "simulate config");
  if (!cfg.doc.contains("profile")) throw Error(ErrorKind::kConfig, "simulate config needs a 'profile'");
  MotionProfile profile = motion_profile_from(cfg.doc["profile"], cfg.base_dir);
  if (o.duration) {
    if (profile.kind == MotionKind::kScripted) {
      throw Error(ErrorKind::kConfig, "--duration cannot override a scripted profile");
    }
    profile.duration = *o.duration;
  }
  const std::uint64_t seed = o.seed.value_or(get_seed(cfg.doc, "seed", 0));
  const int tracks = o.tracks.value_or(static_cast<int>(get_integer(cfg.doc, "tracks", 1)));
  if (tracks < 1) throw Error(ErrorKind::kConfig, "tracks must be at least 1");
  const bool noisy = cfg.doc.contains("noise") && !cfg.doc["noise"].is_null();

  SimulateResult result;
  result.output_dir = output_dir_for(cfg, o);
  ensure_dir(result.output_dir);
  const GravityVector g;
  for (int i = 0; i < tracks; ++i) {
    const auto index = static_cast<std::uint64_t>(i);
    const std::uint64_t motion_seed = tracks == 1 ? seed : derive_seed(seed, 2 * index);
    const std::uint64_t noise_seed = derive_seed(seed, 2 * index + 1);
    char name[32];
    std::snprintf(name, sizeof(name), "track_%03d", i);
    const fs::path dir = tracks == 1 ? result.output_dir : result.output_dir / name;

    const std::vector<TruthPose> truth = synthesize(profile, motion_seed);
    std::vector<ImuSample> imu = inverse_imu(truth, g);
    json noise_json = nullptr;
    if (noisy) {
      const NoiseModel model = noise_model_from(cfg.doc["noise"], cfg.base_dir, noise_seed);
      imu = corrupt(imu, model);
      noise_json = json::parse(to_json(model));
    }
    const DatasetFiles files = export_dataset(truth, imu, dir);

    const std::string profile_text = to_json(profile);
    json manifest = {
        {"command", "simulate"},
        {"version", IONET_VERSION},
        {"config_hash", cfg.hash},
        {"seed", seed},
        {"track", i},
        {"motion_seed", motion_seed},
        {"profile", json::parse(profile_text)},
        {"profile_hash", fnv1a_hex(profile_text)},
        {"noise", noise_json},
        {"samples", imu.size()},
        {"rate", profile.rate},
        {"files", {{"imu.csv", file_hash(files.imu)}, {"truth.csv", file_hash(files.truth)}}},
    };
    if (noisy) {
      manifest["noise_seed"] = noise_seed;
      manifest["noise_hash"] = fnv1a_hex(noise_json.dump());
    }
    write_json(dir / kManifest, manifest);
    log << "simulate: wrote " << imu.size() << " samples to " << dir.string() << '\n';
    result.track_dirs.push_back(dir);
  }
  return result;
}

// --- train ----------------------------------------------------------------------

namespace {

LabeledDataset load_labeled(const std::vector<fs::path>& roots, std::size_t n, std::size_t stride,
                            json& hashes) {
  LabeledDataset d;
  for (const fs::path& root : roots) {
    for (const fs::path& dir : track_dirs(root)) {
      TrackData t = read_track_dir(dir, true);
      hashes[dir.string()] = file_hash(dir / "imu.csv");
      d.add_track(std::move(t.imu), t.truth, n, stride);
    }
  }
  return d;
}

}  // namespace

TrainResult cmd_train(const fs::path& config, const Overrides& o, std::ostream& log) {
  const ConfigFile cfg = load_config(config);
  reject_unknown(cfg.doc,
                 {"train", "validation", "window", "stride", "hidden", "layers", "epochs", "batch_size",
                  "learning_rate", "dropout", "kappa", "seed", "profile", "resume", "output_dir"},
                 "train config");
  TrainingConfig tc;
  tc.shape.window = static_cast<int>(get_integer(cfg.doc, "window", tc.shape.window));
  tc.shape.hidden = static_cast<int>(get_integer(cfg.doc, "hidden", tc.shape.hidden));
  tc.shape.layers = static_cast<int>(get_integer(cfg.doc, "layers", tc.shape.layers));
  tc.epochs = o.epochs.value_or(static_cast<int>(get_integer(cfg.doc, "epochs", tc.epochs)));
  tc.batch_size = static_cast<int>(get_integer(cfg.doc, "batch_size", tc.batch_size));
  tc.learning_rate = get_number(cfg.doc, "learning_rate", tc.learning_rate);
  tc.dropout_rate = get_number(cfg.doc, "dropout", tc.dropout_rate);
  tc.kappa = get_number(cfg.doc, "kappa", tc.kappa);
  tc.rng_seed = o.seed.value_or(get_seed(cfg.doc, "seed", 0));
  const auto stride = o.stride.value_or(static_cast<std::size_t>(get_integer(cfg.doc, "stride", kDefaultStride)));
  const std::string profile = o.profile.value_or(get_string(cfg.doc, "profile", "walk"));
  if (tc.shape.window < 2 || tc.shape.hidden < 1 || tc.shape.layers < 1 || stride == 0) {
    throw Error(ErrorKind::kConfig, "train config: window, hidden, layers and stride must be positive");
  }
  try {
    tc.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::kConfig, std::string("train config: ") + e.what());
  }

  const auto train_roots = path_list(cfg, "train");
  if (train_roots.empty()) throw Error(ErrorKind::kConfig, "train config needs 'train' data directories");
  json hashes = json::object();
  const auto n = static_cast<std::size_t>(tc.shape.window);
  const LabeledDataset train_set = load_labeled(train_roots, n, stride, hashes);
  // Validation windows never overlap each other.
  const LabeledDataset val_set = load_labeled(path_list(cfg, "validation"), n, n, hashes);
  log << "train: " << train_set.size() << " training windows, " << val_set.size()
      << " validation windows, profile '" << profile << "'\n";

  std::optional<Model> resume;
  std::optional<fs::path> resume_path = o.resume;
  if (!resume_path && cfg.doc.contains("resume")) resume_path = resolve(cfg.base_dir, get_string(cfg.doc, "resume", ""));
  if (resume_path) {
    resume = load_model(*resume_path);
    if (!(resume->params.shape == tc.shape)) {
      throw Error(ErrorKind::kConfig, "resume weights " + resume_path->string() + " do not match the configured architecture");
    }
    log << "train: resuming from " << resume_path->string() << " at epoch " << resume->epochs_trained << '\n';
  }

  tc.on_epoch = [&log](int epoch, double tr, double val) {
    log << "epoch " << epoch << "  train " << format_double(tr) << "  val " << format_double(val) << '\n';
  };
  const TrainingResult r = train(train_set, val_set, tc, resume ? &*resume : nullptr);
  Model model = r.model;
  model.profile = profile;

  const fs::path out = output_dir_for(cfg, o);
  ensure_dir(out);
  TrainResult result;
  result.weights = out / ("model_" + profile + ".json");
  result.loss_history = out / "loss_history.csv";
  save_model(model, result.weights);
  {
    std::ofstream csv(result.loss_history, std::ios::binary);
    if (!csv) throw Error(ErrorKind::kIo, "cannot write " + result.loss_history.string());
    csv << "epoch,train_loss,val_loss\n";
    for (const EpochLoss& e : r.history) {
      csv << e.epoch << ',' << format_double(e.train) << ',' << format_double(e.validation) << '\n';
    }
  }
  result.best_epoch = r.best_epoch;
  result.initial_validation = r.history.front().validation;
  for (const EpochLoss& e : r.history) {
    if (e.epoch == r.best_epoch) result.best_validation = e.validation;
  }
  const json manifest = {
      {"command", "train"},
      {"version", IONET_VERSION},
      {"config_hash", cfg.hash},
      {"seed", tc.rng_seed},
      {"profile", profile},
      {"window", tc.shape.window},
      {"stride", stride},
      {"epochs", tc.epochs},
      {"best_epoch", r.best_epoch},
      {"resumed_from", resume_path ? json(resume_path->string()) : json(nullptr)},
      {"data", hashes},
      {"weights_hash", file_hash(result.weights)},
      {"loss_history_hash", file_hash(result.loss_history)},
  };
  write_json(out / "train_manifest.json", manifest);
  log << "train: best epoch " << r.best_epoch << ", weights " << result.weights.string() << '\n';
  return result;
}

// --- track ----------------------------------------------------------------------

std::vector<fs::path> cmd_track(const fs::path& config, const Overrides& o, std::ostream& log) {
  const ConfigFile cfg = load_config(config);
  reject_unknown(cfg.doc,
                 {"data", "trackers", "weights", "models", "profile", "mode", "dense_stride", "pdr", "output_dir"},
                 "track config");
  fs::path data_dir;
  if (o.data) data_dir = *o.data;
  else if (cfg.doc.contains("data")) data_dir = resolve(cfg.base_dir, get_string(cfg.doc, "data", ""));
  else throw Error(ErrorKind::kConfig, "track config needs 'data'");

  std::vector<std::string> trackers = o.trackers;
  if (trackers.empty()) {
    if (cfg.doc.contains("trackers")) {
      if (!cfg.doc["trackers"].is_array()) throw Error(ErrorKind::kConfig, "'trackers' must be a list");
      for (const json& t : cfg.doc["trackers"]) trackers.push_back(t.get<std::string>());
    } else {
      trackers = {"sins", "pdr", "ionet"};
    }
  }
  for (const std::string& t : trackers) {
    if (t != "sins" && t != "pdr" && t != "ionet") {
      throw Error(ErrorKind::kConfig, "unknown tracker '" + t + "' (expected sins, pdr or ionet)");
    }
  }

  const TrackData data = read_track_dir(data_dir, false);
  if (data.imu.size() < 2) throw Error(ErrorKind::kInsufficientData, "track: need at least two IMU samples");
  const double dt = uniform_dt(data.imu);
  const TruthPose start = start_state(data);
  if (data.truth.empty()) log << "track: no truth.csv, starting from rest at the origin\n";

  const fs::path out = output_dir_for(cfg, o);
  ensure_dir(out);
  std::vector<fs::path> written;
  json outputs = json::object();
  json provenance = {{"command", "track"}, {"version", IONET_VERSION}, {"config_hash", cfg.hash},
                     {"data", data_dir.string()}, {"imu_hash", file_hash(data_dir / "imu.csv")}};
  if (json seeds = seeds_from_manifest(data_dir); !seeds.is_null()) provenance["data_seeds"] = seeds;

  for (const std::string& name : trackers) {
    std::vector<TrackPoint> track;
    if (name == "sins") {
      const NavState init{start.attitude, start.velocity, start.position};
      track.push_back({start.t, planar(start)});
      const auto body = planar_track(integrate_track(data.imu, init, GravityVector(), dt), data.imu);
      track.insert(track.end(), body.begin(), body.end());
    } else if (name == "pdr") {
      const PdrConfig pc = pdr_config_from(cfg.doc.value("pdr", json(nullptr)));
      track = pdr_track(data.imu, planar(start), pc);
      const double seconds = data.imu.back().t - data.imu.front().t + dt;
      const std::size_t steps = track.size() - 1;
      if (static_cast<double>(steps) < kMinPlausibleStepRate * seconds) {
        log << "warning: pdr detected only " << steps << " steps in " << format_double(seconds)
            << " s of data; step detection fails on stepless motion (e.g. a trolley), so the pdr track is unreliable\n";
      }
      provenance["pdr_steps"] = steps;
    } else {
      const std::string profile = o.profile.value_or(get_string(cfg.doc, "profile", "walk"));
      std::optional<fs::path> weights = o.weights;
      if (!weights && cfg.doc.contains("weights")) weights = resolve(cfg.base_dir, get_string(cfg.doc, "weights", ""));
      if (!weights && cfg.doc.contains("models")) {
        const json& models = cfg.doc["models"];
        if (!models.is_object()) throw Error(ErrorKind::kConfig, "'models' must map profile names to weight files");
        if (models.contains(profile)) weights = resolve(cfg.base_dir, models[profile].get<std::string>());
      }
      if (!weights) {
        throw Error(ErrorKind::kConfig, "tracker 'ionet' needs model weights: set \"weights\", \"models\"." +
                                            profile + " or --weights");
      }
      const Model model = load_model(*weights);
      if (model.profile != profile) {
        log << "warning: weights " << weights->string() << " were trained for profile '" << model.profile
            << "', tracking as '" << profile << "'\n";
      }
      const std::string mode = o.mode.value_or(get_string(cfg.doc, "mode", "non_overlapping"));
      ChainMode chain_mode;
      if (mode == "non_overlapping") chain_mode = ChainMode::kNonOverlapping;
      else if (mode == "dense") chain_mode = ChainMode::kDense;
      else throw Error(ErrorKind::kConfig, "mode must be 'non_overlapping' or 'dense', got '" + mode + "'");
      const auto stride = static_cast<std::size_t>(get_integer(cfg.doc, "dense_stride", kDefaultStride));
      track.push_back({start.t, planar(start)});
      const auto body = predict_track(model, data.imu, planar(start), chain_mode, stride);
      track.insert(track.end(), body.begin(), body.end());
      provenance["ionet_weights_hash"] = file_hash(*weights);
      provenance["ionet_profile"] = profile;
      provenance["ionet_mode"] = mode;
    }
    const fs::path file = out / (name + ".csv");
    write_track_csv(file, track);
    outputs[name] = {{"file", file.filename().string()}, {"points", track.size()}, {"hash", file_hash(file)}};
    log << "track: " << name << " -> " << file.string() << " (" << track.size() << " poses)\n";
    written.push_back(file);
  }
  provenance["outputs"] = outputs;
  write_json(out / "track_manifest.json", provenance);
  return written;
}

// --- eval -----------------------------------------------------------------------

fs::path cmd_eval(const fs::path& config, const Overrides& o, std::ostream& log) {
  const ConfigFile cfg = load_config(config);
  reject_unknown(cfg.doc, {"truth", "estimates", "tracks_dir", "marks", "fraction", "cdf_resolution", "output_dir"},
                 "eval config");
  fs::path truth_path;
  if (o.data) truth_path = *o.data;
  else if (cfg.doc.contains("truth")) truth_path = resolve(cfg.base_dir, get_string(cfg.doc, "truth", ""));
  else throw Error(ErrorKind::kConfig, "eval config needs 'truth'");
  if (fs::is_directory(truth_path)) truth_path /= "truth.csv";
  const std::vector<TruthPose> truth = read_truth_csv(truth_path);

  std::map<std::string, fs::path> estimates;
  if (cfg.doc.contains("estimates")) {
    const json& e = cfg.doc["estimates"];
    if (!e.is_object()) throw Error(ErrorKind::kConfig, "'estimates' must map tracker names to CSV files");
    for (const auto& [name, path] : e.items()) estimates[name] = resolve(cfg.base_dir, path.get<std::string>());
  }
  if (cfg.doc.contains("tracks_dir")) {
    const fs::path dir = resolve(cfg.base_dir, get_string(cfg.doc, "tracks_dir", ""));
    if (!fs::is_directory(dir)) throw Error(ErrorKind::kIo, "tracks_dir not found: " + dir.string());
    for (const char* name : {"sins", "pdr", "ionet"}) {
      const fs::path p = dir / (std::string(name) + ".csv");
      if (fs::exists(p) && !estimates.count(name)) estimates[name] = p;
    }
  }
  if (!o.trackers.empty()) {
    std::erase_if(estimates, [&](const auto& kv) {
      return std::find(o.trackers.begin(), o.trackers.end(), kv.first) == o.trackers.end();
    });
  }
  if (estimates.empty()) throw Error(ErrorKind::kConfig, "eval: no estimates to evaluate");

  std::vector<double> marks{50.0, 100.0};
  if (cfg.doc.contains("marks")) marks = cfg.doc["marks"].get<std::vector<double>>();
  const double fraction = get_number(cfg.doc, "fraction", 0.9);
  const double resolution = get_number(cfg.doc, "cdf_resolution", 0.1);
  if (!(fraction > 0.0 && fraction <= 1.0) || !(resolution > 0.0)) {
    throw Error(ErrorKind::kConfig, "eval: fraction must lie in (0, 1] and cdf_resolution be positive");
  }

  const fs::path out = output_dir_for(cfg, o);
  ensure_dir(out);
  json report = {{"command", "eval"},
                 {"version", IONET_VERSION},
                 {"config_hash", cfg.hash},
                 {"truth", truth_path.string()},
                 {"truth_hash", file_hash(truth_path)},
                 {"fraction", fraction},
                 {"seeds", seeds_from_manifest(truth_path.parent_path())},
                 {"trackers", json::object()}};

  for (const auto& [name, path] : estimates) {
    const std::vector<TrackPoint> est = read_track_csv(path);
    const ErrorSeries series = position_errors(est, truth);
    json marks_json = json::array();
    json skipped = json::array();
    std::vector<double> reachable;
    for (double m : marks) {
      if (m <= series.distance.back() + 1e-9) reachable.push_back(m);
      else skipped.push_back(m);
    }
    const std::vector<double> at = error_at_distance(series, reachable);
    for (std::size_t i = 0; i < reachable.size(); ++i) marks_json.push_back({{"distance", reachable[i]}, {"error", at[i]}});
    json cdf = json::array();
    const auto curve = error_cdf(series, resolution);
    for (const CdfPoint& p : curve) cdf.push_back({p.error, p.fraction});
    double mean = 0.0;
    for (double e : series.error) mean += e;
    mean /= static_cast<double>(series.size());

    report["trackers"][name] = {
        {"estimate", path.string()},
        {"estimate_hash", file_hash(path)},
        {"matched_points", series.size()},
        {"percentile_error", percentile_error(series, fraction)},
        {"mean_error", mean},
        {"max_error", *std::max_element(series.error.begin(), series.error.end())},
        {"endpoint_error", at.back()},
        {"distance_travelled", series.distance.back()},
        {"error_at_distance", marks_json},
        {"skipped_marks", skipped},
        {"cdf", cdf},
    };
    {
      std::ofstream csv(out / ("errors_" + name + ".csv"), std::ios::binary);
      csv << "t,distance,error\n";
      for (std::size_t i = 0; i < series.size(); ++i) {
        csv << format_double(series.t[i]) << ',' << format_double(series.distance[i]) << ','
            << format_double(series.error[i]) << '\n';
      }
    }
    {
      std::ofstream csv(out / ("cdf_" + name + ".csv"), std::ios::binary);
      csv << "error,fraction\n";
      for (const CdfPoint& p : curve) csv << format_double(p.error) << ',' << format_double(p.fraction) << '\n';
    }
    log << "eval: " << name << "  p" << format_double(fraction * 100) << " "
        << format_double(percentile_error(series, fraction)) << " m, endpoint " << format_double(at.back()) << " m\n";
  }
  const fs::path report_path = out / "report.json";
  write_json(report_path, report);
  return report_path;
}

// --- entry point ----------------------------------------------------------------

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Inertial odometry toolkit: simulate, train, track, eval"};
  app.require_subcommand(1);
  app.set_version_flag("--version", IONET_VERSION);

  fs::path config;
  Overrides o;
  std::string output_dir;
  std::uint64_t seed = 0;
  auto common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config, "JSON config file")->required();
    sub->add_option("-o,--output-dir", output_dir, std::string("output directory (default $") + kOutputDirEnv + " or ./ionet_out)");
    sub->add_option("--seed", seed, "override the config seed");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "synthesize truth and IMU CSVs");
  common(simulate);
  double duration = 0.0;
  int tracks = 0;
  simulate->add_option("--duration", duration, "override profile duration, s");
  simulate->add_option("--tracks", tracks, "number of tracks to generate");

  CLI::App* train_cmd = app.add_subcommand("train", "train a per-profile odometry model");
  common(train_cmd);
  int epochs = 0;
  std::string resume;
  std::size_t stride = 0;
  std::string profile;
  train_cmd->add_option("--epochs", epochs, "override epoch count");
  train_cmd->add_option("--resume", resume, "continue from a weight file");
  train_cmd->add_option("--stride", stride, "training window stride, samples");
  train_cmd->add_option("--profile", profile, "profile name the model is trained for");

  CLI::App* track_cmd = app.add_subcommand("track", "run trackers on an IMU stream");
  common(track_cmd);
  std::string weights;
  std::string mode;
  std::string data;
  track_cmd->add_option("--tracker", o.trackers, "sins, pdr or ionet (repeatable)");
  track_cmd->add_option("--weights", weights, "ionet weight file");
  track_cmd->add_option("--profile", profile, "select the model trained for this profile");
  track_cmd->add_option("--mode", mode, "non_overlapping or dense");
  track_cmd->add_option("--data", data, "dataset directory");

  CLI::App* eval_cmd = app.add_subcommand("eval", "score tracker outputs against truth");
  common(eval_cmd);
  eval_cmd->add_option("--tracker", o.trackers, "restrict to these trackers (repeatable)");
  eval_cmd->add_option("--truth", data, "truth CSV or dataset directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  auto given = [](CLI::App* sub, const char* name) { return sub->count(name) > 0; };
  CLI::App* sub = app.get_subcommands().front();
  if (given(sub, "--output-dir")) o.output_dir = output_dir;
  if (given(sub, "--seed")) o.seed = seed;
  if (sub == simulate) {
    if (given(sub, "--duration")) o.duration = duration;
    if (given(sub, "--tracks")) o.tracks = tracks;
  }
  if (sub == train_cmd) {
    if (given(sub, "--epochs")) o.epochs = epochs;
    if (given(sub, "--resume")) o.resume = resume;
    if (given(sub, "--stride")) o.stride = stride;
  }
  if ((sub == train_cmd || sub == track_cmd) && given(sub, "--profile")) o.profile = profile;
  if (sub == track_cmd) {
    if (given(sub, "--weights")) o.weights = weights;
    if (given(sub, "--mode")) o.mode = mode;
    if (given(sub, "--data")) o.data = data;
  }
  if (sub == eval_cmd && given(sub, "--truth")) o.data = data;

  try {
    if (sub == simulate) {
      cmd_simulate(config, o, out);
    } else if (sub == train_cmd) {
      cmd_train(config, o, out);
    } else if (sub == track_cmd) {
      cmd_track(config, o, out);
    } else {
      cmd_eval(config, o, out);
    }
  } catch (const TrainingDiverged& e) {
    err << "error: " << e.what() << '\n';
    return kExitTraining;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const json::exception& e) {
    err << "error: bad config value: " << e.what() << '\n';
    return kExitConfig;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace ionet::cli
