#include "ionet_cli/commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "ionet/dataset_io.hpp"
#include "ionet/neural_odometry.hpp"

namespace ionet::cli {
namespace {

namespace fs = std::filesystem;

struct RunResult {
  int code = 0;
  std::string out;
  std::string err;
};

RunResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ionet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ionet_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  // Noise-free walk (or trolley) dataset in dir_/<name>.
  fs::path simulate(const std::string& name, const std::string& kind, double duration, int seed = 1,
                    const std::string& noise = "") {
    const std::string cfg = "{\"profile\": {\"kind\": \"" + kind + "\", \"duration\": " + std::to_string(duration) +
                            ", \"speed_min\": 0.8, \"speed_max\": 1.4, \"random_turns\": true}, \"seed\": " +
                            std::to_string(seed) + (noise.empty() ? "" : ", \"noise\": " + noise) + "}";
    const fs::path c = write(name + "_sim.json", cfg);
    const RunResult r = run_cli({"simulate", "--config", c.string(), "-o", (dir_ / name).string()});
    EXPECT_EQ(r.code, 0) << r.err;
    return dir_ / name;
  }

  fs::path dir_;
};

TEST_F(Cli, SimulateRowCountAndDeterminism) {
  const fs::path cfg = write("walk.json", R"({"profile": {"kind": "walk", "duration": 120}, "seed": 4,
                                               "noise": {"preset": "consumer_mems"}})");
  ASSERT_EQ(run_cli({"simulate", "-c", cfg.string(), "-o", (dir_ / "a").string()}).code, 0);
  ASSERT_EQ(run_cli({"simulate", "-c", cfg.string(), "-o", (dir_ / "b").string()}).code, 0);
  EXPECT_EQ(line_count(dir_ / "a" / "imu.csv"), 12000u + 1u);
  EXPECT_EQ(line_count(dir_ / "a" / "truth.csv"), 12001u + 1u);
  for (const char* f : {"imu.csv", "truth.csv", "manifest.json"}) {
    EXPECT_EQ(read_file(dir_ / "a" / f), read_file(dir_ / "b" / f)) << f;
  }
  const std::string manifest = read_file(dir_ / "a" / "manifest.json");
  EXPECT_NE(manifest.find("\"noise_seed\""), std::string::npos);
  EXPECT_NE(manifest.find("\"profile_hash\""), std::string::npos);
}

TEST_F(Cli, SimulateMultipleTracksAndProfileFile) {
  write("trolley_profile.json", R"({"kind": "trolley", "duration": 5})");
  const fs::path cfg = write("sim.json", R"({"profile": "trolley_profile.json", "tracks": 3})");
  const RunResult r = run_cli({"simulate", "-c", cfg.string(), "-o", (dir_ / "t").string(), "--duration", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* d : {"track_000", "track_001", "track_002"}) {
    EXPECT_EQ(line_count(dir_ / "t" / d / "imu.csv"), 401u);
  }
}

TEST_F(Cli, MissingProfileFileNamesPath) {
  const fs::path cfg = write("sim.json", R"({"profile": "no_such_profile.json"})");
  const RunResult r = run_cli({"simulate", "-c", cfg.string(), "-o", (dir_ / "x").string()});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("no_such_profile.json"), std::string::npos) << r.err;
}

TEST_F(Cli, MissingConfigAndUnknownKey) {
  EXPECT_EQ(run_cli({"simulate", "-c", (dir_ / "nope.json").string()}).code, kExitConfig);
  const fs::path cfg = write("sim.json", R"({"profile": {"kind": "walk"}, "sed": 3})");
  const RunResult r = run_cli({"simulate", "-c", cfg.string()});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("sed"), std::string::npos);
  EXPECT_EQ(run_cli({"simulate"}).code, kExitConfig);
  EXPECT_EQ(run_cli({"fly"}).code, kExitConfig);
}

TEST_F(Cli, TrainTinyDatasetDeterministicAndResumable) {
  simulate("data", "walk", 20.0);
  simulate("val", "walk", 4.0, 2);
  // 2000 samples, window 20, stride 20: 100 windows.
  const fs::path cfg = write("train.json", R"({"train": ["data"], "validation": ["val"], "window": 20, "stride": 20,
                                               "hidden": 4, "layers": 1, "epochs": 3, "batch_size": 25, "seed": 9})");
  const RunResult a = run_cli({"train", "-c", cfg.string(), "-o", (dir_ / "m1").string()});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_NE(a.out.find("100 training windows"), std::string::npos) << a.out;
  ASSERT_EQ(run_cli({"train", "-c", cfg.string(), "-o", (dir_ / "m2").string()}).code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "m1" / "model_walk.json"));
  const std::string history = read_file(dir_ / "m1" / "loss_history.csv");
  EXPECT_EQ(history.rfind("epoch,train_loss,val_loss\n", 0), 0u);
  EXPECT_EQ(line_count(dir_ / "m1" / "loss_history.csv"), 5u);
  EXPECT_EQ(history, read_file(dir_ / "m2" / "loss_history.csv"));
  EXPECT_EQ(read_file(dir_ / "m1" / "model_walk.json"), read_file(dir_ / "m2" / "model_walk.json"));

  const RunResult resumed = run_cli({"train", "-c", cfg.string(), "-o", (dir_ / "m3").string(), "--resume",
                                     (dir_ / "m1" / "model_walk.json").string(), "--epochs", "2"});
  ASSERT_EQ(resumed.code, 0) << resumed.err;
  const std::string h3 = read_file(dir_ / "m3" / "loss_history.csv");
  EXPECT_NE(h3.find("\n3,"), std::string::npos) << h3;
  EXPECT_NE(h3.find("\n5,"), std::string::npos) << h3;
  EXPECT_EQ(load_model(dir_ / "m3" / "model_walk.json").epochs_trained, 5);
}

TEST_F(Cli, TrainProfileSelectsFileName) {
  simulate("data", "trolley", 4.0);
  const fs::path cfg = write("train.json", R"({"train": "data", "window": 20, "stride": 20, "hidden": 2,
                                               "layers": 1, "epochs": 1})");
  ASSERT_EQ(run_cli({"train", "-c", cfg.string(), "-o", (dir_ / "m").string(), "--profile", "trolley"}).code, 0);
  EXPECT_EQ(load_model(dir_ / "m" / "model_trolley.json").profile, "trolley");
}

TEST_F(Cli, TrainDivergenceExitCode) {
  simulate("data", "walk", 4.0);
  // The first Adam step throws every weight to ~1e300.
  const fs::path cfg = write("train.json", R"({"train": "data", "window": 20, "stride": 20, "hidden": 2,
                                               "layers": 1, "epochs": 2, "learning_rate": 1e300})");
  const RunResult r = run_cli({"train", "-c", cfg.string(), "-o", (dir_ / "m").string()});
  EXPECT_EQ(r.code, kExitTraining) << r.err;
  EXPECT_NE(r.err.find("diverged in epoch 2"), std::string::npos) << r.err;
}

TEST_F(Cli, TrackSinsReproducesNoiseFreeTruth) {
  simulate("data", "walk", 10.0);
  const fs::path cfg = write("track.json", R"({"data": "data", "trackers": ["sins"]})");
  const RunResult r = run_cli({"track", "-c", cfg.string(), "-o", (dir_ / "tr").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto est = read_track_csv(dir_ / "tr" / "sins.csv");
  const auto truth = read_truth_csv(dir_ / "data" / "truth.csv");
  ASSERT_EQ(est.size(), truth.size());
  EXPECT_DOUBLE_EQ(est.back().t, truth.back().t);
  EXPECT_LE(std::hypot(est.back().pose.x - truth.back().position.x(), est.back().pose.y - truth.back().position.y()), 1e-6);
}

TEST_F(Cli, TrackPdrWarnsOnTrolley) {
  simulate("data", "trolley", 30.0);
  const fs::path cfg = write("track.json", R"({"data": "data", "trackers": ["pdr"]})");
  const RunResult r = run_cli({"track", "-c", cfg.string(), "-o", (dir_ / "tr").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("warning: pdr detected only"), std::string::npos) << r.out;
  EXPECT_TRUE(fs::exists(dir_ / "tr" / "pdr.csv"));
}

TEST_F(Cli, TrackIonetNeedsWeights) {
  simulate("data", "walk", 5.0);
  const fs::path cfg = write("track.json", R"({"data": "data", "trackers": ["ionet"]})");
  const RunResult r = run_cli({"track", "-c", cfg.string(), "-o", (dir_ / "tr").string()});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("needs model weights"), std::string::npos) << r.err;
}

TEST_F(Cli, TrackIonetDenseIsTenHertzAndSelectsProfileModel) {
  simulate("data", "walk", 10.0);
  Model walk;
  walk.params = ModelParams::zeros(ModelShape{6, 2, 1, 200});
  walk.params.head_bias << 2.0, 0.0;
  save_model(walk, dir_ / "walk.json");
  Model trolley = walk;
  trolley.profile = "trolley";
  trolley.params.head_bias << 0.5, 0.0;
  save_model(trolley, dir_ / "trolley.json");
  const fs::path cfg = write("track.json", R"({"data": "data", "trackers": ["ionet"], "mode": "dense",
                                               "models": {"walk": "walk.json", "trolley": "trolley.json"}})");
  ASSERT_EQ(run_cli({"track", "-c", cfg.string(), "-o", (dir_ / "w").string()}).code, 0);
  const auto w = read_track_csv(dir_ / "w" / "ionet.csv");
  ASSERT_GT(w.size(), 50u);
  for (std::size_t i = 2; i < w.size(); ++i) EXPECT_NEAR(w[i].t - w[i - 1].t, 0.1, 1e-9);

  ASSERT_EQ(run_cli({"track", "-c", cfg.string(), "-o", (dir_ / "t").string(), "--profile", "trolley",
                     "--mode", "non_overlapping"})
                .code,
            0);
  const auto t = read_track_csv(dir_ / "t" / "ionet.csv");
  ASSERT_EQ(t.size(), 6u);  // start + 5 windows
  EXPECT_NEAR(std::hypot(t.back().pose.x - t.front().pose.x, t.back().pose.y - t.front().pose.y), 2.5, 1e-9);
}

TEST_F(Cli, EvalPerfectAndMultipleTrackers) {
  simulate("data", "walk", 60.0, 3, R"({"preset": "consumer_mems"})");
  const auto truth = read_truth_csv(dir_ / "data" / "truth.csv");
  std::vector<TrackPoint> perfect;
  for (const auto& p : truth) perfect.push_back({p.t, {p.position.x(), p.position.y(), 0.0}});
  write_track_csv(dir_ / "perfect.csv", perfect);
  const fs::path tcfg = write("track.json", R"({"data": "data", "trackers": ["sins", "pdr"]})");
  ASSERT_EQ(run_cli({"track", "-c", tcfg.string(), "-o", (dir_ / "tr").string()}).code, 0);

  const fs::path cfg = write("eval.json", R"({"truth": "data", "tracks_dir": "tr",
                                              "estimates": {"ionet": "perfect.csv"}, "marks": [50, 500]})");
  const RunResult r = run_cli({"eval", "-c", cfg.string(), "-o", (dir_ / "ev").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string report = read_file(dir_ / "ev" / "report.json");
  for (const char* key : {"\"sins\"", "\"pdr\"", "\"ionet\"", "\"config_hash\"", "\"noise_seed\"", "\"motion_seed\"",
                          "\"cdf\"", "\"percentile_error\"", "\"skipped_marks\""}) {
    EXPECT_NE(report.find(key), std::string::npos) << key;
  }
  EXPECT_TRUE(fs::exists(dir_ / "ev" / "cdf_sins.csv"));

  const fs::path only = write("eval_perfect.json", R"({"truth": "data/truth.csv", "estimates": {"ionet": "perfect.csv"}})");
  ASSERT_EQ(run_cli({"eval", "-c", only.string(), "-o", (dir_ / "ev2").string()}).code, 0);
  std::ifstream errors(dir_ / "ev2" / "errors_ionet.csv");
  std::string line;
  std::getline(errors, line);
  EXPECT_EQ(line, "t,distance,error");
  std::size_t rows = 0;
  while (std::getline(errors, line)) {
    EXPECT_EQ(line.substr(line.rfind(',') + 1), "0");
    ++rows;
  }
  EXPECT_EQ(rows, truth.size());
  const std::string r2 = read_file(dir_ / "ev2" / "report.json");
  EXPECT_NE(r2.find("\"percentile_error\": 0.0"), std::string::npos) << r2.substr(0, 400);
}

TEST_F(Cli, EvalAlignmentErrorExitCode) {
  simulate("data", "walk", 5.0);
  write_track_csv(dir_ / "late.csv", std::vector<TrackPoint>{{100.0, {}}});
  const fs::path cfg = write("eval.json", R"({"truth": "data", "estimates": {"x": "late.csv"}})");
  const RunResult r = run_cli({"eval", "-c", cfg.string(), "-o", (dir_ / "ev").string()});
  EXPECT_EQ(r.code, kExitData);
  EXPECT_NE(r.err.find("no estimate timestamp"), std::string::npos) << r.err;
}

TEST_F(Cli, CorruptDataExitCode) {
  simulate("data", "walk", 5.0);
  std::ofstream(dir_ / "data" / "imu.csv", std::ios::app) << "garbage\n";
  const fs::path cfg = write("track.json", R"({"data": "data", "trackers": ["sins"]})");
  const RunResult r = run_cli({"track", "-c", cfg.string(), "-o", (dir_ / "tr").string()});
  EXPECT_EQ(r.code, kExitData);
  EXPECT_NE(r.err.find("imu.csv"), std::string::npos);
}

TEST_F(Cli, BinaryHonoursOutputDirEnvironment) {
  const fs::path cfg = write("sim.json", R"({"profile": {"kind": "walk", "duration": 3}})");
  const fs::path target = dir_ / "from_env";
  const std::string cmd = std::string(kOutputDirEnv) + "='" + target.string() + "' '" + IONET_CLI_PATH +
                          "' simulate --config '" + cfg.string() + "' > /dev/null";
  EXPECT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_EQ(line_count(target / "imu.csv"), 301u);
  const std::string bad = std::string("'") + IONET_CLI_PATH + "' simulate --config '" + (dir_ / "none.json").string() +
                          "' 2> /dev/null";
  const int status = std::system(bad.c_str());
  EXPECT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), kExitConfig);
}

}  // namespace
}  // namespace ionet::cli
