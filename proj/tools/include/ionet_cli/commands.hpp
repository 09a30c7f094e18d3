#pragma once

// Subcommands of the `ionet` tool. Each reads a JSON config, applies
// command-line overrides and writes its artifacts plus a manifest into an
// output directory.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ionet/error.hpp"

namespace ionet::cli {

namespace fs = std::filesystem;

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "IONET_OUTPUT_DIR";

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitData = 3,
  kExitNumeric = 4,
  kExitTraining = 5,
};

int exit_code_for(ErrorKind kind);

struct Overrides {
  std::optional<fs::path> output_dir;
  std::optional<std::uint64_t> seed;
  // simulate
  std::optional<double> duration;
  std::optional<int> tracks;
  // train
  std::optional<int> epochs;
  std::optional<fs::path> resume;
  std::optional<std::size_t> stride;
  // train / track
  std::optional<std::string> profile;
  // track
  std::vector<std::string> trackers;
  std::optional<fs::path> weights;
  std::optional<std::string> mode;
  std::optional<fs::path> data;
};

/// Output directory precedence: override, config "output_dir", $IONET_OUTPUT_DIR,
/// then ./ionet_out.
fs::path default_output_dir();

struct SimulateResult {
  fs::path output_dir;
  std::vector<fs::path> track_dirs;
};
SimulateResult cmd_simulate(const fs::path& config, const Overrides& overrides, std::ostream& log);

struct TrainResult {
  fs::path weights;
  fs::path loss_history;
  int best_epoch = 0;
  double initial_validation = 0.0;
  double best_validation = 0.0;
};
TrainResult cmd_train(const fs::path& config, const Overrides& overrides, std::ostream& log);

/// Writes `<tracker>.csv` per requested tracker; returns the files written.
std::vector<fs::path> cmd_track(const fs::path& config, const Overrides& overrides, std::ostream& log);

/// Writes report.json plus per-tracker error and CDF tables.
fs::path cmd_eval(const fs::path& config, const Overrides& overrides, std::ostream& log);

/// Full command-line entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ionet::cli
