#pragma once

// JSON config plumbing shared by the subcommands.

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ionet/neural_odometry.hpp"
#include "ionet/simulator.hpp"

namespace ionet::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct ConfigFile {
  json doc;
  fs::path base_dir;  // relative paths in the config resolve against this
  std::string hash;   // FNV-1a of the raw file bytes
};

/// Reads and parses a JSON object; errors are kConfig and name the path.
ConfigFile load_config(const fs::path& path);

void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed, std::string_view where);

fs::path resolve(const fs::path& base, const fs::path& p);

double get_number(const json& j, std::string_view key, double fallback);
std::int64_t get_integer(const json& j, std::string_view key, std::int64_t fallback);
std::uint64_t get_seed(const json& j, std::string_view key, std::uint64_t fallback);
std::string get_string(const json& j, std::string_view key, const std::string& fallback);

/// A profile given inline as an object or as a path to a profile file.
MotionProfile motion_profile_from(const json& value, const fs::path& base);

/// Writes pretty JSON with a trailing newline.
void write_json(const fs::path& path, const json& j);

/// Shortest round-trip decimal form.
std::string format_double(double x);

}  // namespace ionet::cli
