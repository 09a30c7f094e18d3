#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "ionet/dataset_io.hpp"
#include "ionet/error.hpp"

namespace ionet::cli {

ConfigFile load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kConfig, "cannot open config file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  ConfigFile cfg;
  try {
    cfg.doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig, path.string() + ": invalid JSON: " + e.what());
  }
  if (!cfg.doc.is_object()) throw Error(ErrorKind::kConfig, path.string() + ": config must be a JSON object");
  cfg.base_dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  cfg.hash = fnv1a_hex(text);
  return cfg;
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(ErrorKind::kConfig, std::string(where) + ": unknown key '" + key + "'");
    }
  }
}

fs::path resolve(const fs::path& base, const fs::path& p) {
  return p.is_absolute() ? p : (base / p).lexically_normal();
}

namespace {

const json* find(const json& j, std::string_view key) {
  const auto it = j.find(std::string(key));
  return it == j.end() ? nullptr : &*it;
}

[[noreturn]] void type_error(std::string_view key, std::string_view expected) {
  throw Error(ErrorKind::kConfig, "config key '" + std::string(key) + "' must be " + std::string(expected));
}

}  // namespace

double get_number(const json& j, std::string_view key, double fallback) {
  const json* v = find(j, key);
  if (v == nullptr) return fallback;
  if (!v->is_number()) type_error(key, "a number");
  return v->get<double>();
}

std::int64_t get_integer(const json& j, std::string_view key, std::int64_t fallback) {
  const json* v = find(j, key);
  if (v == nullptr) return fallback;
  if (!v->is_number_integer()) type_error(key, "an integer");
  return v->get<std::int64_t>();
}

std::uint64_t get_seed(const json& j, std::string_view key, std::uint64_t fallback) {
  const json* v = find(j, key);
  if (v == nullptr) return fallback;
  if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() && v->get<std::int64_t>() < 0)) {
    type_error(key, "a non-negative integer");
  }
  return v->get<std::uint64_t>();
}

std::string get_string(const json& j, std::string_view key, const std::string& fallback) {
  const json* v = find(j, key);
  if (v == nullptr) return fallback;
  if (!v->is_string()) type_error(key, "a string");
  return v->get<std::string>();
}

MotionProfile motion_profile_from(const json& value, const fs::path& base) {
  if (value.is_string()) return load_motion_profile(resolve(base, value.get<std::string>()));
  if (value.is_object()) return parse_motion_profile(value.dump());
  throw Error(ErrorKind::kConfig, "'profile' must be an object or a path to a profile file");
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

std::string format_double(double x) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return ec == std::errc() ? std::string(buf, end) : std::string("nan");
}

}  // namespace ionet::cli
