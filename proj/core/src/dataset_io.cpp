#include "ionet/dataset_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ionet/error.hpp"

namespace ionet {

namespace {

namespace fs = std::filesystem;

void append_number(std::string& line, double value) {
  std::array<char, 32> buf{};
  const auto result = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  line.append(buf.data(), result.ptr);
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, std::string_view header) : path_(path) {
    if (path.has_parent_path()) {
      std::error_code ec;
      fs::create_directories(path.parent_path(), ec);
    }
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw Error(ErrorKind::kIo, "cannot open for writing: " + path.string());
    out_ << header << '\n';
  }

  void row(std::initializer_list<double> values) {
    line_.clear();
    bool first = true;
    for (double v : values) {
      if (!first) line_.push_back(',');
      append_number(line_, v);
      first = false;
    }
    line_.push_back('\n');
    out_ << line_;
  }

  void close() {
    out_.close();
    if (!out_) throw Error(ErrorKind::kIo, "write failed: " + path_.string());
  }

 private:
  fs::path path_;
  std::ofstream out_;
  std::string line_;
};

/// Reads a CSV with an exact header and a fixed column count.
template <typename RowFn>
void read_csv(const fs::path& path, std::string_view header, std::size_t columns, RowFn&& on_row) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open for reading: " + path.string());
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorKind::kCorruptFile, path.string() + ": missing header");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) {
    throw Error(ErrorKind::kCorruptFile,
                path.string() + ": unexpected header '" + line + "', expected '" + std::string(header) + "'");
  }
  std::vector<double> values(columns);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (std::size_t c = 0; c < columns; ++c) {
      const auto [next, ec] = std::from_chars(p, end, values[c]);
      const bool last = c + 1 == columns;
      if (ec != std::errc() || (last ? next != end : (next == end || *next != ','))) {
        std::ostringstream msg;
        msg << path.string() << ":" << line_no << ": malformed row (expected " << columns << " numbers)";
        throw Error(ErrorKind::kCorruptFile, msg.str());
      }
      p = last ? next : next + 1;
    }
    on_row(values);
  }
}

}  // namespace

void write_imu_csv(const fs::path& path, std::span<const ImuSample> samples) {
  CsvWriter w(path, kImuCsvHeader);
  for (const ImuSample& s : samples) {
    w.row({s.t, s.a.x(), s.a.y(), s.a.z(), s.w.x(), s.w.y(), s.w.z()});
  }
  w.close();
}

std::vector<ImuSample> read_imu_csv(const fs::path& path) {
  std::vector<ImuSample> out;
  read_csv(path, kImuCsvHeader, 7, [&](const std::vector<double>& v) {
    out.push_back({v[0], Vec3(v[1], v[2], v[3]), Vec3(v[4], v[5], v[6])});
  });
  return out;
}

void write_truth_csv(const fs::path& path, std::span<const TruthPose> truth) {
  CsvWriter w(path, kTruthCsvHeader);
  for (const TruthPose& p : truth) {
    const Mat3& c = p.attitude;
    w.row({p.t, p.position.x(), p.position.y(), p.position.z(), p.velocity.x(), p.velocity.y(),
           p.velocity.z(), c(0, 0), c(0, 1), c(0, 2), c(1, 0), c(1, 1), c(1, 2), c(2, 0), c(2, 1),
           c(2, 2)});
  }
  w.close();
}

std::vector<TruthPose> read_truth_csv(const fs::path& path) {
  std::vector<TruthPose> out;
  read_csv(path, kTruthCsvHeader, 16, [&](const std::vector<double>& v) {
    TruthPose p;
    p.t = v[0];
    p.position = Vec3(v[1], v[2], v[3]);
    p.velocity = Vec3(v[4], v[5], v[6]);
    p.attitude << v[7], v[8], v[9], v[10], v[11], v[12], v[13], v[14], v[15];
    out.push_back(p);
  });
  return out;
}

void write_track_csv(const fs::path& path, std::span<const TrackPoint> track) {
  CsvWriter w(path, kTrackCsvHeader);
  for (const TrackPoint& p : track) w.row({p.t, p.pose.x, p.pose.y, p.pose.psi});
  w.close();
}

std::vector<TrackPoint> read_track_csv(const fs::path& path) {
  std::vector<TrackPoint> out;
  read_csv(path, kTrackCsvHeader, 4, [&](const std::vector<double>& v) {
    out.push_back({v[0], Pose2D{v[1], v[2], v[3]}});
  });
  return out;
}

DatasetFiles export_dataset(std::span<const TruthPose> truth, std::span<const ImuSample> samples,
                            const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create directory " + dir.string() + ": " + ec.message());
  DatasetFiles files{dir / "imu.csv", dir / "truth.csv"};
  write_imu_csv(files.imu, samples);
  write_truth_csv(files.truth, truth);
  return files;
}

bool is_uniform(std::span<const ImuSample> samples) {
  if (samples.size() < 3) return true;
  const double dt = (samples.back().t - samples.front().t) / static_cast<double>(samples.size() - 1);
  for (std::size_t k = 1; k < samples.size(); ++k) {
    if (std::abs(samples[k].t - samples[k - 1].t - dt) > 1e-9 * std::max(1.0, std::abs(samples[k].t))) {
      return false;
    }
  }
  return true;
}

std::vector<ImuSample> resample_uniform(std::span<const ImuSample> samples, double rate) {
  if (samples.size() < 2) throw Error(ErrorKind::kInsufficientData, "resampling needs at least two samples");
  if (!(rate > 0.0)) throw Error(ErrorKind::kInvalidInput, "resampling rate must be positive");
  for (std::size_t k = 1; k < samples.size(); ++k) {
    if (!(samples[k].t > samples[k - 1].t)) {
      throw Error(ErrorKind::kInvalidInput, "resampling needs strictly increasing timestamps");
    }
  }
  const double t0 = samples.front().t;
  const double span = samples.back().t - t0;
  const auto count = static_cast<std::size_t>(std::floor(span * rate + 1e-9)) + 1;
  std::vector<ImuSample> out;
  out.reserve(count);
  std::size_t j = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double t = t0 + static_cast<double>(k) / rate;
    while (j + 2 < samples.size() && samples[j + 1].t < t) ++j;
    const ImuSample& lo = samples[j];
    const ImuSample& hi = samples[j + 1];
    const double u = std::clamp((t - lo.t) / (hi.t - lo.t), 0.0, 1.0);
    out.push_back({t, lo.a + u * (hi.a - lo.a), lo.w + u * (hi.w - lo.w)});
  }
  return out;
}

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream ss;
  ss << std::hex;
  ss.width(16);
  ss.fill('0');
  ss << h;
  return ss.str();
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace ionet
