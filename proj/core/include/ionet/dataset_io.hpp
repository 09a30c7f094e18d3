#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ionet/strapdown.hpp"
#include "ionet/types.hpp"

namespace ionet {

inline constexpr std::string_view kImuCsvHeader = "t,ax,ay,az,wx,wy,wz";
inline constexpr std::string_view kTruthCsvHeader =
    "t,x,y,z,vx,vy,vz,c11,c12,c13,c21,c22,c23,c31,c32,c33";
inline constexpr std::string_view kTrackCsvHeader = "t,x,y,psi";

// Numbers are written in shortest round-trip form, so write→read is exact.
void write_imu_csv(const std::filesystem::path& path, std::span<const ImuSample> samples);
std::vector<ImuSample> read_imu_csv(const std::filesystem::path& path);

void write_truth_csv(const std::filesystem::path& path, std::span<const TruthPose> truth);
std::vector<TruthPose> read_truth_csv(const std::filesystem::path& path);

void write_track_csv(const std::filesystem::path& path, std::span<const TrackPoint> track);
std::vector<TrackPoint> read_track_csv(const std::filesystem::path& path);

struct DatasetFiles {
  std::filesystem::path imu;
  std::filesystem::path truth;
};

/// Writes `imu.csv` and `truth.csv` into `dir` (created if missing).
DatasetFiles export_dataset(std::span<const TruthPose> truth, std::span<const ImuSample> samples,
                            const std::filesystem::path& dir);

/// Linear interpolation of an irregular stream onto t₀ + k/rate.
std::vector<ImuSample> resample_uniform(std::span<const ImuSample> samples, double rate);

/// True when successive timestamps differ by the mean step to within 1e-9 s.
bool is_uniform(std::span<const ImuSample> samples);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view data);

std::string read_file(const std::filesystem::path& path);

}  // namespace ionet
