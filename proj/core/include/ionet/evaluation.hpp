#pragma once

#include <span>
#include <vector>

#include "ionet/types.hpp"

namespace ionet {

/// Horizontal position error of an estimate at each matched timestamp,
/// with the ground-truth distance travelled up to that time.
struct ErrorSeries {
  std::vector<double> t;
  std::vector<double> error;     // m
  std::vector<double> distance;  // cumulative horizontal truth path length, m

  std::size_t size() const { return error.size(); }
  bool empty() const { return error.empty(); }
};

/// Matches each estimate to the nearest truth pose (within half a truth
/// sample interval) and measures planar error. Estimates and truth share
/// the start pose; no further alignment is applied. Throws kAlignment when
/// nothing matches.
ErrorSeries position_errors(std::span<const TrackPoint> estimate, std::span<const TruthPose> truth);

/// Smallest e such that at least `fraction` of the errors are <= e.
double percentile_error(const ErrorSeries& series, double fraction = 0.9);

/// Error at the first timestamp where the truth distance reaches each mark,
/// followed by the endpoint error. Throws kOutOfRange for marks beyond the
/// travelled distance.
std::vector<double> error_at_distance(const ErrorSeries& series, std::span<const double> marks);

struct CdfPoint {
  double error = 0.0;
  double fraction = 0.0;
};

/// Empirical CDF of the errors sampled every `resolution` metres from 0 up
/// to the first grid point at or above the maximum error.
std::vector<CdfPoint> error_cdf(const ErrorSeries& series, double resolution);

/// Fraction of errors <= e.
double cdf_at(const ErrorSeries& series, double e);

}  // namespace ionet
