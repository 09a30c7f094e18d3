#include "ionet/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ionet/error.hpp"

namespace ionet {

ErrorSeries position_errors(std::span<const TrackPoint> estimate, std::span<const TruthPose> truth) {
  if (estimate.empty() || truth.empty()) {
    throw Error(ErrorKind::kAlignment, "position_errors: empty estimate or truth");
  }
  const double dt = truth.size() > 1
                        ? (truth.back().t - truth.front().t) / static_cast<double>(truth.size() - 1)
                        : 0.0;
  const double tolerance = 0.5 * dt + 1e-9;

  std::vector<double> distance(truth.size(), 0.0);
  for (std::size_t k = 1; k < truth.size(); ++k) {
    distance[k] = distance[k - 1] + (truth[k].position - truth[k - 1].position).head<2>().norm();
  }

  ErrorSeries series;
  for (const TrackPoint& p : estimate) {
    const auto it = std::lower_bound(truth.begin(), truth.end(), p.t,
                                     [](const TruthPose& pose, double t) { return pose.t < t; });
    std::size_t best = truth.size();
    double best_gap = tolerance;
    for (auto cand : {it, it == truth.begin() ? truth.end() : std::prev(it)}) {
      if (cand == truth.end()) continue;
      const double gap = std::abs(cand->t - p.t);
      if (gap <= best_gap) {
        best_gap = gap;
        best = static_cast<std::size_t>(cand - truth.begin());
      }
    }
    if (best == truth.size()) continue;
    const Eigen::Vector2d diff(p.pose.x - truth[best].position.x(), p.pose.y - truth[best].position.y());
    series.t.push_back(p.t);
    series.error.push_back(diff.norm());
    series.distance.push_back(distance[best]);
  }
  if (series.empty()) {
    throw Error(ErrorKind::kAlignment, "position_errors: no estimate timestamp matches the truth stream");
  }
  return series;
}

double percentile_error(const ErrorSeries& series, double fraction) {
  if (series.empty()) throw Error(ErrorKind::kEmptyInput, "percentile_error: empty series");
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorKind::kInvalidInput, "percentile_error: fraction must lie in (0, 1]");
  }
  std::vector<double> sorted = series.error;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(fraction * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

std::vector<double> error_at_distance(const ErrorSeries& series, std::span<const double> marks) {
  if (series.empty()) throw Error(ErrorKind::kEmptyInput, "error_at_distance: empty series");
  std::vector<double> out;
  out.reserve(marks.size() + 1);
  for (double mark : marks) {
    const auto it = std::lower_bound(series.distance.begin(), series.distance.end(), mark - 1e-9);
    if (it == series.distance.end()) {
      std::ostringstream msg;
      msg << "error_at_distance: mark " << mark << " m beyond travelled distance "
          << series.distance.back() << " m";
      throw Error(ErrorKind::kOutOfRange, msg.str());
    }
    out.push_back(series.error[static_cast<std::size_t>(it - series.distance.begin())]);
  }
  out.push_back(series.error.back());
  return out;
}

double cdf_at(const ErrorSeries& series, double e) {
  if (series.empty()) return 0.0;
  const auto count = std::count_if(series.error.begin(), series.error.end(),
                                   [e](double x) { return x <= e; });
  return static_cast<double>(count) / static_cast<double>(series.size());
}

std::vector<CdfPoint> error_cdf(const ErrorSeries& series, double resolution) {
  if (!(resolution > 0.0)) throw Error(ErrorKind::kInvalidInput, "error_cdf: resolution must be positive");
  std::vector<CdfPoint> curve;
  if (series.empty()) return curve;
  std::vector<double> sorted = series.error;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::size_t below = 0;
  for (std::size_t k = 0;; ++k) {
    const double e = static_cast<double>(k) * resolution;
    while (below < sorted.size() && sorted[below] <= e) ++below;
    curve.push_back({e, static_cast<double>(below) / n});
    if (below == sorted.size()) break;
  }
  return curve;
}

}  // namespace ionet
