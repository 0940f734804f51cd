#include "sliodf/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sliodf/common.hpp"

namespace sliodf {

Eigen::VectorXd polar_line_profile(const ScatteringPattern& p, const PatternCentroid& c,
                                   int n_bins) {
  require(n_bins >= 8, "polar_line_profile: need at least 8 bins");
  Eigen::VectorXd prof = Eigen::VectorXd::Zero(n_bins);
  const double w = p.width() - 1.0, h = p.height() - 1.0;
  for (int k = 0; k < n_bins; ++k) {
    const double az = k * two_pi / n_bins;
    const double sx = std::sin(az), sy = std::cos(az);
    double sum = 0.0;
    long cnt = 0;
    for (double r = 0.5;; r += 0.5) {
      const double x = c.x + r * sx, y = c.y + r * sy;
      if (x < 0.0 || x > w || y < 0.0 || y > h) break;
      sum += sample_pattern(p, x, y);
      ++cnt;
    }
    prof[k] = cnt > 0 ? sum / static_cast<double>(cnt) : 0.0;
  }
  return prof;
}

PeakSet pick_peaks(const Eigen::VectorXd& profile, double min_prominence) {
  const int n = static_cast<int>(profile.size());
  require(n >= 8, "pick_peaks: need at least 8 bins");
  require(min_prominence >= 0.0, "pick_peaks: negative prominence threshold");

  const double lo = profile.minCoeff(), hi = profile.maxCoeff();
  const double range = hi - lo;
  PeakSet peaks;
  if (range <= 0.0) return peaks;

  const auto at = [&](int i) { return profile[((i % n) + n) % n]; };

  for (int i = 0; i < n; ++i) {
    const double v = profile[i];
    if (at(i - 1) == v) continue;  // not the start of its run
    int len = 1;
    while (len < n && at(i + len) == v) ++len;
    if (len == n) break;
    if (at(i - 1) >= v || at(i + len) >= v) continue;

    // Circular prominence: walk each way to the first strictly higher bin,
    // tracking the lowest value passed; the higher of the two lows is the
    // saddle. A global maximum walks the whole circle on both sides.
    double base_l = v, base_r = v;
    for (int s = 1; s <= n; ++s) {
      const double u = at(i - s);
      if (u > v) break;
      base_l = std::min(base_l, u);
    }
    for (int s = len; s <= n + len; ++s) {
      const double u = at(i + s);
      if (u > v) break;
      base_r = std::min(base_r, u);
    }
    const double prominence = v - std::max(base_l, base_r);
    if (prominence < min_prominence * range) continue;

    const int bin = (i + (len - 1) / 2) % n;
    peaks.push_back({bin * two_pi / n, prominence, v});
  }
  std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
    return a.prominence > b.prominence;
  });
  return peaks;
}

std::vector<double> slix_directions(const PeakSet& peaks) {
  constexpr double pair_tol = 35.0 * deg;
  std::vector<double> dirs;
  std::vector<bool> used(peaks.size(), false);
  for (std::size_t i = 0; i < peaks.size(); ++i) {
    if (used[i]) continue;
    std::size_t best = peaks.size();
    double best_dev = std::numeric_limits<double>::infinity();
    for (std::size_t j = i + 1; j < peaks.size(); ++j) {
      if (used[j]) continue;
      double d = std::fmod(peaks[j].azimuth - peaks[i].azimuth - pi, two_pi);
      if (d < -pi) d += two_pi;
      if (d > pi) d -= two_pi;
      if (std::abs(d) <= pair_tol && std::abs(d) < best_dev) {
        best_dev = std::abs(d);
        best = j;
      }
    }
    if (best == peaks.size()) continue;
    used[i] = used[best] = true;
    double d = std::fmod(peaks[best].azimuth - peaks[i].azimuth - pi, two_pi);
    if (d < -pi) d += two_pi;
    if (d > pi) d -= two_pi;
    const double band = peaks[i].azimuth + 0.5 * d;  // band azimuth, axis is +90
    double dir = std::fmod(band + half_pi, pi);
    if (dir < 0.0) dir += pi;
    dirs.push_back(dir);
  }
  return dirs;
}

std::vector<FibreOrientation> extract_fodf_peaks(const Eigen::VectorXd& atom_values,
                                                 const std::vector<FibreOrientation>& directions,
                                                 int top_k, double min_separation) {
  require(atom_values.size() == static_cast<Eigen::Index>(directions.size()),
          "extract_fodf_peaks: value/direction count mismatch");
  require(top_k >= 1, "extract_fodf_peaks: top_k must be positive");
  require(min_separation >= 0.0, "extract_fodf_peaks: negative separation");

  const Eigen::VectorXd vals = atom_values.cwiseMax(0.0);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(vals.size()));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return vals[a] > vals[b]; });

  std::vector<FibreOrientation> out;
  std::vector<Eigen::Index> winners;
  for (Eigen::Index idx : order) {
    if (vals[idx] <= 0.0) break;
    bool blocked = false;
    for (Eigen::Index w : winners) {
      if (orientation_angle(directions[static_cast<std::size_t>(idx)],
                            directions[static_cast<std::size_t>(w)]) < min_separation) {
        blocked = true;
        break;
      }
    }
    if (blocked) continue;
    winners.push_back(idx);

    // Mass-weighted mean axis over the winner's neighborhood, antipodal signs
    // aligned to the winner.
    const Eigen::Vector3d peak_axis = fibre_axis(directions[static_cast<std::size_t>(idx)]);
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (Eigen::Index j = 0; j < vals.size(); ++j) {
      if (vals[j] <= 0.0) continue;
      if (orientation_angle(directions[static_cast<std::size_t>(idx)],
                            directions[static_cast<std::size_t>(j)]) >= min_separation) {
        continue;
      }
      const Eigen::Vector3d fj = fibre_axis(directions[static_cast<std::size_t>(j)]);
      mean += vals[j] * (fj.dot(peak_axis) >= 0.0 ? fj : Eigen::Vector3d(-fj));
    }
    out.push_back(mean.norm() > 1e-12 ? orientation_from_axis(mean)
                                      : directions[static_cast<std::size_t>(idx)]);
    if (static_cast<int>(out.size()) >= top_k) break;
  }
  return out;
}

}  // namespace sliodf
