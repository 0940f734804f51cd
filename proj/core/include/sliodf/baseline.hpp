#pragma once

#include <vector>

#include <Eigen/Core>

#include "sliodf/forward_model.hpp"
#include "sliodf/projection.hpp"

namespace sliodf {

struct Peak {
  double azimuth = 0.0;     // radians, [0, 2pi)
  double prominence = 0.0;  // circular prominence
  double value = 0.0;       // profile height
};

// Sorted by descending prominence (ties by ascending bin).
using PeakSet = std::vector<Peak>;

// Mean intensity along the ray at each bin azimuth, radial step 0.5 px out to
// the last in-bounds sample of that ray. Bin k samples azimuth k * 2pi/n in
// the same convention as the gnomonic mapping (0 points along +row offset,
// 90 degrees along +column offset).
Eigen::VectorXd polar_line_profile(const ScatteringPattern& p, const PatternCentroid& c,
                                   int n_bins = 72);

// Circular local maxima with prominence at least min_prominence times the
// profile range. Plateaus count once, reported at their center bin.
PeakSet pick_peaks(const Eigen::VectorXd& profile, double min_prominence = 0.1);

// Antipodal peak pairing (180 +- 35 degrees), strongest first; each pair
// maps to the in-plane fibre axis azimuth atan2(y, x) mod pi, which is
// perpendicular to the scattering band the pair marks. Unpaired peaks are
// dropped. Results in [0, pi), strongest pair first.
std::vector<double> slix_directions(const PeakSet& peaks);

// Greedy axial non-maximum suppression over atom values with an angular
// exclusion radius, then a weighted-mean refinement over each winner's
// neighborhood. Values are clamped at zero first.
std::vector<FibreOrientation> extract_fodf_peaks(const Eigen::VectorXd& atom_values,
                                                 const std::vector<FibreOrientation>& directions,
                                                 int top_k = 3,
                                                 double min_separation = 20.0 * deg);

}  // namespace sliodf
