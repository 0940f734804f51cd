#pragma once

#include <vector>

#include <Eigen/Core>

#include "sliodf/signal.hpp"

namespace sliodf {

// Raster scatterometry pattern. values(y, x), y = row, x = column.
struct ScatteringPattern {
  Eigen::MatrixXd values;

  int width() const { return static_cast<int>(values.cols()); }
  int height() const { return static_cast<int>(values.rows()); }
};

// Bench geometry of the display/condenser stack. screen_distance_cm is the
// specimen-to-display distance H; display_width_cm is recorded for
// completeness but never enters the mapping. pixel_pitch_mm is the physical
// spacing d on the display that one raster pixel step corresponds to.
struct MicroscopeGeometry {
  double screen_distance_cm = 13.0;
  double display_width_cm = 40.0;
  double led_radius_mm = 1.8;
  double pixel_pitch_mm = 3.6;

  double pitch_over_distance() const { return pixel_pitch_mm / (screen_distance_cm * 10.0); }
};

struct PatternCentroid {
  double x = 0.0;
  double y = 0.0;
};

// Maximum of the Gaussian-smoothed pattern (sigma in pixels, reflective
// borders). Ties break to the smallest (row, col). Throws numeric_error on a
// constant pattern.
PatternCentroid find_centroid(const ScatteringPattern& p, double sigma);

// Raster offset from the centroid -> scattering direction.
// phi = atan2(dx, dy) wrapped to [0, 2pi); theta = atan((d/H) * r).
void inverse_gnomonic(double dx, double dy, const MicroscopeGeometry& g,
                      double& theta, double& phi);

struct ProjectionStats {
  std::int64_t coverage_gaps = 0;        // masked pixels with no nearby sample
  std::vector<std::int64_t> gap_pixels;
  double mean_sample_spacing = 0.0;      // radians
};

// Resample the raster onto masked HEALPix pixel centers: inverse-distance
// weighting over the k nearest pattern samples (k = 4, power 2, exact hits
// short-circuit). Masked-out pixels stay 0/invalid. Masked-in pixels farther
// than 3x the mean inter-sample spacing from every sample are set to 0 and
// counted in stats.
SphericalSignal project_to_sphere(const ScatteringPattern& p, const PatternCentroid& c,
                                  const MicroscopeGeometry& g,
                                  std::shared_ptr<const HealpixGrid> grid,
                                  const CapMask& mask, ProjectionStats* stats = nullptr);

// Largest colatitude for which the raster provides samples in every azimuth:
// the inscribed radius around the centroid, through the gnomonic mapping.
double raster_coverage_theta(int width, int height, const PatternCentroid& c,
                             const MicroscopeGeometry& g);

// Bilinear raster lookup; points outside the raster read 0.
double sample_pattern(const ScatteringPattern& p, double x, double y);

}  // namespace sliodf
