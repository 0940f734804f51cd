#pragma once

#include <vector>

#include "sliodf/forward_model.hpp"
#include "sliodf/projection.hpp"

namespace sliodf {

struct WeightedFibre {
  FibreOrientation orientation;
  double weight = 1.0;
};

struct SyntheticSpec {
  std::vector<WeightedFibre> fibres;  // up to 3; empty gives a zero pattern
  double noise = 0.0;                 // relative Gaussian sigma in [0, 1)
  EllipsoidKernelParams kernel;
  MicroscopeGeometry geometry;
  std::uint64_t seed = 0;
  int width = 81;
  int height = 81;
};

struct SyntheticSample {
  ScatteringPattern pattern;
  SphericalSignal signal;
};

// Weighted kernel mixture (weights normalized to sum 1) plus relative
// Gaussian noise sigma * max(signal) per pixel, clamped at 0; the raster is
// the forward gnomonic rendering of that signal around the geometric raster
// center, bilinear on the sphere.
SyntheticSample generate_synthetic(const SyntheticSpec& spec,
                                   std::shared_ptr<const HealpixGrid> grid, const CapMask& mask);

// Rendering alone, for round-trip checks.
ScatteringPattern render_pattern(const SphericalSignal& s, const MicroscopeGeometry& geometry,
                                 int width, int height);

// Even-SH coefficients of the groundtruth mixture of (antipodally
// symmetrized) fibre axes: sum of weight * basis at each axis.
Eigen::VectorXd groundtruth_sh(const SyntheticSpec& spec, int l_max);

// The groundtruth band-limited fODF sampled at the smoother's atoms.
Eigen::VectorXd groundtruth_atoms(const SyntheticSpec& spec, const FodfSmoother& sm);

}  // namespace sliodf
