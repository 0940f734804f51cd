#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "sliodf/healpix.hpp"

namespace sliodf {

// Scalar field sampled at pixel centers. valid[i] == 0 marks pixels outside
// the region of interest; their values are kept at 0.
struct SphericalSignal {
  std::shared_ptr<const HealpixGrid> grid;
  Eigen::VectorXd values;
  std::vector<std::uint8_t> valid;
};

SphericalSignal make_signal(std::shared_ptr<const HealpixGrid> grid);

// Pixels whose center colatitude is <= theta_max (tiny slack absorbs rounding
// of boundary rings). pixels is ascending; position[i] is the index of pixel i
// inside pixels, or -1.
struct CapMask {
  double theta_max = 0.0;
  std::vector<std::int64_t> pixels;
  std::vector<std::int64_t> position;

  std::int64_t count() const { return static_cast<std::int64_t>(pixels.size()); }
  bool contains(std::int64_t pix) const { return position[static_cast<std::size_t>(pix)] >= 0; }
};

CapMask cap_mask(const HealpixGrid& grid, double theta_max);

// Gather masked pixel values in ascending pixel order / scatter them back.
Eigen::VectorXd masked_values(const SphericalSignal& s, const CapMask& mask);
SphericalSignal from_masked_values(std::shared_ptr<const HealpixGrid> grid,
                                   const CapMask& mask, const Eigen::VectorXd& v);

// Bilinear interpolation over the two bracketing iso-latitude rings. Weights
// of invalid support pixels are dropped and the remainder renormalized; if the
// whole support is invalid the result is 0.
double interpolate(const SphericalSignal& s, double theta, double phi);

// Divide by the masked maximum. Throws numeric_error if the maximum is <= 0.
void normalize_max(SphericalSignal& s);
void normalize_max(Eigen::VectorXd& v);

// Azimuthal rotation by an exact multiple of 90 degrees maps pixel centers to
// pixel centers; the result is a pure index permutation. quarter_turns is
// counted in the +phi direction.
SphericalSignal rotate_quarter_turns(const SphericalSignal& s, int quarter_turns);

}  // namespace sliodf
