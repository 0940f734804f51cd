#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Core>

#include "sliodf/common.hpp"

namespace sliodf {

// HEALPix sphere pixelization, nested ordering throughout. n_side must be a
// power of two; the 12 base diamonds are split into n_side^2 equal-area pixels
// each, so npix = 12 * n_side^2. Ring ordering never leaks out of this class;
// it is used internally where the iso-latitude ring structure is the natural
// one (bilinear interpolation).
class HealpixGrid {
public:
  explicit HealpixGrid(int nside);

  int nside() const { return nside_; }
  int order() const { return order_; }
  std::int64_t npix() const { return npix_; }
  double pixel_area() const { return 4.0 * pi / static_cast<double>(npix_); }

  // Pixel center, theta = colatitude in [0, pi], phi = azimuth in [0, 2pi).
  void pix2ang(std::int64_t pix, double& theta, double& phi) const;
  Eigen::Vector3d pix2vec(std::int64_t pix) const;

  // Containing pixel. Exact poles tie-break deterministically to the lowest
  // pixel index touching the pole.
  std::int64_t ang2pix(double theta, double phi) const;
  std::int64_t vec2pix(const Eigen::Vector3d& v) const;

  // Distinct neighbors sharing an edge or corner, in ascending index order.
  // Generic pixels have 8; pixels hugging one of the eight three-valent base
  // vertices have 7; at n_side = 1 every base diamond has 6.
  int neighbors(std::int64_t pix, std::array<std::int64_t, 8>& out) const;

  std::int64_t parent(std::int64_t pix) const {
    require(order_ > 0, "parent: grid has no coarser level");
    return pix >> 2;
  }
  std::array<std::int64_t, 4> children(std::int64_t pix) const {
    return {4 * pix, 4 * pix + 1, 4 * pix + 2, 4 * pix + 3};
  }

  // Four pixels and convex weights for bilinear interpolation at (theta, phi),
  // using the two bracketing iso-latitude rings. Weights sum to 1.
  void interpolation_support(double theta, double phi,
                             std::array<std::int64_t, 4>& pix,
                             std::array<double, 4>& wgt) const;

  // Upper bound on the center-to-boundary distance of any pixel (radians).
  double max_pixel_radius() const;

private:
  void nest2xyf(std::int64_t pix, int& ix, int& iy, int& face) const;
  std::int64_t xyf2nest(int ix, int iy, int face) const;
  void ring2xyf(std::int64_t pix, int& ix, int& iy, int& face) const;
  std::int64_t ring2nest(std::int64_t pix) const;
  std::int64_t ring_above(double z) const;
  void ring_info(std::int64_t ring, std::int64_t& startpix,
                 std::int64_t& ringpix, double& theta, bool& shifted) const;

  int nside_;
  int order_;
  std::int64_t npix_;
  std::int64_t ncap_;
  double fact1_;
  double fact2_;
};

}  // namespace sliodf
