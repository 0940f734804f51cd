#include "sliodf/healpix.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <bit>
#include <cmath>

namespace sliodf {

namespace {

constexpr int jrll[12] = {2, 2, 2, 2, 3, 3, 3, 3, 4, 4, 4, 4};
constexpr int jpll[12] = {1, 3, 5, 7, 0, 2, 4, 6, 1, 3, 5, 7};

// Interleave the low 32 bits of v with zeros (morton encoding of one axis).
constexpr std::uint64_t spread_bits(std::uint64_t v) {
  v &= 0xffffffffULL;
  v = (v | (v << 16)) & 0x0000ffff0000ffffULL;
  v = (v | (v << 8)) & 0x00ff00ff00ff00ffULL;
  v = (v | (v << 4)) & 0x0f0f0f0f0f0f0f0fULL;
  v = (v | (v << 2)) & 0x3333333333333333ULL;
  v = (v | (v << 1)) & 0x5555555555555555ULL;
  return v;
}

constexpr std::uint64_t compress_bits(std::uint64_t v) {
  v &= 0x5555555555555555ULL;
  v = (v | (v >> 1)) & 0x3333333333333333ULL;
  v = (v | (v >> 2)) & 0x0f0f0f0f0f0f0f0fULL;
  v = (v | (v >> 4)) & 0x00ff00ff00ff00ffULL;
  v = (v | (v >> 8)) & 0x0000ffff0000ffffULL;
  v = (v | (v >> 16)) & 0x00000000ffffffffULL;
  return v;
}

std::int64_t isqrt(std::int64_t v) {
  return static_cast<std::int64_t>(std::sqrt(static_cast<double>(v) + 0.5));
}

constexpr double two_third = 2.0 / 3.0;

}  // namespace

HealpixGrid::HealpixGrid(int nside) : nside_(nside) {
  require(nside >= 1 && nside <= (1 << 28) && std::has_single_bit(static_cast<unsigned>(nside)),
          "HealpixGrid: n_side must be a power of two");
  order_ = std::countr_zero(static_cast<unsigned>(nside));
  npix_ = 12LL * nside_ * nside_;
  ncap_ = 2LL * nside_ * (nside_ - 1);
  fact2_ = 4.0 / static_cast<double>(npix_);
  fact1_ = (nside_ << 1) * fact2_;
}

void HealpixGrid::nest2xyf(std::int64_t pix, int& ix, int& iy, int& face) const {
  face = static_cast<int>(pix >> (2 * order_));
  std::uint64_t p = static_cast<std::uint64_t>(pix) & (static_cast<std::uint64_t>(nside_) * nside_ - 1);
  ix = static_cast<int>(compress_bits(p));
  iy = static_cast<int>(compress_bits(p >> 1));
}

std::int64_t HealpixGrid::xyf2nest(int ix, int iy, int face) const {
  return (static_cast<std::int64_t>(face) << (2 * order_)) +
         static_cast<std::int64_t>(spread_bits(static_cast<std::uint64_t>(ix)) |
                                   (spread_bits(static_cast<std::uint64_t>(iy)) << 1));
}

void HealpixGrid::pix2ang(std::int64_t pix, double& theta, double& phi) const {
  require(pix >= 0 && pix < npix_, "pix2ang: pixel index out of range");
  const std::int64_t nl4 = 4LL * nside_;

  int ix, iy, face;
  nest2xyf(pix, ix, iy, face);

  const std::int64_t jr = (static_cast<std::int64_t>(jrll[face]) << order_) - ix - iy - 1;

  std::int64_t nr;
  int kshift;
  double z;
  if (jr < nside_) {  // north polar cap
    nr = jr;
    z = 1.0 - nr * nr * fact2_;
    kshift = 0;
  } else if (jr > 3 * nside_) {  // south polar cap
    nr = nl4 - jr;
    z = nr * nr * fact2_ - 1.0;
    kshift = 0;
  } else {  // equatorial belt
    nr = nside_;
    z = (2 * nside_ - jr) * fact1_;
    kshift = static_cast<int>((jr - nside_) & 1);
  }

  std::int64_t jp = (jpll[face] * nr + ix - iy + 1 + kshift) / 2;
  if (jp > nl4) jp -= nl4;
  if (jp < 1) jp += nl4;

  theta = std::acos(z);
  phi = (jp - (kshift + 1) * 0.5) * (half_pi / nr);
}

Eigen::Vector3d HealpixGrid::pix2vec(std::int64_t pix) const {
  double theta, phi;
  pix2ang(pix, theta, phi);
  const double st = std::sin(theta);
  return {st * std::cos(phi), st * std::sin(phi), std::cos(theta)};
}

std::int64_t HealpixGrid::ang2pix(double theta, double phi) const {
  require(theta >= 0.0 && theta <= pi, "ang2pix: theta outside [0, pi]");
  const double z = std::cos(theta);
  const double za = std::fabs(z);
  double tt = wrap_two_pi(phi) * (2.0 / pi);  // in [0, 4)

  int ix, iy, face;
  if (za <= two_third) {  // equatorial belt
    const double temp1 = nside_ * (0.5 + tt);
    const double temp2 = nside_ * (z * 0.75);
    const std::int64_t jp = static_cast<std::int64_t>(temp1 - temp2);
    const std::int64_t jm = static_cast<std::int64_t>(temp1 + temp2);
    const std::int64_t ifp = jp >> order_;
    const std::int64_t ifm = jm >> order_;
    if (ifp == ifm)
      face = static_cast<int>((ifp == 4) ? 4 : ifp + 4);
    else if (ifp < ifm)
      face = static_cast<int>(ifp);
    else
      face = static_cast<int>(ifm + 8);
    ix = static_cast<int>(jm & (nside_ - 1));
    iy = static_cast<int>(nside_ - (jp & (nside_ - 1)) - 1);
  } else {  // polar caps
    int ntt = static_cast<int>(tt);
    if (ntt >= 4) ntt = 3;
    double tp = tt - ntt;
    double tmp = nside_ * std::sqrt(3.0 * (1.0 - za));
    if (za >= 1.0) {  // exact pole: lowest-index base diamond wins
      ntt = 0;
      tp = 0.0;
      tmp = 0.0;
    }
    std::int64_t jp = static_cast<std::int64_t>(tp * tmp);
    std::int64_t jm = static_cast<std::int64_t>((1.0 - tp) * tmp);
    jp = std::min<std::int64_t>(jp, nside_ - 1);
    jm = std::min<std::int64_t>(jm, nside_ - 1);
    if (z >= 0.0) {
      face = ntt;
      ix = static_cast<int>(nside_ - jm - 1);
      iy = static_cast<int>(nside_ - jp - 1);
    } else {
      face = ntt + 8;
      ix = static_cast<int>(jp);
      iy = static_cast<int>(jm);
    }
  }
  return xyf2nest(ix, iy, face);
}

std::int64_t HealpixGrid::vec2pix(const Eigen::Vector3d& v) const {
  const double n = v.norm();
  require(n > 0.0, "vec2pix: zero vector");
  const double z = std::clamp(v.z() / n, -1.0, 1.0);
  return ang2pix(std::acos(z), std::atan2(v.y(), v.x()));
}

int HealpixGrid::neighbors(std::int64_t pix, std::array<std::int64_t, 8>& out) const {
  static const int xoffset[] = {-1, -1, 0, 1, 1, 1, 0, -1};
  static const int yoffset[] = {0, 1, 1, 1, 0, -1, -1, -1};
  static const int facearray[9][12] = {
      {8, 9, 10, 11, -1, -1, -1, -1, 10, 11, 8, 9},    // S
      {5, 6, 7, 4, 8, 9, 10, 11, 9, 10, 11, 8},        // SE
      {-1, -1, -1, -1, 5, 6, 7, 4, -1, -1, -1, -1},    // E
      {4, 5, 6, 7, 11, 8, 9, 10, 11, 8, 9, 10},        // SW
      {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11},          // center
      {1, 2, 3, 0, 0, 1, 2, 3, 5, 6, 7, 4},            // NE
      {-1, -1, -1, -1, 7, 4, 5, 6, -1, -1, -1, -1},    // W
      {3, 0, 1, 2, 3, 0, 1, 2, 4, 5, 6, 7},            // NW
      {2, 3, 0, 1, -1, -1, -1, -1, 0, 1, 2, 3}};       // N
  static const int swaparray[9][12] = {
      {0, 0, 0, 0, 0, 0, 0, 0, 3, 3, 3, 3},  // S
      {0, 0, 0, 0, 0, 0, 0, 0, 6, 6, 6, 6},  // SE
      {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},  // E
      {0, 0, 0, 0, 0, 0, 0, 0, 5, 5, 5, 5},  // SW
      {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},  // center
      {5, 5, 5, 5, 0, 0, 0, 0, 0, 0, 0, 0},  // NE
      {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},  // W
      {6, 6, 6, 6, 0, 0, 0, 0, 0, 0, 0, 0},  // NW
      {3, 3, 3, 3, 0, 0, 0, 0, 0, 0, 0, 0}};  // N

  require(pix >= 0 && pix < npix_, "neighbors: pixel index out of range");

  int ix, iy, face;
  nest2xyf(pix, ix, iy, face);

  int n = 0;
  const int nsm1 = nside_ - 1;
  if (ix > 0 && ix < nsm1 && iy > 0 && iy < nsm1) {
    for (int m = 0; m < 8; ++m)
      out[n++] = xyf2nest(ix + xoffset[m], iy + yoffset[m], face);
  } else {
    for (int m = 0; m < 8; ++m) {
      int x = ix + xoffset[m];
      int y = iy + yoffset[m];
      int nbnum = 4;
      if (x < 0) {
        x += nside_;
        nbnum -= 1;
      } else if (x >= nside_) {
        x -= nside_;
        nbnum += 1;
      }
      if (y < 0) {
        y += nside_;
        nbnum -= 3;
      } else if (y >= nside_) {
        y -= nside_;
        nbnum += 3;
      }
      const int f = facearray[nbnum][face];
      if (f < 0) continue;
      const int bits = swaparray[nbnum][face];
      if (bits & 1) x = nside_ - x - 1;
      if (bits & 2) y = nside_ - y - 1;
      if (bits & 4) std::swap(x, y);
      out[n++] = xyf2nest(x, y, f);
    }
  }

  std::sort(out.begin(), out.begin() + n);
  n = static_cast<int>(std::unique(out.begin(), out.begin() + n) - out.begin());
  return n;
}

void HealpixGrid::ring2xyf(std::int64_t pix, int& ix, int& iy, int& face) const {
  std::int64_t iring, iphi, kshift, nr;
  const std::int64_t nl2 = 2LL * nside_;

  if (pix < ncap_) {  // north polar cap
    iring = (1 + isqrt(1 + 2 * pix)) >> 1;
    iphi = (pix + 1) - 2 * iring * (iring - 1);
    kshift = 0;
    nr = iring;
    face = 0;
    std::int64_t tmp = iphi - 1;
    if (tmp >= 2 * iring) {
      face = 2;
      tmp -= 2 * iring;
    }
    if (tmp >= iring) ++face;
  } else if (pix < npix_ - ncap_) {  // equatorial belt
    const std::int64_t ip = pix - ncap_;
    iring = (ip >> (order_ + 2)) + nside_;
    iphi = (ip & (4LL * nside_ - 1)) + 1;
    kshift = (iring + nside_) & 1;
    nr = nside_;
    const std::int64_t ire = iring - nside_ + 1;
    const std::int64_t irm = nl2 + 2 - ire;
    const std::int64_t ifm = (iphi - ire / 2 + nside_ - 1) >> order_;
    const std::int64_t ifp = (iphi - irm / 2 + nside_ - 1) >> order_;
    if (ifp == ifm)
      face = static_cast<int>((ifp == 4) ? 4 : ifp + 4);
    else if (ifp < ifm)
      face = static_cast<int>(ifp);
    else
      face = static_cast<int>(ifm + 8);
  } else {  // south polar cap
    const std::int64_t ip = npix_ - pix;
    iring = (1 + isqrt(2 * ip - 1)) >> 1;
    iphi = 4 * iring + 1 - (ip - 2 * iring * (iring - 1));
    kshift = 0;
    nr = iring;
    iring = 2 * nl2 - iring;
    face = 8;
    std::int64_t tmp = iphi - 1;
    if (tmp >= 2 * nr) {
      face = 10;
      tmp -= 2 * nr;
    }
    if (tmp >= nr) ++face;
  }

  const std::int64_t irt = iring - jrll[face] * nside_ + 1;
  std::int64_t ipt = 2 * iphi - jpll[face] * nr - kshift - 1;
  if (ipt >= nl2) ipt -= 8LL * nside_;

  ix = static_cast<int>((ipt - irt) >> 1);
  iy = static_cast<int>((-(ipt + irt)) >> 1);
}

std::int64_t HealpixGrid::ring2nest(std::int64_t pix) const {
  int ix, iy, face;
  ring2xyf(pix, ix, iy, face);
  return xyf2nest(ix, iy, face);
}

std::int64_t HealpixGrid::ring_above(double z) const {
  const double az = std::fabs(z);
  if (az > two_third) {
    const std::int64_t iring = static_cast<std::int64_t>(nside_ * std::sqrt(3.0 * (1.0 - az)));
    return (z > 0) ? iring : 4LL * nside_ - iring - 1;
  }
  return static_cast<std::int64_t>(nside_ * (2.0 - 1.5 * z));
}

void HealpixGrid::ring_info(std::int64_t ring, std::int64_t& startpix,
                            std::int64_t& ringpix, double& theta, bool& shifted) const {
  const std::int64_t northring = (ring > 2 * nside_) ? 4 * nside_ - ring : ring;
  if (northring < nside_) {
    const double tmp = northring * northring * fact2_;
    const double costheta = 1.0 - tmp;
    const double sintheta = std::sqrt(tmp * (2.0 - tmp));
    theta = std::atan2(sintheta, costheta);
    ringpix = 4 * northring;
    shifted = true;
    startpix = 2 * northring * (northring - 1);
  } else {
    theta = std::acos((2 * nside_ - northring) * fact1_);
    ringpix = 4LL * nside_;
    shifted = ((northring - nside_) & 1) == 0;
    startpix = ncap_ + (northring - nside_) * ringpix;
  }
  if (northring != ring) {
    theta = pi - theta;
    startpix = npix_ - startpix - ringpix;
  }
}

void HealpixGrid::interpolation_support(double theta, double phi,
                                        std::array<std::int64_t, 4>& pix,
                                        std::array<double, 4>& wgt) const {
  require(theta >= 0.0 && theta <= pi, "interpolation_support: theta outside [0, pi]");
  phi = wrap_two_pi(phi);
  const double z = std::cos(theta);
  const std::int64_t ir1 = ring_above(z);
  const std::int64_t ir2 = ir1 + 1;
  double theta1 = 0.0, theta2 = 0.0;

  if (ir1 > 0) {
    std::int64_t sp, nr;
    bool shift;
    ring_info(ir1, sp, nr, theta1, shift);
    const double dphi = two_pi / nr;
    const double tmp = phi / dphi - 0.5 * (shift ? 1.0 : 0.0);
    std::int64_t i1 = (tmp < 0) ? static_cast<std::int64_t>(tmp) - 1 : static_cast<std::int64_t>(tmp);
    const double w1 = (phi - (i1 + 0.5 * (shift ? 1.0 : 0.0)) * dphi) / dphi;
    std::int64_t i2 = i1 + 1;
    if (i1 < 0) i1 += nr;
    if (i2 >= nr) i2 -= nr;
    pix[0] = sp + i1;
    pix[1] = sp + i2;
    wgt[0] = 1.0 - w1;
    wgt[1] = w1;
  }
  if (ir2 < 4LL * nside_) {
    std::int64_t sp, nr;
    bool shift;
    ring_info(ir2, sp, nr, theta2, shift);
    const double dphi = two_pi / nr;
    const double tmp = phi / dphi - 0.5 * (shift ? 1.0 : 0.0);
    std::int64_t i1 = (tmp < 0) ? static_cast<std::int64_t>(tmp) - 1 : static_cast<std::int64_t>(tmp);
    const double w1 = (phi - (i1 + 0.5 * (shift ? 1.0 : 0.0)) * dphi) / dphi;
    std::int64_t i2 = i1 + 1;
    if (i1 < 0) i1 += nr;
    if (i2 >= nr) i2 -= nr;
    pix[2] = sp + i1;
    pix[3] = sp + i2;
    wgt[2] = 1.0 - w1;
    wgt[3] = w1;
  }

  if (ir1 == 0) {  // interpolate across the north pole
    const double wtheta = theta / theta2;
    wgt[2] *= wtheta;
    wgt[3] *= wtheta;
    const double fac = (1.0 - wtheta) * 0.25;
    wgt[0] = fac;
    wgt[1] = fac;
    wgt[2] += fac;
    wgt[3] += fac;
    pix[0] = (pix[2] + 2) % 4;
    pix[1] = (pix[3] + 2) % 4;
  } else if (ir2 == 4LL * nside_) {  // across the south pole
    const double wtheta = (theta - theta1) / (pi - theta1);
    wgt[0] *= 1.0 - wtheta;
    wgt[1] *= 1.0 - wtheta;
    const double fac = wtheta * 0.25;
    wgt[0] += fac;
    wgt[1] += fac;
    wgt[2] = fac;
    wgt[3] = fac;
    pix[2] = ((pix[0] + 2) & 3) + npix_ - 4;
    pix[3] = ((pix[1] + 2) & 3) + npix_ - 4;
  } else {
    const double wtheta = (theta - theta1) / (theta2 - theta1);
    wgt[0] *= 1.0 - wtheta;
    wgt[1] *= 1.0 - wtheta;
    wgt[2] *= wtheta;
    wgt[3] *= wtheta;
  }

  for (auto& p : pix) p = ring2nest(p);
}

double HealpixGrid::max_pixel_radius() const {
  const double z_a = 2.0 / 3.0;
  const double phi_a = pi / (4.0 * nside_);
  Eigen::Vector3d va(std::sqrt(1.0 - z_a * z_a) * std::cos(phi_a),
                     std::sqrt(1.0 - z_a * z_a) * std::sin(phi_a), z_a);
  double t1 = 1.0 - 1.0 / nside_;
  t1 *= t1;
  const double z_b = 1.0 - t1 / 3.0;
  Eigen::Vector3d vb(std::sqrt(1.0 - z_b * z_b), 0.0, z_b);
  return std::atan2(va.cross(vb).norm(), va.dot(vb));
}

}  // namespace sliodf
