#pragma once

#include <vector>

#include <Eigen/Core>

#include "sliodf/sh.hpp"
#include "sliodf/signal.hpp"

namespace sliodf {

// Fibre orientation as the rotation angles of the model ellipsoid:
// R = R_y(theta) * R_z(phi), fibre axis = R^T e_x. theta is the elevation of
// the axis out of the specimen plane, in [0, pi/2]; phi in [0, 2pi).
// Orientations are axial (f and -f identical); the canonical representative
// has axis z >= 0, and in-plane axes keep azimuth atan2(y, x) in [0, pi).
struct FibreOrientation {
  double phi = 0.0;
  double theta = 0.0;
};

Eigen::Vector3d fibre_axis(const FibreOrientation& o);
FibreOrientation orientation_from_axis(Eigen::Vector3d axis);

// Angle between orientation axes, antipodal pairs identified; in [0, pi/2].
double orientation_angle(const FibreOrientation& a, const FibreOrientation& b);

struct EllipsoidKernelParams {
  double alpha = 20.0;
  double sigma = 0.5;
  Eigen::Vector3d centre = Eigen::Vector3d::Zero();
  bool normalize = true;
};

// (v - c)^T R^T diag(alpha, 1, 1) R (v - c), built from the explicit rotation.
double quadric_value(const Eigen::Vector3d& v, const FibreOrientation& o,
                     const EllipsoidKernelParams& p);

// Soft shell band exp(-(Q - 1)^2 / (2 sigma^2)) on masked pixels, rescaled to
// max 1 when normalize is set. degenerate reports all pre-scale values below
// 1e-6 (band entirely outside the cap).
SphericalSignal fibre_kernel(std::shared_ptr<const HealpixGrid> grid, const CapMask& mask,
                             const FibreOrientation& o, const EllipsoidKernelParams& p,
                             bool* degenerate = nullptr);

// Mixture atoms: upper-hemisphere pixel centers of the given grid, equatorial
// antipodal duplicates deduplicated by keeping azimuth in [0, pi). Ascending
// pixel index order.
std::vector<FibreOrientation> mixture_directions(int nside_fodf);

// Kernel matrix over masked pixels, one column per atom, mask order rows.
struct KernelBank {
  std::shared_ptr<const HealpixGrid> grid;
  CapMask mask;
  std::vector<FibreOrientation> directions;
  EllipsoidKernelParams params;
  Eigen::MatrixXd k;  // mask.count() x directions.size()
  int degenerate_columns = 0;
};

KernelBank build_kernel_bank(std::shared_ptr<const HealpixGrid> grid, const CapMask& mask,
                             const std::vector<FibreOrientation>& dirs,
                             const EllipsoidKernelParams& p);

// S_r = K w over the masked pixels.
Eigen::VectorXd reconstruct(const KernelBank& bank, const Eigen::VectorXd& w);

// Band-limiting operator for distributions over the atoms. The atoms are the
// upper half of an antipodally symmetric grid, so a weight vector extends
// evenly to the full sphere; fitting even spherical harmonics there and
// sampling back is the linear map `smooth` (symmetric, idempotent).
// `atoms_to_sh` yields the coefficients of that even expansion.
struct FodfSmoother {
  int nside = 0;
  int l_max = 0;
  Eigen::MatrixXd smooth;       // n_atoms x n_atoms
  Eigen::MatrixXd atoms_to_sh;  // n_coeffs x n_atoms
  std::vector<std::int64_t> atom_pixel;      // atom -> pixel (upper)
  std::vector<std::int64_t> antipode_pixel;  // atom -> antipodal pixel
};

FodfSmoother make_fodf_smoother(int nside_fodf, int l_max);

// Recovered orientation distribution: mixture weights over the atoms plus the
// even spherical-harmonic coefficients of their symmetric extension.
struct Fodf {
  Eigen::VectorXd weights;
  Eigen::VectorXd sh;
};

Fodf make_fodf(const FodfSmoother& sm, const Eigen::VectorXd& weights);

// Band-limited fODF sampled at the atoms (may be slightly negative).
Eigen::VectorXd fodf_values(const FodfSmoother& sm, const Fodf& f);

// Axially fold a full-sphere sample vector onto the atoms: the mean of the
// values at each atom pixel and its antipode.
Eigen::VectorXd fold_axial(const FodfSmoother& sm, const Eigen::VectorXd& full_sphere);

// Dominant orientations of the fODF: local modes of its continuous
// band-limited surface, refined off the atom lattice, at least min_separation
// apart, strongest first. Seeds with non-positive atom values are skipped, so
// the result may hold fewer than top_k entries.
std::vector<FibreOrientation> fodf_peaks(const FodfSmoother& sm, const Fodf& f, int top_k = 1,
                                         double min_separation = 20.0 * deg);

}  // namespace sliodf
