#include "sliodf/forward_model.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "sliodf/common.hpp"

namespace sliodf {

Eigen::Vector3d fibre_axis(const FibreOrientation& o) {
  const double ct = std::cos(o.theta), st = std::sin(o.theta);
  const double cp = std::cos(o.phi), sp = std::sin(o.phi);
  return {ct * cp, -ct * sp, st};
}

FibreOrientation orientation_from_axis(Eigen::Vector3d axis) {
  const double n = axis.norm();
  require(n > 0.0, "orientation_from_axis: zero axis");
  axis /= n;
  if (axis.z() < 0.0 ||
      (std::abs(axis.z()) <= 1e-12 &&
       !(axis.y() > 0.0 || (axis.y() == 0.0 && axis.x() > 0.0)))) {
    axis = -axis;
  }
  FibreOrientation o;
  o.theta = std::asin(std::clamp(axis.z(), -1.0, 1.0));
  o.phi = (std::abs(axis.x()) + std::abs(axis.y()) == 0.0)
              ? 0.0
              : wrap_two_pi(std::atan2(-axis.y(), axis.x()));
  return o;
}

double orientation_angle(const FibreOrientation& a, const FibreOrientation& b) {
  const double c = std::abs(fibre_axis(a).dot(fibre_axis(b)));
  return std::acos(std::min(c, 1.0));
}

double quadric_value(const Eigen::Vector3d& v, const FibreOrientation& o,
                     const EllipsoidKernelParams& p) {
  const double ct = std::cos(o.theta), st = std::sin(o.theta);
  const double cp = std::cos(o.phi), sp = std::sin(o.phi);
  Eigen::Matrix3d rz, ry;
  rz << cp, -sp, 0.0, sp, cp, 0.0, 0.0, 0.0, 1.0;
  ry << ct, 0.0, st, 0.0, 1.0, 0.0, -st, 0.0, ct;
  const Eigen::Matrix3d r = ry * rz;
  const Eigen::Vector3d d = r * (v - p.centre);
  return p.alpha * d.x() * d.x() + d.y() * d.y() + d.z() * d.z();
}

SphericalSignal fibre_kernel(std::shared_ptr<const HealpixGrid> grid, const CapMask& mask,
                             const FibreOrientation& o, const EllipsoidKernelParams& p,
                             bool* degenerate) {
  require(p.sigma > 0.0, "fibre_kernel: sigma must be positive");
  SphericalSignal s = make_signal(grid);
  const double inv = 1.0 / (2.0 * p.sigma * p.sigma);
  double peak = 0.0;
  for (std::int64_t pix : mask.pixels) {
    const double q = quadric_value(grid->pix2vec(pix), o, p);
    const double val = std::exp(-(q - 1.0) * (q - 1.0) * inv);
    s.values[pix] = val;
    s.valid[pix] = 1;
    peak = std::max(peak, val);
  }
  const bool degen = peak < 1e-6;
  if (degenerate) *degenerate = degen;
  if (p.normalize && !degen) {
    for (std::int64_t pix : mask.pixels) s.values[pix] /= peak;
  }
  return s;
}

namespace {

// Pixels whose centers represent distinct axial directions: the open upper
// hemisphere plus one member of each equatorial antipodal pair.
std::vector<std::int64_t> axial_pixels(const HealpixGrid& grid) {
  std::vector<std::int64_t> out;
  for (std::int64_t pix = 0; pix < grid.npix(); ++pix) {
    const Eigen::Vector3d v = grid.pix2vec(pix);
    if (v.z() > 1e-12) {
      out.push_back(pix);
    } else if (std::abs(v.z()) <= 1e-12) {
      double theta, phi;
      grid.pix2ang(pix, theta, phi);
      if (phi < pi - 1e-9) out.push_back(pix);
    }
  }
  return out;
}

}  // namespace

std::vector<FibreOrientation> mixture_directions(int nside_fodf) {
  HealpixGrid grid(nside_fodf);
  std::vector<FibreOrientation> dirs;
  for (std::int64_t pix : axial_pixels(grid)) {
    dirs.push_back(orientation_from_axis(grid.pix2vec(pix)));
  }
  return dirs;
}

KernelBank build_kernel_bank(std::shared_ptr<const HealpixGrid> grid, const CapMask& mask,
                             const std::vector<FibreOrientation>& dirs,
                             const EllipsoidKernelParams& p) {
  require(!dirs.empty(), "build_kernel_bank: no directions");
  require(mask.count() > 0, "build_kernel_bank: empty mask");
  KernelBank bank;
  bank.grid = grid;
  bank.mask = mask;
  bank.directions = dirs;
  bank.params = p;
  bank.k.resize(mask.count(), static_cast<Eigen::Index>(dirs.size()));
  for (std::size_t j = 0; j < dirs.size(); ++j) {
    bool degen = false;
    SphericalSignal ker = fibre_kernel(grid, mask, dirs[j], p, &degen);
    bank.k.col(static_cast<Eigen::Index>(j)) = masked_values(ker, mask);
    if (degen) ++bank.degenerate_columns;
  }
  return bank;
}

Eigen::VectorXd reconstruct(const KernelBank& bank, const Eigen::VectorXd& w) {
  require(w.size() == bank.k.cols(), "reconstruct: weight size mismatch");
  return bank.k * w;
}

FodfSmoother make_fodf_smoother(int nside_fodf, int l_max) {
  FodfSmoother sm;
  sm.nside = nside_fodf;
  sm.l_max = l_max;
  auto grid = std::make_shared<HealpixGrid>(nside_fodf);
  sm.atom_pixel = axial_pixels(*grid);
  const auto n_atoms = static_cast<Eigen::Index>(sm.atom_pixel.size());
  require(n_atoms * 2 == grid->npix(), "make_fodf_smoother: atom selection must halve the sphere");

  sm.antipode_pixel.resize(sm.atom_pixel.size());
  Eigen::MatrixXd expand = Eigen::MatrixXd::Zero(grid->npix(), n_atoms);
  for (Eigen::Index a = 0; a < n_atoms; ++a) {
    const std::int64_t pix = sm.atom_pixel[static_cast<std::size_t>(a)];
    const std::int64_t anti = grid->vec2pix(-grid->pix2vec(pix));
    require(anti != pix, "make_fodf_smoother: self-antipodal pixel");
    sm.antipode_pixel[static_cast<std::size_t>(a)] = anti;
    expand(pix, a) = 1.0;
    expand(anti, a) = 1.0;
  }

  const Eigen::MatrixXd basis = sh_basis_matrix(*grid, nullptr, l_max);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(basis);
  const Eigen::MatrixXd basis_pinv = cod.pseudoInverse();
  sm.atoms_to_sh = basis_pinv * expand;
  sm.smooth = 0.5 * expand.transpose() * (basis * sm.atoms_to_sh);
  return sm;
}

Fodf make_fodf(const FodfSmoother& sm, const Eigen::VectorXd& weights) {
  require(weights.size() == sm.smooth.rows(), "make_fodf: weight size mismatch");
  return {weights, sm.atoms_to_sh * weights};
}

Eigen::VectorXd fodf_values(const FodfSmoother& sm, const Fodf& f) {
  require(f.weights.size() == sm.smooth.rows(), "fodf_values: weight size mismatch");
  return sm.smooth * f.weights;
}

Eigen::VectorXd fold_axial(const FodfSmoother& sm, const Eigen::VectorXd& full_sphere) {
  const auto n = static_cast<Eigen::Index>(sm.atom_pixel.size());
  require(full_sphere.size() == 2 * n, "fold_axial: expected full fodf-sphere vector");
  Eigen::VectorXd w(n);
  for (Eigen::Index a = 0; a < n; ++a) {
    w[a] = 0.5 * (full_sphere[sm.atom_pixel[static_cast<std::size_t>(a)]] +
                  full_sphere[sm.antipode_pixel[static_cast<std::size_t>(a)]]);
  }
  return w;
}

std::vector<FibreOrientation> fodf_peaks(const FodfSmoother& sm, const Fodf& f, int top_k,
                                         double min_separation) {
  require(top_k >= 1, "fodf_peaks: top_k must be positive");
  require(min_separation >= 0.0, "fodf_peaks: negative separation");
  const Eigen::VectorXd vals = fodf_values(sm, f);

  HealpixGrid grid(sm.nside);
  std::vector<FibreOrientation> seeds;
  seeds.reserve(sm.atom_pixel.size());
  for (std::int64_t pix : sm.atom_pixel) seeds.push_back(orientation_from_axis(grid.pix2vec(pix)));

  const auto surface = [&](const Eigen::Vector3d& v) {
    const double th = std::acos(std::clamp(v.z(), -1.0, 1.0));
    const double ph = wrap_two_pi(std::atan2(v.y(), v.x()));
    return sh_basis_row(th, ph, sm.l_max).dot(f.sh);
  };

  // Climb to the nearest local mode by sampling a geodesic ring around the
  // current point and halving the ring radius once no direction improves.
  const auto ascend = [&](Eigen::Vector3d v) {
    double radius = 1.5 * grid.max_pixel_radius();
    double best = surface(v);
    for (int it = 0; it < 200 && radius > 1e-5; ++it) {
      Eigen::Vector3d t1 = v.cross(Eigen::Vector3d::UnitZ());
      if (t1.squaredNorm() < 1e-12) t1 = v.cross(Eigen::Vector3d::UnitX());
      t1.normalize();
      const Eigen::Vector3d t2 = v.cross(t1);
      bool moved = false;
      for (int k = 0; k < 8; ++k) {
        const double a = two_pi * k / 8.0;
        const Eigen::Vector3d u =
            (std::cos(radius) * v + std::sin(radius) * (std::cos(a) * t1 + std::sin(a) * t2))
                .normalized();
        const double fu = surface(u);
        if (fu > best) {
          best = fu;
          v = u;
          moved = true;
        }
      }
      if (!moved) radius *= 0.5;
    }
    return v;
  };

  std::vector<Eigen::Index> order(static_cast<std::size_t>(vals.size()));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return vals[a] > vals[b]; });

  std::vector<FibreOrientation> out;
  std::vector<double> strength;
  for (Eigen::Index idx : order) {
    if (vals[idx] <= 0.0) break;
    const FibreOrientation& seed = seeds[static_cast<std::size_t>(idx)];
    bool taken = false;
    for (const FibreOrientation& o : out) {
      if (orientation_angle(seed, o) < min_separation) {
        taken = true;
        break;
      }
    }
    if (taken) continue;
    const Eigen::Vector3d mode = ascend(fibre_axis(seed));
    const FibreOrientation refined = orientation_from_axis(mode);
    // distinct seeds may climb into the same mode; keep the first
    for (const FibreOrientation& o : out) {
      if (orientation_angle(refined, o) < min_separation) {
        taken = true;
        break;
      }
    }
    if (taken) continue;
    out.push_back(refined);
    strength.push_back(surface(mode));
    if (static_cast<int>(out.size()) >= top_k) break;
  }

  std::vector<std::size_t> rank(out.size());
  for (std::size_t i = 0; i < rank.size(); ++i) rank[i] = i;
  std::stable_sort(rank.begin(), rank.end(),
                   [&](std::size_t a, std::size_t b) { return strength[a] > strength[b]; });
  std::vector<FibreOrientation> sorted;
  sorted.reserve(out.size());
  for (std::size_t i : rank) sorted.push_back(out[i]);
  return sorted;
}

}  // namespace sliodf
