#include "sliodf/synthetic.hpp"

#include <cmath>

#include "sliodf/common.hpp"
#include "sliodf/rng.hpp"
#include "sliodf/sh.hpp"

namespace sliodf {

SyntheticSample generate_synthetic(const SyntheticSpec& spec,
                                   std::shared_ptr<const HealpixGrid> grid, const CapMask& mask) {
  require(spec.fibres.size() <= 3, "generate_synthetic: at most three fibres");
  require(spec.noise >= 0.0 && spec.noise < 1.0, "generate_synthetic: noise must be in [0, 1)");
  require(spec.width >= 1 && spec.height >= 1, "generate_synthetic: empty raster");

  SyntheticSample out;
  out.signal = make_signal(grid);
  for (std::int64_t p : mask.pixels) out.signal.valid[static_cast<std::size_t>(p)] = 1;

  if (!spec.fibres.empty()) {
    double wsum = 0.0;
    for (const WeightedFibre& f : spec.fibres) {
      require(f.weight > 0.0, "generate_synthetic: fibre weights must be positive");
      wsum += f.weight;
    }
    for (const WeightedFibre& f : spec.fibres) {
      const SphericalSignal k = fibre_kernel(grid, mask, f.orientation, spec.kernel);
      for (std::int64_t p : mask.pixels) out.signal.values[p] += (f.weight / wsum) * k.values[p];
    }
    if (spec.noise > 0.0) {
      double mx = 0.0;
      for (std::int64_t p : mask.pixels) mx = std::max(mx, out.signal.values[p]);
      Rng rng(spec.seed);
      for (std::int64_t p : mask.pixels) {
        out.signal.values[p] =
            std::max(0.0, out.signal.values[p] + spec.noise * mx * rng.gaussian());
      }
    }
  }

  out.pattern = render_pattern(out.signal, spec.geometry, spec.width, spec.height);
  return out;
}

ScatteringPattern render_pattern(const SphericalSignal& s, const MicroscopeGeometry& geometry,
                                 int width, int height) {
  ScatteringPattern p;
  p.values.resize(height, width);
  const double cx = (width - 1) / 2.0;
  const double cy = (height - 1) / 2.0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double theta, phi;
      inverse_gnomonic(x - cx, y - cy, geometry, theta, phi);
      p.values(y, x) = interpolate(s, theta, phi);
    }
  }
  return p;
}

Eigen::VectorXd groundtruth_sh(const SyntheticSpec& spec, int l_max) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(sh_coeff_count(l_max));
  if (spec.fibres.empty()) return c;
  double wsum = 0.0;
  for (const WeightedFibre& f : spec.fibres) wsum += f.weight;
  for (const WeightedFibre& f : spec.fibres) {
    const Eigen::Vector3d axis = fibre_axis(f.orientation);
    const double theta = std::acos(std::clamp(axis.z(), -1.0, 1.0));
    const double phi = wrap_two_pi(std::atan2(axis.y(), axis.x()));
    c += (f.weight / wsum) * sh_basis_row(theta, phi, l_max);
  }
  return c;
}

Eigen::VectorXd groundtruth_atoms(const SyntheticSpec& spec, const FodfSmoother& sm) {
  const Eigen::VectorXd c = groundtruth_sh(spec, sm.l_max);
  HealpixGrid grid(sm.nside);
  const auto n = static_cast<Eigen::Index>(sm.atom_pixel.size());
  Eigen::VectorXd vals(n);
  for (Eigen::Index a = 0; a < n; ++a) {
    double theta, phi;
    grid.pix2ang(sm.atom_pixel[static_cast<std::size_t>(a)], theta, phi);
    vals[a] = sh_basis_row(theta, phi, sm.l_max).dot(c);
  }
  return vals;
}

}  // namespace sliodf
