#include "sliodf/signal.hpp"

#include <cmath>

namespace sliodf {

SphericalSignal make_signal(std::shared_ptr<const HealpixGrid> grid) {
  require(grid != nullptr, "make_signal: null grid");
  SphericalSignal s;
  s.values = Eigen::VectorXd::Zero(grid->npix());
  // no samples defined yet; producers mark the pixels they fill
  s.valid.assign(static_cast<std::size_t>(grid->npix()), 0);
  s.grid = std::move(grid);
  return s;
}

CapMask cap_mask(const HealpixGrid& grid, double theta_max) {
  require(theta_max >= 0.0 && theta_max <= pi + 1e-12, "cap_mask: theta_max outside [0, pi]");
  CapMask m;
  m.theta_max = theta_max;
  m.position.assign(static_cast<std::size_t>(grid.npix()), -1);
  for (std::int64_t p = 0; p < grid.npix(); ++p) {
    double theta, phi;
    grid.pix2ang(p, theta, phi);
    if (theta <= theta_max + 1e-12) {
      m.position[static_cast<std::size_t>(p)] = static_cast<std::int64_t>(m.pixels.size());
      m.pixels.push_back(p);
    }
  }
  return m;
}

Eigen::VectorXd masked_values(const SphericalSignal& s, const CapMask& mask) {
  require(s.grid && static_cast<std::int64_t>(mask.position.size()) == s.grid->npix(),
          "masked_values: mask does not match grid");
  Eigen::VectorXd out(mask.count());
  for (std::int64_t i = 0; i < mask.count(); ++i)
    out[i] = s.values[mask.pixels[static_cast<std::size_t>(i)]];
  return out;
}

SphericalSignal from_masked_values(std::shared_ptr<const HealpixGrid> grid,
                                   const CapMask& mask, const Eigen::VectorXd& v) {
  require(grid && static_cast<std::int64_t>(mask.position.size()) == grid->npix(),
          "from_masked_values: mask does not match grid");
  require(v.size() == mask.count(), "from_masked_values: value count != mask size");
  SphericalSignal s;
  s.values = Eigen::VectorXd::Zero(grid->npix());
  s.valid.assign(static_cast<std::size_t>(grid->npix()), 0);
  for (std::int64_t i = 0; i < mask.count(); ++i) {
    const std::int64_t p = mask.pixels[static_cast<std::size_t>(i)];
    s.values[p] = v[i];
    s.valid[static_cast<std::size_t>(p)] = 1;
  }
  s.grid = std::move(grid);
  return s;
}

double interpolate(const SphericalSignal& s, double theta, double phi) {
  require(s.grid != nullptr, "interpolate: signal has no grid");
  std::array<std::int64_t, 4> pix;
  std::array<double, 4> wgt;
  s.grid->interpolation_support(theta, phi, pix, wgt);
  double acc = 0.0, wsum = 0.0;
  for (int i = 0; i < 4; ++i) {
    if (!s.valid[static_cast<std::size_t>(pix[i])]) continue;
    acc += wgt[i] * s.values[pix[i]];
    wsum += wgt[i];
  }
  return wsum > 0.0 ? acc / wsum : 0.0;
}

void normalize_max(Eigen::VectorXd& v) {
  const double m = v.size() > 0 ? v.maxCoeff() : 0.0;
  if (!(m > 0.0)) throw numeric_error("normalize_max: maximum is not positive");
  v /= m;
}

void normalize_max(SphericalSignal& s) {
  double m = 0.0;
  for (std::int64_t p = 0; p < s.values.size(); ++p)
    if (s.valid[static_cast<std::size_t>(p)]) m = std::max(m, s.values[p]);
  if (!(m > 0.0)) throw numeric_error("normalize_max: maximum is not positive");
  for (std::int64_t p = 0; p < s.values.size(); ++p)
    if (s.valid[static_cast<std::size_t>(p)]) s.values[p] /= m;
}

SphericalSignal rotate_quarter_turns(const SphericalSignal& s, int quarter_turns) {
  require(s.grid != nullptr, "rotate_quarter_turns: signal has no grid");
  const double delta = half_pi * quarter_turns;
  SphericalSignal out = s;
  for (std::int64_t p = 0; p < s.grid->npix(); ++p) {
    double theta, phi;
    s.grid->pix2ang(p, theta, phi);
    const std::int64_t src = s.grid->ang2pix(theta, phi - delta);
    out.values[p] = s.values[src];
    out.valid[static_cast<std::size_t>(p)] = s.valid[static_cast<std::size_t>(src)];
  }
  return out;
}

}  // namespace sliodf
