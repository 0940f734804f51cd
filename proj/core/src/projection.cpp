#include "sliodf/projection.hpp"

#include <algorithm>
#include <cmath>

namespace sliodf {

namespace {

// Half-sample reflection: ... c b a | a b c ... | c b a ...
int reflect_index(int i, int n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - i - 1;
  }
  return i;
}

Eigen::MatrixXd gaussian_smooth(const Eigen::MatrixXd& img, double sigma) {
  if (sigma <= 0.0) return img;
  const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  Eigen::VectorXd k(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i)
    k[i + radius] = std::exp(-0.5 * (i / sigma) * (i / sigma));
  k /= k.sum();

  const int h = static_cast<int>(img.rows());
  const int w = static_cast<int>(img.cols());
  Eigen::MatrixXd tmp(h, w), out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += k[i + radius] * img(y, reflect_index(x + i, w));
      tmp(y, x) = acc;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += k[i + radius] * tmp(reflect_index(y + i, h), x);
      out(y, x) = acc;
    }
  return out;
}

}  // namespace

PatternCentroid find_centroid(const ScatteringPattern& p, double sigma) {
  require(p.width() > 0 && p.height() > 0, "find_centroid: empty pattern");
  require(sigma >= 0.0, "find_centroid: negative sigma");
  if (p.values.maxCoeff() == p.values.minCoeff())
    throw numeric_error("find_centroid: constant pattern has no centroid");

  const Eigen::MatrixXd sm = gaussian_smooth(p.values, sigma);
  int best_x = 0, best_y = 0;
  double best = sm(0, 0);
  for (int y = 0; y < p.height(); ++y)
    for (int x = 0; x < p.width(); ++x)
      if (sm(y, x) > best) {
        best = sm(y, x);
        best_y = y;
        best_x = x;
      }
  return {static_cast<double>(best_x), static_cast<double>(best_y)};
}

void inverse_gnomonic(double dx, double dy, const MicroscopeGeometry& g,
                      double& theta, double& phi) {
  require(g.screen_distance_cm > 0.0 && g.pixel_pitch_mm > 0.0,
          "inverse_gnomonic: geometry distances must be positive");
  phi = (dx == 0.0 && dy == 0.0) ? 0.0 : wrap_two_pi(std::atan2(dx, dy));
  theta = std::atan(g.pitch_over_distance() * std::hypot(dx, dy));
}

double raster_coverage_theta(int width, int height, const PatternCentroid& c,
                             const MicroscopeGeometry& g) {
  const double rin = std::max(0.0, std::min(std::min(c.x, width - 1 - c.x),
                                            std::min(c.y, height - 1 - c.y)));
  return std::atan(g.pitch_over_distance() * rin);
}

double sample_pattern(const ScatteringPattern& p, double x, double y) {
  if (x < 0.0 || y < 0.0 || x > p.width() - 1 || y > p.height() - 1) return 0.0;
  const int x0 = std::min(static_cast<int>(x), p.width() - 2 >= 0 ? p.width() - 2 : 0);
  const int y0 = std::min(static_cast<int>(y), p.height() - 2 >= 0 ? p.height() - 2 : 0);
  const int x1 = std::min(x0 + 1, p.width() - 1);
  const int y1 = std::min(y0 + 1, p.height() - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  return (1 - fy) * ((1 - fx) * p.values(y0, x0) + fx * p.values(y0, x1)) +
         fy * ((1 - fx) * p.values(y1, x0) + fx * p.values(y1, x1));
}

SphericalSignal project_to_sphere(const ScatteringPattern& p, const PatternCentroid& c,
                                  const MicroscopeGeometry& g,
                                  std::shared_ptr<const HealpixGrid> grid,
                                  const CapMask& mask, ProjectionStats* stats) {
  require(grid != nullptr, "project_to_sphere: null grid");
  require(static_cast<std::int64_t>(mask.position.size()) == grid->npix(),
          "project_to_sphere: mask does not match grid");
  const std::int64_t n_samples = static_cast<std::int64_t>(p.width()) * p.height();
  require(n_samples > 0, "project_to_sphere: empty pattern");

  Eigen::Matrix<double, Eigen::Dynamic, 3> dirs(n_samples, 3);
  Eigen::VectorXd vals(n_samples);
  double theta_cov_max = 0.0;
  std::int64_t s = 0;
  for (int y = 0; y < p.height(); ++y)
    for (int x = 0; x < p.width(); ++x, ++s) {
      double theta, phi;
      inverse_gnomonic(x - c.x, y - c.y, g, theta, phi);
      theta_cov_max = std::max(theta_cov_max, theta);
      dirs.row(s) << std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
          std::cos(theta);
      vals[s] = p.values(y, x);
    }

  // Deterministic spacing estimate: samples spread over the covered cap.
  const double omega = two_pi * (1.0 - std::cos(theta_cov_max));
  const double spacing = std::sqrt(omega / static_cast<double>(n_samples));
  const double gap_limit = 3.0 * spacing;

  if (stats) {
    stats->coverage_gaps = 0;
    stats->gap_pixels.clear();
    stats->mean_sample_spacing = spacing;
  }

  constexpr int k = 4;
  SphericalSignal out;
  out.values = Eigen::VectorXd::Zero(grid->npix());
  out.valid.assign(static_cast<std::size_t>(grid->npix()), 0);

  Eigen::VectorXd dots(n_samples);
  for (std::int64_t mi = 0; mi < mask.count(); ++mi) {
    const std::int64_t pix = mask.pixels[static_cast<std::size_t>(mi)];
    const Eigen::Vector3d ctr = grid->pix2vec(pix);
    dots.noalias() = dirs * ctr;

    std::int64_t best_idx[k];
    double best_dot[k];
    int filled = 0;
    for (std::int64_t i = 0; i < n_samples; ++i) {
      const double d = dots[i];
      if (filled < k) {
        int j = filled++;
        while (j > 0 && best_dot[j - 1] < d) {
          best_dot[j] = best_dot[j - 1];
          best_idx[j] = best_idx[j - 1];
          --j;
        }
        best_dot[j] = d;
        best_idx[j] = i;
      } else if (d > best_dot[k - 1]) {
        int j = k - 1;
        while (j > 0 && best_dot[j - 1] < d) {
          best_dot[j] = best_dot[j - 1];
          best_idx[j] = best_idx[j - 1];
          --j;
        }
        best_dot[j] = d;
        best_idx[j] = i;
      }
    }

    out.valid[static_cast<std::size_t>(pix)] = 1;
    const double nearest = std::acos(std::clamp(best_dot[0], -1.0, 1.0));
    if (nearest > gap_limit) {
      if (stats) {
        ++stats->coverage_gaps;
        stats->gap_pixels.push_back(pix);
      }
      continue;  // value stays 0
    }
    if (best_dot[0] >= 1.0 - 1e-24) {  // exact hit
      out.values[pix] = vals[best_idx[0]];
      continue;
    }
    double wsum = 0.0, acc = 0.0;
    for (int j = 0; j < std::min(filled, k); ++j) {
      const double d = std::acos(std::clamp(best_dot[j], -1.0, 1.0));
      const double w = 1.0 / (d * d);
      wsum += w;
      acc += w * vals[best_idx[j]];
    }
    out.values[pix] = acc / wsum;
  }

  out.grid = std::move(grid);
  return out;
}

}  // namespace sliodf
