#include "sliodf/sh.hpp"

#include <cmath>
#include <vector>

#include <Eigen/QR>

namespace sliodf {

namespace {

// Normalized associated Legendre P~_l^m = N_{l,m} P_l^m for all even l up to
// l_max at fixed m, via the standard stable three-term recurrence.
void normalized_plm(int l_max, int m, double x, std::vector<double>& out) {
  // P~_m^m
  double pmm = std::sqrt(1.0 / (4.0 * pi));
  const double sx = std::sqrt(std::max(0.0, 1.0 - x * x));
  for (int k = 1; k <= m; ++k)
    pmm *= -std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * sx;

  out.assign(static_cast<std::size_t>(l_max + 1), 0.0);
  if (m <= l_max) out[static_cast<std::size_t>(m)] = pmm;
  if (m + 1 <= l_max)
    out[static_cast<std::size_t>(m + 1)] = std::sqrt(2.0 * m + 3.0) * x * pmm;
  for (int l = m + 2; l <= l_max; ++l) {
    const double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - static_cast<double>(m) * m));
    const double b = std::sqrt(((l - 1.0) * (l - 1.0) - static_cast<double>(m) * m) /
                               (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
    out[static_cast<std::size_t>(l)] =
        a * (x * out[static_cast<std::size_t>(l - 1)] - b * out[static_cast<std::size_t>(l - 2)]);
  }
}

}  // namespace

int sh_coeff_count(int l_max) {
  require(l_max >= 0 && l_max % 2 == 0, "sh_coeff_count: l_max must be even and >= 0");
  // sum of (2l+1) over even l
  return (l_max + 1) * (l_max + 2) / 2;
}

double sh_eval(int l, int m, double theta, double phi) {
  require(l >= 0 && l % 2 == 0, "sh_eval: degree must be even");
  require(std::abs(m) <= l, "sh_eval: |m| must be <= l");
  const int am = std::abs(m);
  std::vector<double> plm;
  normalized_plm(l, am, std::cos(theta), plm);
  const double base = plm[static_cast<std::size_t>(l)];
  if (m == 0) return base;
  const double sq2 = std::sqrt(2.0);
  return m > 0 ? sq2 * base * std::cos(am * phi) : sq2 * base * std::sin(am * phi);
}

Eigen::VectorXd sh_basis_row(double theta, double phi, int l_max) {
  const int n_coef = sh_coeff_count(l_max);
  Eigen::VectorXd row(n_coef);
  const double sq2 = std::sqrt(2.0);
  const double x = std::cos(theta);
  std::vector<double> plm;
  int col = 0;
  for (int l = 0; l <= l_max; l += 2) {
    for (int m = -l; m <= l; ++m, ++col) {
      const int am = std::abs(m);
      normalized_plm(l, am, x, plm);
      const double base = plm[static_cast<std::size_t>(l)];
      if (m == 0)
        row[col] = base;
      else if (m > 0)
        row[col] = sq2 * base * std::cos(am * phi);
      else
        row[col] = sq2 * base * std::sin(am * phi);
    }
  }
  return row;
}

Eigen::MatrixXd sh_basis_matrix(const HealpixGrid& grid, const CapMask* mask, int l_max) {
  const int n_coef = sh_coeff_count(l_max);
  const std::int64_t n_rows = mask ? mask->count() : grid.npix();
  require(n_rows >= n_coef, "sh_basis_matrix: fewer sample points than coefficients");

  Eigen::MatrixXd B(n_rows, n_coef);
  for (std::int64_t r = 0; r < n_rows; ++r) {
    const std::int64_t pix = mask ? mask->pixels[static_cast<std::size_t>(r)] : r;
    double theta, phi;
    grid.pix2ang(pix, theta, phi);
    B.row(r) = sh_basis_row(theta, phi, l_max).transpose();
  }
  return B;
}

Eigen::VectorXd sh_fit(const Eigen::MatrixXd& basis, const Eigen::VectorXd& y) {
  require(basis.rows() == y.size(), "sh_fit: row count mismatch");
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(basis);
  return cod.solve(y);
}

}  // namespace sliodf
