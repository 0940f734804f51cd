#include "doctest.h"

#include <cmath>
#include <memory>
#include <vector>

#include "sliodf/common.hpp"
#include "sliodf/rng.hpp"
#include "sliodf/sh.hpp"

using namespace sliodf;

namespace {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration from the
// Chebyshev initial guess; exact for polynomial degree <= 2n - 1.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int l = 2; l <= n; ++l) {
        const double p2 = ((2.0 * l - 1.0) * t * p1 - (l - 1.0) * p0) / l;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double step = p1 / dp;
      t -= step;
      if (std::fabs(step) < 1e-15) break;
    }
    double p0 = 1.0, p1 = t;
    for (int l = 2; l <= n; ++l) {
      const double p2 = ((2.0 * l - 1.0) * t * p1 - (l - 1.0) * p0) / l;
      p0 = p1;
      p1 = p2;
    }
    const double dp = n * (t * p1 - p0) / (t * t - 1.0);
    x[i] = t;
    w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

// Sphere quadrature of f(theta, phi): Gauss-Legendre in cos theta times a
// uniform trapezoid in phi (exact for trigonometric degree < n_phi).
template <typename F>
double sphere_integral(F&& f, int n_mu = 32, int n_phi = 64) {
  std::vector<double> mu, w;
  gauss_legendre(n_mu, mu, w);
  double acc = 0.0;
  for (int i = 0; i < n_mu; ++i) {
    const double theta = std::acos(mu[i]);
    double ring = 0.0;
    for (int j = 0; j < n_phi; ++j) ring += f(theta, two_pi * j / n_phi);
    acc += w[i] * ring * (two_pi / n_phi);
  }
  return acc;
}

}  // namespace

TEST_SUITE_BEGIN("sh");

TEST_CASE("coefficient counts enumerate even degrees only") {
  CHECK(sh_coeff_count(0) == 1);
  CHECK(sh_coeff_count(2) == 6);
  CHECK(sh_coeff_count(4) == 15);
  CHECK(sh_coeff_count(8) == 45);
  CHECK_THROWS_AS(sh_coeff_count(3), contract_error);
  CHECK_THROWS_AS(sh_coeff_count(-2), contract_error);
  CHECK_THROWS_AS(sh_eval(1, 0, 0.3, 0.2), contract_error);
  CHECK_THROWS_AS(sh_eval(2, 3, 0.3, 0.2), contract_error);
}

TEST_CASE("the basis is orthonormal under exact quadrature") {
  const int l_max = 8;
  const int n = sh_coeff_count(l_max);
  Eigen::MatrixXd gram(n, n);
  struct LM {
    int l, m;
  };
  std::vector<LM> order;
  for (int l = 0; l <= l_max; l += 2)
    for (int m = -l; m <= l; ++m) order.push_back({l, m});
  REQUIRE(static_cast<int>(order.size()) == n);

  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double v = sphere_integral([&](double theta, double phi) {
        return sh_eval(order[i].l, order[i].m, theta, phi) *
               sh_eval(order[j].l, order[j].m, theta, phi);
      });
      gram(i, j) = gram(j, i) = v;
    }
  CHECK((gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("closed-form values at chosen directions") {
  // constant mode
  CHECK(sh_eval(0, 0, 1.234, 5.0) == doctest::Approx(0.28209479177387814).epsilon(1e-15));
  // (3 cos^2 - 1) mode on the equator
  CHECK(sh_eval(2, 0, half_pi, 0.3) == doctest::Approx(-0.31539156525252005).epsilon(1e-13));
  // sectoral cosine mode on the equator at phi = 0
  CHECK(sh_eval(2, 2, half_pi, 0.0) == doctest::Approx(0.5462742152960395).epsilon(1e-13));
  // tesseral modes carry the Condon-Shortley sign
  CHECK(sh_eval(2, 1, 0.25 * pi, 0.0) == doctest::Approx(-0.5462742152960395).epsilon(1e-13));
  CHECK(sh_eval(2, -1, 0.25 * pi, half_pi) ==
        doctest::Approx(-0.5462742152960395).epsilon(1e-13));
  // sin modes vanish at phi = 0, cos modes at the matching quarter period
  CHECK(sh_eval(4, -3, 0.4, 0.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(sh_eval(4, 3, 0.4, half_pi / 3.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-13));
  // poles: only m = 0 survives
  for (int m = -4; m <= 4; ++m) {
    if (m != 0) CHECK(sh_eval(4, m, 0.0, 1.0) == doctest::Approx(0.0));
  }
}

TEST_CASE("basis rows follow the documented coefficient order") {
  const double theta = 0.9, phi = 2.2;
  Eigen::VectorXd row = sh_basis_row(theta, phi, 4);
  REQUIRE(row.size() == 15);
  int col = 0;
  for (int l = 0; l <= 4; l += 2)
    for (int m = -l; m <= l; ++m, ++col)
      CHECK(row[col] == doctest::Approx(sh_eval(l, m, theta, phi)).epsilon(1e-15));
}

TEST_CASE("even harmonics are antipodally symmetric") {
  Rng rng(42);
  for (int k = 0; k < 200; ++k) {
    const double theta = rng.uniform(0.0, pi);
    const double phi = rng.uniform(0.0, two_pi);
    for (int l : {0, 2, 4, 8}) {
      const int m = static_cast<int>(rng.below(static_cast<std::uint64_t>(2 * l + 1))) - l;
      const double a = sh_eval(l, m, theta, phi);
      const double b = sh_eval(l, m, pi - theta, phi + pi);
      CHECK(std::fabs(a - b) < 1e-10);
    }
  }
}

TEST_CASE("fitting a band-limited field recovers its coefficients exactly") {
  auto grid = std::make_shared<const HealpixGrid>(16);
  const Eigen::MatrixXd basis = sh_basis_matrix(*grid, nullptr, 8);
  REQUIRE(basis.rows() == grid->npix());
  REQUIRE(basis.cols() == 45);

  Rng rng(77);
  Eigen::VectorXd c(45);
  for (int i = 0; i < 45; ++i) c[i] = rng.uniform(-1.0, 1.0);
  const Eigen::VectorXd y = basis * c;
  const Eigen::VectorXd c_hat = sh_fit(basis, y);
  CHECK((c_hat - c).cwiseAbs().maxCoeff() < 1e-8);
  // and evaluation of the fit reproduces the samples
  CHECK((basis * c_hat - y).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("fit of analytic fields gives their known expansions") {
  auto grid = std::make_shared<const HealpixGrid>(16);
  const Eigen::MatrixXd basis = sh_basis_matrix(*grid, nullptr, 4);

  // constant 1 = sqrt(4 pi) Y00
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(grid->npix());
  Eigen::VectorXd c = sh_fit(basis, ones);
  CHECK(c[0] == doctest::Approx(std::sqrt(4.0 * pi)).epsilon(1e-10));
  for (int i = 1; i < c.size(); ++i) CHECK(std::fabs(c[i]) < 1e-10);

  // z^2 = sqrt(4 pi)/3 Y00 + sqrt(16 pi / 5)/3 Y20
  Eigen::VectorXd zsq(grid->npix());
  for (std::int64_t p = 0; p < grid->npix(); ++p) {
    const double z = grid->pix2vec(p).z();
    zsq[p] = z * z;
  }
  c = sh_fit(basis, zsq);
  CHECK(c[0] == doctest::Approx(std::sqrt(4.0 * pi) / 3.0).epsilon(1e-10));
  const int idx20 = 1 + 2;  // after Y00, the l=2 block is m = -2, -1, 0, 1, 2
  CHECK(c[idx20] == doctest::Approx(std::sqrt(16.0 * pi / 5.0) / 3.0).epsilon(1e-10));
  for (int i = 1; i < c.size(); ++i)
    if (i != idx20) CHECK(std::fabs(c[i]) < 1e-10);
}

TEST_CASE("discrete Parseval holds on the full sphere") {
  auto grid = std::make_shared<const HealpixGrid>(16);
  const Eigen::MatrixXd basis = sh_basis_matrix(*grid, nullptr, 8);
  Rng rng(5150);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd c(45);
    for (int i = 0; i < 45; ++i) c[i] = rng.uniform(-1.0, 1.0);
    const Eigen::VectorXd y = basis * c;
    const double lhs = grid->pixel_area() * y.squaredNorm();
    const double rhs = c.squaredNorm();
    CHECK(std::fabs(lhs - rhs) / rhs < 1e-3);
  }
}

TEST_CASE("masked fits are still exact when the cap holds enough pixels") {
  auto grid = std::make_shared<const HealpixGrid>(16);
  const CapMask mask = cap_mask(*grid, 60.0 * deg);
  const Eigen::MatrixXd basis = sh_basis_matrix(*grid, &mask, 8);
  REQUIRE(basis.rows() == mask.count());

  Rng rng(17);
  Eigen::VectorXd c(45);
  for (int i = 0; i < 45; ++i) c[i] = rng.uniform(-1.0, 1.0);
  const Eigen::VectorXd y = basis * c;
  const Eigen::VectorXd c_hat = sh_fit(basis, y);
  // the cap fit need not equal c (columns lose orthogonality), but it must
  // reproduce the samples it saw
  CHECK((basis * c_hat - y).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("underdetermined sample sets are rejected") {
  auto coarse = std::make_shared<const HealpixGrid>(1);  // 12 pixels < 45 coeffs
  CHECK_THROWS_AS(sh_basis_matrix(*coarse, nullptr, 8), contract_error);
}

TEST_SUITE_END();
