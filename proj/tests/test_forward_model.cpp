#include "doctest.h"

#include <cmath>
#include <memory>
#include <set>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "sliodf/common.hpp"
#include "sliodf/forward_model.hpp"
#include "sliodf/rng.hpp"
#include "sliodf/sh.hpp"

using namespace sliodf;

namespace {

std::shared_ptr<const HealpixGrid> grid16() {
  static auto g = std::make_shared<const HealpixGrid>(16);
  return g;
}

const CapMask& mask60() {
  static CapMask m = cap_mask(*grid16(), 60.0 * deg);
  return m;
}

// Quadric through explicit rotation matrices assembled by a different route
// (angle-axis exponentials instead of hand-written entries).
double quadric_reference(const Eigen::Vector3d& v, const FibreOrientation& o,
                         const EllipsoidKernelParams& p) {
  const Eigen::Matrix3d r =
      (Eigen::AngleAxisd(o.theta, Eigen::Vector3d::UnitY()) *
       Eigen::AngleAxisd(o.phi, Eigen::Vector3d::UnitZ()))
          .toRotationMatrix();
  Eigen::Matrix3d lambda = Eigen::Matrix3d::Identity();
  lambda(0, 0) = p.alpha;
  const Eigen::Vector3d d = v - p.centre;
  return d.dot(r.transpose() * lambda * r * d);
}

}  // namespace

TEST_SUITE_BEGIN("forward_model");

TEST_CASE("fibre axis is the rotated x-axis") {
  Rng rng(64);
  for (int k = 0; k < 300; ++k) {
    FibreOrientation o{rng.uniform(0.0, two_pi), rng.uniform(0.0, half_pi)};
    const Eigen::Vector3d f = fibre_axis(o);
    CHECK(f.norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(f.x() == doctest::Approx(std::cos(o.theta) * std::cos(o.phi)).epsilon(1e-14));
    CHECK(f.y() == doctest::Approx(-std::cos(o.theta) * std::sin(o.phi)).epsilon(1e-14));
    CHECK(f.z() == doctest::Approx(std::sin(o.theta)).epsilon(1e-14));
    // the axis is the quadric's stiff direction: Q(f) = alpha
    EllipsoidKernelParams p;
    CHECK(quadric_value(f, o, p) == doctest::Approx(p.alpha).epsilon(1e-12));
  }
  CHECK(fibre_axis({2.7, half_pi}).z() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("orientation_from_axis canonicalizes to the upper hemisphere") {
  Rng rng(65);
  for (int k = 0; k < 300; ++k) {
    FibreOrientation o{rng.uniform(0.0, two_pi), rng.uniform(0.01, half_pi)};
    const Eigen::Vector3d f = fibre_axis(o);
    const FibreOrientation back = orientation_from_axis(f);
    // acos near |dot| = 1 resolves angles only to ~sqrt(eps)
    CHECK(orientation_angle(o, back) < 1e-7);
    CHECK(back.theta >= 0.0);
    CHECK(back.theta <= half_pi + 1e-15);
    CHECK(back.phi >= 0.0);
    CHECK(back.phi < two_pi);
    // the antipode gives the same representative
    const FibreOrientation flip = orientation_from_axis(-f);
    CHECK(std::fabs(flip.theta - back.theta) < 1e-12);
    CHECK(std::fabs(std::remainder(flip.phi - back.phi, two_pi)) < 1e-12);
    // scaling is irrelevant
    const FibreOrientation scaled = orientation_from_axis(2.5 * f);
    CHECK(orientation_angle(scaled, back) < 1e-7);
  }
  // in-plane axes keep azimuth atan2(y, x) in [0, pi)
  for (double phi : {0.0, 0.4, 2.0, 4.0, 5.5}) {
    const FibreOrientation rep = orientation_from_axis(fibre_axis({phi, 0.0}));
    const Eigen::Vector3d a = fibre_axis(rep);
    const double az = std::atan2(a.y(), a.x());
    CHECK(az >= -1e-15);
    CHECK(az < pi);
    CHECK(orientation_angle(rep, {phi, 0.0}) < 1e-12);
  }
  CHECK_THROWS_AS(orientation_from_axis(Eigen::Vector3d::Zero()), contract_error);
}

TEST_CASE("orientation_angle identifies antipodes and stays in [0, pi/2]") {
  CHECK(orientation_angle({1.0, 0.3}, {1.0, 0.3}) == doctest::Approx(0.0));
  // polar axis vs any in-plane axis
  CHECK(orientation_angle({0.0, half_pi}, {2.2, 0.0}) == doctest::Approx(half_pi).epsilon(1e-12));
  // in-plane axes phi and phi + pi are the same axis
  CHECK(orientation_angle({0.5, 0.0}, {0.5 + pi, 0.0}) < 1e-7);
  Rng rng(66);
  for (int k = 0; k < 200; ++k) {
    FibreOrientation a{rng.uniform(0.0, two_pi), rng.uniform(0.0, half_pi)};
    FibreOrientation b{rng.uniform(0.0, two_pi), rng.uniform(0.0, half_pi)};
    const double ab = orientation_angle(a, b);
    CHECK(ab >= 0.0);
    CHECK(ab <= half_pi + 1e-12);
    CHECK(ab == doctest::Approx(orientation_angle(b, a)).epsilon(1e-13));
    CHECK(ab ==
          doctest::Approx(std::acos(std::min(1.0, std::fabs(fibre_axis(a).dot(fibre_axis(b))))))
              .epsilon(1e-12));
  }
}

TEST_CASE("quadric matches brute-force matrix assembly on random configurations") {
  Rng rng(1000);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    FibreOrientation o{rng.uniform(0.0, two_pi), rng.uniform(0.0, half_pi)};
    EllipsoidKernelParams p;
    p.alpha = rng.uniform(1.0, 40.0);
    p.centre = Eigen::Vector3d(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2),
                               rng.uniform(-0.2, 0.2));
    const Eigen::Vector3d v(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5),
                            rng.uniform(-1.5, 1.5));
    worst = std::max(worst, std::fabs(quadric_value(v, o, p) - quadric_reference(v, o, p)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("quadric closed forms: axis, perpendicular, origin, separable form") {
  EllipsoidKernelParams p;
  p.alpha = 7.0;
  Rng rng(2);
  for (int k = 0; k < 100; ++k) {
    FibreOrientation o{rng.uniform(0.0, two_pi), rng.uniform(0.0, half_pi)};
    const Eigen::Vector3d f = fibre_axis(o);
    CHECK(quadric_value(f, o, p) == doctest::Approx(7.0).epsilon(1e-12));
    // any unit vector orthogonal to the axis sits on the unit shell
    Eigen::Vector3d u = f.cross(Eigen::Vector3d(0.3, -0.8, 0.52)).normalized();
    CHECK(quadric_value(u, o, p) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(quadric_value(Eigen::Vector3d::Zero(), o, p) == doctest::Approx(0.0));
    // Q(v) = |v|^2 + (alpha - 1)(f . v)^2 when centred
    const Eigen::Vector3d v(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                            rng.uniform(-1.0, 1.0));
    const double expect = v.squaredNorm() + (p.alpha - 1.0) * std::pow(f.dot(v), 2);
    CHECK(quadric_value(v, o, p) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("kernel is the normalized Gaussian of the quadric over the cap") {
  auto g = grid16();
  const CapMask& mask = mask60();
  FibreOrientation o{1.3, 0.4};
  EllipsoidKernelParams p;

  bool degen = true;
  SphericalSignal ker = fibre_kernel(g, mask, o, p, &degen);
  CHECK(!degen);

  double peak = 0.0;
  for (std::int64_t pix : mask.pixels) {
    const double q = quadric_value(g->pix2vec(pix), o, p);
    peak = std::max(peak, std::exp(-(q - 1.0) * (q - 1.0) / (2.0 * p.sigma * p.sigma)));
  }
  double maxv = 0.0;
  for (std::int64_t pix : mask.pixels) {
    const double q = quadric_value(g->pix2vec(pix), o, p);
    const double want = std::exp(-(q - 1.0) * (q - 1.0) / (2.0 * p.sigma * p.sigma)) / peak;
    CHECK(ker.values[pix] == doctest::Approx(want).epsilon(1e-12));
    maxv = std::max(maxv, ker.values[pix]);
  }
  CHECK(maxv == doctest::Approx(1.0).epsilon(1e-12));
  for (std::int64_t pix = 0; pix < g->npix(); ++pix) {
    if (!mask.contains(pix)) {
      CHECK(ker.values[pix] == 0.0);
      CHECK(ker.valid[static_cast<std::size_t>(pix)] == 0);
    }
  }

  p.normalize = false;
  SphericalSignal raw = fibre_kernel(g, mask, o, p, &degen);
  double raw_max = 0.0;
  for (std::int64_t pix : mask.pixels) raw_max = std::max(raw_max, raw.values[pix]);
  CHECK(raw_max == doctest::Approx(peak).epsilon(1e-12));
}

TEST_CASE("band geometry: reach equals fibre elevation, axis direction is dark") {
  auto g = grid16();
  const CapMask& mask = mask60();
  EllipsoidKernelParams p;

  // a 50-degree fibre: the band grazes colatitude 50 and nothing brighter
  // than noise lives above colatitude 30
  SphericalSignal ker = fibre_kernel(g, mask, {2.0, 50.0 * deg}, p);
  double best_theta = 0.0, best_val = -1.0;
  for (std::int64_t pix : mask.pixels) {
    double theta, phi;
    g->pix2ang(pix, theta, phi);
    if (ker.values[pix] > best_val) {
      best_val = ker.values[pix];
      best_theta = theta;
    }
    if (theta < 30.0 * deg) CHECK(ker.values[pix] < 1e-3);
  }
  CHECK(best_val == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(best_theta > 45.0 * deg);

  // a shallow fibre's band passes the pole; the fibre axis itself is dark
  FibreOrientation flat{0.7, 0.2};
  SphericalSignal kflat = fibre_kernel(g, mask, flat, p);
  const std::int64_t axis_pix = g->vec2pix(fibre_axis(flat));
  if (mask.contains(axis_pix)) CHECK(kflat.values[axis_pix] < 1e-10);
  // brightest pixels are near the orthogonal plane
  for (std::int64_t pix : mask.pixels) {
    if (kflat.values[pix] > 0.99) {
      CHECK(std::fabs(fibre_axis(flat).dot(g->pix2vec(pix))) < 0.08);
    }
  }
}

TEST_CASE("steep fibres whose band exits the cap are reported degenerate") {
  auto g = grid16();
  const CapMask& mask = mask60();
  EllipsoidKernelParams p;
  bool degen = false;
  SphericalSignal ker = fibre_kernel(g, mask, {0.3, 85.0 * deg}, p, &degen);
  CHECK(degen);
  // degenerate kernels skip normalization: everything stays tiny
  for (std::int64_t pix : mask.pixels) CHECK(ker.values[pix] < 1e-6);
}

TEST_CASE("rotating the fibre a quarter turn permutes the kernel") {
  auto g = grid16();
  const CapMask& mask = mask60();
  EllipsoidKernelParams p;
  FibreOrientation o{1.1, 0.35};
  FibreOrientation o_rot{o.phi - half_pi, o.theta};  // fibre rotated +90 in space

  SphericalSignal k0 = fibre_kernel(g, mask, o, p);
  SphericalSignal k1 = fibre_kernel(g, mask, o_rot, p);
  SphericalSignal k0r = rotate_quarter_turns(k0, 1);

  double worst = 0.0;
  for (std::int64_t pix : mask.pixels)
    worst = std::max(worst, std::fabs(k1.values[pix] - k0r.values[pix]));
  CHECK(worst < 1e-12);
}

TEST_CASE("mixture directions tile the axial upper hemisphere") {
  // the base grid: four polar pixels plus the azimuth < pi half of the equator
  const std::vector<FibreOrientation> d1 = mixture_directions(1);
  REQUIRE(d1.size() == 6);
  HealpixGrid g1(1);
  for (int j = 0; j < 6; ++j) {
    const Eigen::Vector3d expect = g1.pix2vec(j);  // pixels 0..5 in order
    CHECK((fibre_axis(d1[static_cast<std::size_t>(j)]) - expect).norm() < 1e-12);
  }

  const std::vector<FibreOrientation> d4 = mixture_directions(4);
  REQUIRE(d4.size() == 96);  // half of 12 * 16

  // pairwise distinct as axes
  for (std::size_t i = 0; i < d4.size(); ++i)
    for (std::size_t j = i + 1; j < d4.size(); ++j)
      CHECK(orientation_angle(d4[i], d4[j]) > 1e-6);

  // every pixel of the full grid is an atom or an atom's antipode
  HealpixGrid g4(4);
  for (std::int64_t pix = 0; pix < g4.npix(); ++pix) {
    double best = 1e9;
    for (const auto& o : d4) {
      const double c = std::fabs(fibre_axis(o).dot(g4.pix2vec(pix)));
      best = std::min(best, std::acos(std::min(1.0, c)));
    }
    CHECK(best < 1e-7);  // acos resolution near 1 is ~sqrt(eps)
  }

  // upper-hemisphere canonical representatives
  for (const auto& o : d4) {
    CHECK(fibre_axis(o).z() > -1e-12);
    CHECK(o.theta >= 0.0);
  }
}

TEST_CASE("kernel bank stacks kernels column by column") {
  auto g = grid16();
  const CapMask& mask = mask60();
  const std::vector<FibreOrientation> dirs = mixture_directions(2);
  EllipsoidKernelParams p;
  const KernelBank bank = build_kernel_bank(g, mask, dirs, p);

  CHECK(bank.k.rows() == mask.count());
  CHECK(bank.k.cols() == static_cast<Eigen::Index>(dirs.size()));
  CHECK(bank.degenerate_columns == 0);

  for (std::size_t j : {std::size_t{0}, dirs.size() / 2, dirs.size() - 1}) {
    SphericalSignal ker = fibre_kernel(g, mask, dirs[j], p);
    const Eigen::VectorXd col = masked_values(ker, mask);
    CHECK((bank.k.col(static_cast<Eigen::Index>(j)) - col).cwiseAbs().maxCoeff() == 0.0);
  }

  // reconstruction is plain linear mixing
  Rng rng(12);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(bank.k.cols());
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = rng.uniform(0.0, 1.0);
  Eigen::VectorXd manual = Eigen::VectorXd::Zero(mask.count());
  for (Eigen::Index j = 0; j < bank.k.cols(); ++j) manual += w[j] * bank.k.col(j);
  CHECK((reconstruct(bank, w) - manual).cwiseAbs().maxCoeff() < 1e-12);

  Eigen::VectorXd wrong(3);
  wrong.setZero();
  CHECK_THROWS_AS(reconstruct(bank, wrong), contract_error);
}

TEST_CASE("smoother is a symmetric idempotent projector onto the even band") {
  const FodfSmoother sm = make_fodf_smoother(4, 8);
  const Eigen::Index n = sm.smooth.rows();
  REQUIRE(n == 96);
  REQUIRE(sm.atoms_to_sh.rows() == 45);
  REQUIRE(sm.atoms_to_sh.cols() == 96);

  CHECK((sm.smooth - sm.smooth.transpose()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((sm.smooth * sm.smooth - sm.smooth).cwiseAbs().maxCoeff() < 1e-10);

  // band-limited atom samples are fixed points
  Rng rng(31);
  Eigen::VectorXd c(45);
  for (int i = 0; i < 45; ++i) c[i] = rng.uniform(-1.0, 1.0);
  const std::vector<FibreOrientation> dirs = mixture_directions(4);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector3d a = fibre_axis(dirs[static_cast<std::size_t>(i)]);
    const double theta = std::acos(std::clamp(a.z(), -1.0, 1.0));
    const double phi = wrap_two_pi(std::atan2(a.y(), a.x()));
    v[i] = sh_basis_row(theta, phi, 8).dot(c);
  }
  CHECK((sm.smooth * v - v).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((sm.atoms_to_sh * v - c).cwiseAbs().maxCoeff() < 1e-8);

  // constants pass through untouched (pure degree-0 content)
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  CHECK((sm.smooth * ones - ones).cwiseAbs().maxCoeff() < 1e-10);
  const Eigen::VectorXd c0 = sm.atoms_to_sh * ones;
  CHECK(c0[0] == doctest::Approx(std::sqrt(4.0 * pi)).epsilon(1e-10));
  for (Eigen::Index i = 1; i < c0.size(); ++i) CHECK(std::fabs(c0[i]) < 1e-10);
}

TEST_CASE("atom and antipode pixel tables are actual antipodes") {
  const FodfSmoother sm = make_fodf_smoother(4, 8);
  HealpixGrid g(4);
  for (std::size_t i = 0; i < sm.atom_pixel.size(); ++i) {
    const Eigen::Vector3d a = g.pix2vec(sm.atom_pixel[i]);
    const Eigen::Vector3d b = g.pix2vec(sm.antipode_pixel[i]);
    CHECK((a + b).norm() < 1e-12);
  }
}

TEST_CASE("fold_axial averages each axial pixel pair") {
  const FodfSmoother sm = make_fodf_smoother(2, 2);
  HealpixGrid g(2);
  Rng rng(44);
  Eigen::VectorXd full(g.npix());
  for (Eigen::Index i = 0; i < full.size(); ++i) full[i] = rng.uniform(-1.0, 1.0);
  const Eigen::VectorXd folded = fold_axial(sm, full);
  REQUIRE(folded.size() == static_cast<Eigen::Index>(sm.atom_pixel.size()));
  for (std::size_t i = 0; i < sm.atom_pixel.size(); ++i) {
    const double want = 0.5 * (full[sm.atom_pixel[i]] + full[sm.antipode_pixel[i]]);
    CHECK(folded[static_cast<Eigen::Index>(i)] == doctest::Approx(want).epsilon(1e-15));
  }
  // an antipodally symmetric field folds to its atom samples unchanged
  Eigen::VectorXd sym(g.npix());
  for (std::int64_t p = 0; p < g.npix(); ++p) {
    const Eigen::Vector3d v = g.pix2vec(p);
    sym[p] = v.x() * v.x() + 0.3 * v.y() * v.z();
  }
  const Eigen::VectorXd fs = fold_axial(sm, sym);
  for (std::size_t i = 0; i < sm.atom_pixel.size(); ++i)
    CHECK(fs[static_cast<Eigen::Index>(i)] ==
          doctest::Approx(sym[sm.atom_pixel[i]]).epsilon(1e-12));
}

TEST_CASE("make_fodf and fodf_values expose the smoothed distribution") {
  const FodfSmoother sm = make_fodf_smoother(2, 2);
  Rng rng(9);
  Eigen::VectorXd w(sm.smooth.rows());
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = rng.uniform(0.0, 1.0);
  const Fodf f = make_fodf(sm, w);
  CHECK((f.weights - w).cwiseAbs().maxCoeff() == 0.0);
  CHECK((f.sh - sm.atoms_to_sh * w).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((fodf_values(sm, f) - sm.smooth * w).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_SUITE_END();
