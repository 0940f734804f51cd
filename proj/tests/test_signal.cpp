#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "sliodf/common.hpp"
#include "sliodf/rng.hpp"
#include "sliodf/signal.hpp"

using namespace sliodf;

namespace {

std::shared_ptr<const HealpixGrid> grid16() {
  static auto g = std::make_shared<const HealpixGrid>(16);
  return g;
}

}  // namespace

TEST_SUITE_BEGIN("signal");

TEST_CASE("make_signal starts zeroed with no defined samples") {
  auto s = make_signal(grid16());
  CHECK(s.values.size() == 3072);
  CHECK(s.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(std::count(s.valid.begin(), s.valid.end(), 1) == 0);
  CHECK_THROWS_AS(make_signal(nullptr), contract_error);
}

TEST_CASE("cap mask keeps exactly the pixels whose centers lie inside the cap") {
  auto g = grid16();
  const double theta_max = 60.0 * deg;
  CapMask m = cap_mask(*g, theta_max);

  std::int64_t expect = 0;
  for (std::int64_t p = 0; p < g->npix(); ++p) {
    double theta, phi;
    g->pix2ang(p, theta, phi);
    const bool in = theta <= theta_max + 1e-9;
    if (in) ++expect;
    CHECK(m.contains(p) == in);
  }
  CHECK(m.count() == expect);

  // cap solid-angle fraction (1 - cos 60)/2 = 1/4, up to one boundary ring
  const double frac = static_cast<double>(m.count()) / static_cast<double>(g->npix());
  CHECK(std::fabs(frac - 0.25) < 64.0 / 3072.0);

  // index bookkeeping
  CHECK(std::is_sorted(m.pixels.begin(), m.pixels.end()));
  for (std::int64_t i = 0; i < m.count(); ++i)
    CHECK(m.position[static_cast<std::size_t>(m.pixels[static_cast<std::size_t>(i)])] == i);

  CHECK(cap_mask(*g, 0.0).count() == 0);       // no center sits exactly at the pole
  CHECK(cap_mask(*g, pi).count() == g->npix());
  CHECK_THROWS_AS(cap_mask(*g, -0.1), contract_error);
  CHECK_THROWS_AS(cap_mask(*g, 4.0), contract_error);
}

TEST_CASE("the boundary ring at exactly theta_max stays in the mask") {
  // at nside = 16 the belt ring i = 20 sits at z = 4/3 - 20/24 = 1/2, i.e.
  // exactly 60 degrees; acos rounding must not drop it
  auto g = grid16();
  CapMask m = cap_mask(*g, std::acos(0.5));
  std::int64_t on_ring = 0;
  for (std::int64_t p : m.pixels) {
    if (std::fabs(g->pix2vec(p).z() - 0.5) < 1e-12) ++on_ring;
  }
  CHECK(on_ring == 64);
}

TEST_CASE("masked gather and scatter invert") {
  auto g = grid16();
  CapMask m = cap_mask(*g, 60.0 * deg);
  Rng rng(11);
  Eigen::VectorXd v(m.count());
  for (std::int64_t i = 0; i < m.count(); ++i) v[i] = rng.uniform(-2.0, 5.0);

  SphericalSignal s = from_masked_values(g, m, v);
  CHECK((masked_values(s, m) - v).cwiseAbs().maxCoeff() == 0.0);
  for (std::int64_t p = 0; p < g->npix(); ++p) {
    if (!m.contains(p)) {
      CHECK(s.values[p] == 0.0);
      CHECK(s.valid[static_cast<std::size_t>(p)] == 0);
    } else {
      CHECK(s.valid[static_cast<std::size_t>(p)] == 1);
    }
  }

  Eigen::VectorXd wrong(m.count() + 1);
  wrong.setZero();
  CHECK_THROWS_AS(from_masked_values(g, m, wrong), contract_error);
}

TEST_CASE("interpolation reproduces constants and ignores invalid support") {
  auto g = grid16();
  SphericalSignal s = make_signal(g);
  s.valid.assign(s.valid.size(), 1);
  s.values.setConstant(3.25);
  Rng rng(4);
  for (int k = 0; k < 500; ++k) {
    const double theta = rng.uniform(0.0, pi);
    const double phi = rng.uniform(0.0, two_pi);
    CHECK(interpolate(s, theta, phi) == doctest::Approx(3.25).epsilon(1e-12));
  }

  // invalidate a random half; constants must survive the renormalization
  for (std::int64_t p = 0; p < g->npix(); ++p) {
    if (rng.uniform() < 0.5) {
      s.valid[static_cast<std::size_t>(p)] = 0;
      s.values[p] = 0.0;
    }
  }
  int fully_invalid = 0;
  for (int k = 0; k < 500; ++k) {
    const double theta = rng.uniform(0.0, pi);
    const double phi = rng.uniform(0.0, two_pi);
    const double v = interpolate(s, theta, phi);
    if (v == 0.0) {
      ++fully_invalid;  // whole support invalid reads as 0
    } else {
      CHECK(v == doctest::Approx(3.25).epsilon(1e-12));
    }
  }
  CHECK(fully_invalid < 250);  // most supports keep at least one valid pixel
}

TEST_CASE("normalize_max rescales to unit peak and rejects flat input") {
  Eigen::VectorXd v(4);
  v << 0.5, 2.0, -1.0, 0.25;
  normalize_max(v);
  CHECK(v.maxCoeff() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(v[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(v[2] == doctest::Approx(-0.5).epsilon(1e-15));

  Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(normalize_max(zero), numeric_error);
  Eigen::VectorXd negative(2);
  negative << -1.0, -0.5;
  CHECK_THROWS_AS(normalize_max(negative), numeric_error);

  auto g = grid16();
  SphericalSignal s = make_signal(g);
  s.valid.assign(s.valid.size(), 1);
  s.values[5] = 4.0;
  s.values[6] = 8.0;
  s.valid[6] = 0;  // invalid pixels do not contribute to the maximum
  s.values[6] = 0.0;
  normalize_max(s);
  CHECK(s.values[5] == doctest::Approx(1.0).epsilon(1e-15));

  SphericalSignal flat = make_signal(g);
  flat.valid.assign(flat.valid.size(), 1);
  CHECK_THROWS_AS(normalize_max(flat), numeric_error);
}

TEST_CASE("quarter-turn rotation is an index permutation that moves features +phi") {
  auto g = grid16();
  SphericalSignal s = make_signal(g);
  Rng rng(21);
  for (std::int64_t p = 0; p < g->npix(); ++p) s.values[p] = rng.uniform(0.0, 1.0);

  SphericalSignal r = rotate_quarter_turns(s, 1);

  // permutation: sorted values identical
  std::vector<double> a(s.values.data(), s.values.data() + s.values.size());
  std::vector<double> b(r.values.data(), r.values.data() + r.values.size());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CHECK(a == b);

  // pointwise: the rotated field at phi equals the original at phi - 90deg
  for (std::int64_t p = 0; p < g->npix(); ++p) {
    double theta, phi;
    g->pix2ang(p, theta, phi);
    CHECK(r.values[p] == s.values[g->ang2pix(theta, phi - half_pi)]);
  }

  // four turns restore the signal; opposite turns cancel
  SphericalSignal r4 = rotate_quarter_turns(
      rotate_quarter_turns(rotate_quarter_turns(r, 1), 1), 1);
  CHECK((r4.values - s.values).cwiseAbs().maxCoeff() == 0.0);
  SphericalSignal back = rotate_quarter_turns(r, -1);
  CHECK((back.values - s.values).cwiseAbs().maxCoeff() == 0.0);

  // valid flags ride along with the values
  SphericalSignal masked = from_masked_values(g, cap_mask(*g, 60.0 * deg),
                                              masked_values(s, cap_mask(*g, 60.0 * deg)));
  SphericalSignal mrot = rotate_quarter_turns(masked, 2);
  std::int64_t nvalid = 0, nvalid_rot = 0;
  for (std::size_t i = 0; i < masked.valid.size(); ++i) {
    nvalid += masked.valid[i];
    nvalid_rot += mrot.valid[i];
  }
  CHECK(nvalid == nvalid_rot);
}

TEST_SUITE_END();
