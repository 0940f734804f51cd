#include "sliodf/metrics.hpp"

#include <cmath>

#include "sliodf/common.hpp"

namespace sliodf {

double acc(const Eigen::VectorXd& sh_a, const Eigen::VectorXd& sh_b) {
  require(sh_a.size() == sh_b.size(), "acc: coefficient count mismatch");
  require(sh_a.size() >= 2, "acc: inputs have no angular terms");
  const auto a = sh_a.tail(sh_a.size() - 1);
  const auto b = sh_b.tail(sh_b.size() - 1);
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw numeric_error("acc: zero angular content");
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

namespace {

Eigen::VectorXd to_distribution(const Eigen::VectorXd& v, const char* who) {
  Eigen::VectorXd p = v.cwiseMax(0.0);
  const double mass = p.sum();
  if (mass <= 0.0) throw numeric_error(std::string(who) + ": zero mass");
  return p / mass;
}

}  // namespace

double jsd(const Eigen::VectorXd& fodf_a, const Eigen::VectorXd& fodf_b) {
  require(fodf_a.size() == fodf_b.size(), "jsd: size mismatch");
  const Eigen::VectorXd p = to_distribution(fodf_a, "jsd");
  const Eigen::VectorXd q = to_distribution(fodf_b, "jsd");
  double d = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) d += 0.5 * p[i] * std::log(p[i] / m);
    if (q[i] > 0.0) d += 0.5 * q[i] * std::log(q[i] / m);
  }
  return std::min(d, std::log(2.0));
}

}  // namespace sliodf
