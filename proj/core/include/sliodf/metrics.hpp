#pragma once

#include <Eigen/Core>

namespace sliodf {

// Angular correlation of two even-SH coefficient vectors: normalized inner
// product excluding degree 0, which carries no angular information. Throws
// numeric_error when either input has no angular content.
double acc(const Eigen::VectorXd& sh_a, const Eigen::VectorXd& sh_b);

// Jensen-Shannon divergence of the distributions obtained by clamping
// negatives to zero and normalizing to unit mass; natural log, <= ln 2.
// Throws numeric_error on zero mass.
double jsd(const Eigen::VectorXd& fodf_a, const Eigen::VectorXd& fodf_b);

}  // namespace sliodf
