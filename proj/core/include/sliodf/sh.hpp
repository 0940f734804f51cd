#pragma once

#include <Eigen/Core>

#include "sliodf/signal.hpp"

namespace sliodf {

// Real, fully normalized spherical harmonics restricted to even degrees
// (antipodally symmetric functions). Coefficient ordering: l = 0, 2, ..., l_max
// ascending, m = -l ... +l within each degree.
//   Y_{l,0}  = N_{l,0} P_l(cos theta)
//   Y_{l,m>0} = sqrt(2) N_{l,m} P_l^m(cos theta) cos(m phi)
//   Y_{l,m<0} = sqrt(2) N_{l,|m|} P_l^{|m|}(cos theta) sin(|m| phi)
// with N the orthonormalization constant and P the associated Legendre
// functions (Condon-Shortley phase included).

int sh_coeff_count(int l_max);

double sh_eval(int l, int m, double theta, double phi);

// All basis values at one direction, in coefficient order.
Eigen::VectorXd sh_basis_row(double theta, double phi, int l_max);

// Rows follow mask order when a mask is given, otherwise all pixels in
// ascending index order. Throws if there are fewer rows than coefficients.
Eigen::MatrixXd sh_basis_matrix(const HealpixGrid& grid, const CapMask* mask, int l_max);

// Minimum-norm least-squares coefficients (rank-revealing factorization).
Eigen::VectorXd sh_fit(const Eigen::MatrixXd& basis, const Eigen::VectorXd& y);

}  // namespace sliodf
