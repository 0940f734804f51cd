#pragma once

#include <memory>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "sliodf/signal.hpp"

namespace sliodf {

// Weighted neighbor graph over the masked-in pixels of a cap. Node order is
// mask order. scaled_laplacian is 2L/(1.02 lambda_max) - I with L = D - W;
// the 2% inflation keeps the spectrum inside [-1, 1] even though lambda_max
// is only a power-iteration estimate.
struct SphereGraph {
  std::shared_ptr<const HealpixGrid> grid;
  CapMask mask;
  Eigen::SparseMatrix<double> adjacency;
  Eigen::SparseMatrix<double> scaled_laplacian;
  double rho = 0.0;
  double lambda_max = 0.0;
  int n_components = 0;

  Eigen::Index size() const { return adjacency.rows(); }
};

// rho <= 0 selects the default: the mean chord length over graph edges.
SphereGraph build_graph(std::shared_ptr<const HealpixGrid> grid, const CapMask& mask,
                        double rho = 0.0);

}  // namespace sliodf
