#include "sliodf/graph.hpp"

#include <cmath>
#include <vector>

#include "sliodf/common.hpp"

namespace sliodf {

SphereGraph build_graph(std::shared_ptr<const HealpixGrid> grid, const CapMask& mask,
                        double rho) {
  require(mask.count() > 0, "build_graph: empty mask");
  SphereGraph g;
  g.grid = grid;
  g.mask = mask;
  const Eigen::Index n = static_cast<Eigen::Index>(mask.count());

  struct Edge {
    Eigen::Index i, j;
    double dist2;
  };
  std::vector<Edge> edges;
  std::array<std::int64_t, 8> nb{};
  double chord_sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::int64_t p = mask.pixels[static_cast<std::size_t>(i)];
    const Eigen::Vector3d xi = grid->pix2vec(p);
    const int cnt = grid->neighbors(p, nb);
    for (int k = 0; k < cnt; ++k) {
      const std::int64_t q = nb[static_cast<std::size_t>(k)];
      const Eigen::Index j = mask.position[static_cast<std::size_t>(q)];
      if (j < 0 || j <= i) continue;
      const double d2 = (xi - grid->pix2vec(q)).squaredNorm();
      edges.push_back({i, j, d2});
      chord_sum += std::sqrt(d2);
    }
  }

  if (rho <= 0.0) rho = edges.empty() ? 1.0 : chord_sum / static_cast<double>(edges.size());
  g.rho = rho;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(edges.size() * 2);
  Eigen::VectorXd degree = Eigen::VectorXd::Zero(n);
  for (const Edge& e : edges) {
    const double w = std::exp(-e.dist2 / (2.0 * rho * rho));
    trip.emplace_back(e.i, e.j, w);
    trip.emplace_back(e.j, e.i, w);
    degree[e.i] += w;
    degree[e.j] += w;
  }
  g.adjacency.resize(n, n);
  g.adjacency.setFromTriplets(trip.begin(), trip.end());

  Eigen::SparseMatrix<double> lap(n, n);
  {
    std::vector<Eigen::Triplet<double>> lt;
    lt.reserve(trip.size() + static_cast<std::size_t>(n));
    for (const Edge& e : edges) {
      const double w = std::exp(-e.dist2 / (2.0 * rho * rho));
      lt.emplace_back(e.i, e.j, -w);
      lt.emplace_back(e.j, e.i, -w);
    }
    for (Eigen::Index i = 0; i < n; ++i) lt.emplace_back(i, i, degree[i]);
    lap.setFromTriplets(lt.begin(), lt.end());
  }

  // Power iteration, fixed 100 steps, deterministic non-degenerate start.
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = std::sin(static_cast<double>(i + 1));
  v.normalize();
  for (int it = 0; it < 100; ++it) {
    Eigen::VectorXd u = lap * v;
    const double nu = u.norm();
    if (nu < 1e-300) break;
    v = u / nu;
  }
  g.lambda_max = v.dot(lap * v);

  const double scale = g.lambda_max > 1e-12 ? 2.0 / (1.02 * g.lambda_max) : 0.0;
  Eigen::SparseMatrix<double> ident(n, n);
  ident.setIdentity();
  g.scaled_laplacian = scale * lap - ident;

  // Component count over the undirected edge structure.
  std::vector<int> comp(static_cast<std::size_t>(n), -1);
  std::vector<std::vector<Eigen::Index>> adj_list(static_cast<std::size_t>(n));
  for (const Edge& e : edges) {
    adj_list[static_cast<std::size_t>(e.i)].push_back(e.j);
    adj_list[static_cast<std::size_t>(e.j)].push_back(e.i);
  }
  int nc = 0;
  std::vector<Eigen::Index> stack;
  for (Eigen::Index s = 0; s < n; ++s) {
    if (comp[static_cast<std::size_t>(s)] >= 0) continue;
    stack.push_back(s);
    comp[static_cast<std::size_t>(s)] = nc;
    while (!stack.empty()) {
      const Eigen::Index u = stack.back();
      stack.pop_back();
      for (Eigen::Index w : adj_list[static_cast<std::size_t>(u)]) {
        if (comp[static_cast<std::size_t>(w)] < 0) {
          comp[static_cast<std::size_t>(w)] = nc;
          stack.push_back(w);
        }
      }
    }
    ++nc;
  }
  g.n_components = nc;
  return g;
}

}  // namespace sliodf
