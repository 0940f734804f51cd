#pragma once

#include <vector>

#include <Eigen/Core>

#include "sliodf/forward_model.hpp"
#include "sliodf/signal.hpp"

namespace sliodf {

struct LossWeights {
  double lambda_r = 1.0;  // Pearson term weight
  double lambda_s = 0.1;  // sparsity weight
  double sigma_s = 0.05;  // Cauchy scale
  // Evaluate sparsity/non-negativity (and the reconstruction) on the
  // band-limited fODF; turn off to ablate with raw atom weights.
  bool smooth_fodf = true;
};

// Pearson correlation over paired samples. Throws numeric_error when either
// side has zero variance; callers that must not fail substitute 0 and flag.
double pcc(const Eigen::VectorXd& a, const Eigen::VectorXd& b);
double pcc(const SphericalSignal& a, const SphericalSignal& b);

struct LossBreakdown {
  double l_r = 0.0;
  double l_s = 0.0;
  double l_n = 0.0;
  double l_total = 0.0;
  double pcc_value = 0.0;
  bool pcc_substituted = false;
};

double reconstruction_loss(const Eigen::VectorXd& s, const Eigen::VectorXd& s_r,
                           const LossWeights& w, double* pcc_out = nullptr,
                           bool* pcc_substituted = nullptr);
double sparsity_loss(const Eigen::VectorXd& fodf, const LossWeights& w);
double nonnegativity_loss(const Eigen::VectorXd& fodf);
LossBreakdown total_loss(const Eigen::VectorXd& s, const Eigen::VectorXd& s_r,
                         const Eigen::VectorXd& fodf, const LossWeights& w);

// Loss of atom weights against a masked signal: fodf = smooth * w (or w when
// smoothing is ablated), model = K * fodf, then total_loss.
LossBreakdown model_loss(const Eigen::VectorXd& w_atoms, const Eigen::VectorXd& s_masked,
                         const KernelBank& bank, const FodfSmoother& smoother,
                         const LossWeights& lw);

// Exact analytic gradient of model_loss with respect to the atom weights.
// Where pcc is undefined the Pearson term contributes nothing, matching the
// substituted loss value.
Eigen::VectorXd loss_gradient(const Eigen::VectorXd& w_atoms, const Eigen::VectorXd& s_masked,
                              const KernelBank& bank, const FodfSmoother& smoother,
                              const LossWeights& lw);

struct SolveOptions {
  int max_iters = 500;
  double step = 0.05;   // initial step, halved on non-decrease
  double tol = 1e-6;    // relative change of total loss
  std::uint64_t seed = 0;  // recorded for provenance; the deterministic init ignores it
};

struct SolveResult {
  Eigen::VectorXd w;
  LossBreakdown loss;
  std::vector<double> trace;  // total loss per accepted iterate, trace[0] = initial
  int iterations = 0;
  bool converged = false;
};

// Projected gradient descent on the non-negative orthant. The input signal is
// divided by its masked maximum first, pairing with max-1 kernels.
SolveResult solve_direct(const Eigen::VectorXd& s_masked, const KernelBank& bank,
                         const FodfSmoother& smoother, const LossWeights& lw,
                         const SolveOptions& opts);
SolveResult solve_direct(const SphericalSignal& s, const KernelBank& bank,
                         const FodfSmoother& smoother, const LossWeights& lw,
                         const SolveOptions& opts);

}  // namespace sliodf
