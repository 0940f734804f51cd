#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "sliodf/estimation.hpp"
#include "sliodf/forward_model.hpp"
#include "sliodf/graph.hpp"
#include "sliodf/projection.hpp"

namespace sliodf {

// One Chebyshev spectral filter: y = sum_k T_k(L~) x theta[k] + bias.
struct ChebLayer {
  std::vector<Eigen::MatrixXd> theta;  // order matrices, each in x out
  Eigen::VectorXd bias;                // out
};

Eigen::MatrixXd cheb_conv(const SphereGraph& g, const Eigen::MatrixXd& x, const ChebLayer& layer);

// Parent/child index maps between a cap and the derived cap one level
// coarser. A coarse pixel is included when any of its four children is.
struct LevelPooling {
  CapMask fine;
  CapMask coarse;
  std::vector<std::vector<Eigen::Index>> children;  // coarse node -> fine nodes
};

LevelPooling make_pooling(const HealpixGrid& fine_grid, const CapMask& fine_mask);

Eigen::MatrixXd pool(const LevelPooling& p, const Eigen::MatrixXd& x_fine);
Eigen::MatrixXd unpool(const LevelPooling& p, const Eigen::MatrixXd& x_coarse);

struct NetSpec {
  int nside_in = 16;
  int nside_fodf = 4;  // must equal nside_in / 4
  std::array<int, 3> widths{16, 32, 64};
  int cheb_order = 5;
  double leaky_slope = 0.1;
};

// Three-level encoder/decoder over nested caps with skip connections, plus a
// dense head reading the twice-pooled decoder output into raw fODF samples on
// the full fodf-resolution sphere.
class SphericalUNet {
 public:
  SphericalUNet(const NetSpec& spec, std::shared_ptr<const HealpixGrid> grid_in,
                const CapMask& mask_in);

  const NetSpec& spec() const { return spec_; }
  const CapMask& input_mask() const { return pool01_.fine; }
  std::shared_ptr<const HealpixGrid> input_grid() const { return g0_.grid; }
  Eigen::Index n_inputs() const { return static_cast<Eigen::Index>(pool01_.fine.count()); }
  Eigen::Index n_outputs() const { return n_out_; }
  Eigen::Index n_params() const { return params_.size(); }

  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  // Fan-scaled uniform filter weights, zero biases. Deterministic in seed.
  void init_params(std::uint64_t seed);

  struct Tape {
    std::array<Eigen::MatrixXd, 10> in;   // per-conv input
    std::array<Eigen::MatrixXd, 10> act;  // per-conv activated output
    Eigen::MatrixXd h1, h2;               // head pooling stages
  };

  Eigen::VectorXd forward(const Eigen::VectorXd& x_masked) const;
  Eigen::VectorXd forward(const Eigen::VectorXd& x_masked, Tape& tape) const;

  // Accumulates d loss / d params into g_params (sized n_params, zeroed by
  // the caller), given d loss / d raw output.
  void backward(const Tape& tape, const Eigen::VectorXd& g_raw,
                Eigen::VectorXd& g_params) const;

  // Identifies the architecture (spec fields + input mask) for checkpoints.
  std::uint64_t arch_hash() const;

 private:
  struct ConvDims {
    int in = 0, out = 0;
    Eigen::Index theta_off = 0, bias_off = 0;
    int graph = 0;  // 0, 1, 2
  };

  Eigen::MatrixXd run_conv(int idx, const Eigen::MatrixXd& x, bool activate) const;
  void conv_backward(int idx, const Eigen::MatrixXd& x, const Eigen::MatrixXd& act,
                     const Eigen::MatrixXd& g_out, bool activated, Eigen::MatrixXd& g_in,
                     Eigen::VectorXd& g_params) const;

  NetSpec spec_;
  SphereGraph g0_, g1_, g2_;
  LevelPooling pool01_, pool12_;
  std::array<ConvDims, 10> conv_;
  Eigen::Index head_w_off_ = 0, head_b_off_ = 0, head_in_ = 0, n_out_ = 0;
  Eigen::VectorXd params_;
};

struct TrainConfig {
  double lr = 0.01;
  int batch = 32;
  int epochs = 15;
  double weight_decay = 0.01;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainResult {
  std::vector<double> epoch_loss;  // mean total loss per epoch
};

// Unsupervised training: each signal is max-normalized, pushed through the
// net, folded to atom weights, and scored with model_loss; AdamW with
// decoupled weight decay updates after every batch. Deterministic in
// cfg.seed (fixed shuffle and init, sequential reduction).
TrainResult train(SphericalUNet& net, const std::vector<Eigen::VectorXd>& signals_masked,
                  const KernelBank& bank, const FodfSmoother& smoother, const LossWeights& lw,
                  const TrainConfig& cfg);

// Pattern -> fODF without touching the reconstruction model.
Fodf predict(const SphericalUNet& net, const ScatteringPattern& pattern,
             const MicroscopeGeometry& geometry, double centroid_sigma,
             const FodfSmoother& smoother);

}  // namespace sliodf
