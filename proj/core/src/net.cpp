#include "sliodf/net.hpp"

#include <cmath>
#include <cstring>

#include "sliodf/common.hpp"
#include "sliodf/rng.hpp"

namespace sliodf {

Eigen::MatrixXd cheb_conv(const SphereGraph& g, const Eigen::MatrixXd& x, const ChebLayer& layer) {
  require(!layer.theta.empty(), "cheb_conv: empty filter");
  const auto in = layer.theta.front().rows();
  const auto out = layer.theta.front().cols();
  for (const auto& t : layer.theta) {
    require(t.rows() == in && t.cols() == out, "cheb_conv: ragged filter");
  }
  require(x.rows() == g.size() && x.cols() == in, "cheb_conv: input shape mismatch");
  require(layer.bias.size() == out, "cheb_conv: bias size mismatch");

  Eigen::MatrixXd y = x * layer.theta[0];
  if (layer.theta.size() > 1) {
    Eigen::MatrixXd t_prev = x;
    Eigen::MatrixXd t_cur = g.scaled_laplacian * x;
    y += t_cur * layer.theta[1];
    for (std::size_t k = 2; k < layer.theta.size(); ++k) {
      Eigen::MatrixXd t_next = 2.0 * (g.scaled_laplacian * t_cur) - t_prev;
      y += t_next * layer.theta[k];
      t_prev = std::move(t_cur);
      t_cur = std::move(t_next);
    }
  }
  y.rowwise() += layer.bias.transpose();
  return y;
}

LevelPooling make_pooling(const HealpixGrid& fine_grid, const CapMask& fine_mask) {
  require(fine_grid.nside() >= 2, "make_pooling: no coarser level below nside 1");
  require(fine_mask.count() > 0, "make_pooling: empty mask");
  LevelPooling p;
  p.fine = fine_mask;
  const std::int64_t npix_coarse = fine_grid.npix() / 4;
  p.coarse.theta_max = fine_mask.theta_max;
  p.coarse.position.assign(static_cast<std::size_t>(npix_coarse), -1);
  for (std::int64_t cp = 0; cp < npix_coarse; ++cp) {
    std::vector<Eigen::Index> kids;
    for (std::int64_t c = 0; c < 4; ++c) {
      const Eigen::Index pos = fine_mask.position[static_cast<std::size_t>(4 * cp + c)];
      if (pos >= 0) kids.push_back(pos);
    }
    if (kids.empty()) continue;
    p.coarse.position[static_cast<std::size_t>(cp)] =
        static_cast<Eigen::Index>(p.coarse.pixels.size());
    p.coarse.pixels.push_back(cp);
    p.children.push_back(std::move(kids));
  }
  return p;
}

Eigen::MatrixXd pool(const LevelPooling& p, const Eigen::MatrixXd& x_fine) {
  require(x_fine.rows() == static_cast<Eigen::Index>(p.fine.count()),
          "pool: row count mismatch");
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p.coarse.count()),
                                            x_fine.cols());
  for (std::size_t j = 0; j < p.children.size(); ++j) {
    for (Eigen::Index c : p.children[j]) y.row(static_cast<Eigen::Index>(j)) += x_fine.row(c);
    y.row(static_cast<Eigen::Index>(j)) /= static_cast<double>(p.children[j].size());
  }
  return y;
}

Eigen::MatrixXd unpool(const LevelPooling& p, const Eigen::MatrixXd& x_coarse) {
  require(x_coarse.rows() == static_cast<Eigen::Index>(p.coarse.count()),
          "unpool: row count mismatch");
  Eigen::MatrixXd y(static_cast<Eigen::Index>(p.fine.count()), x_coarse.cols());
  for (std::size_t j = 0; j < p.children.size(); ++j) {
    for (Eigen::Index c : p.children[j]) y.row(c) = x_coarse.row(static_cast<Eigen::Index>(j));
  }
  return y;
}

namespace {

Eigen::MatrixXd pool_backward(const LevelPooling& p, const Eigen::MatrixXd& g_coarse) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p.fine.count()),
                                            g_coarse.cols());
  for (std::size_t j = 0; j < p.children.size(); ++j) {
    const double inv = 1.0 / static_cast<double>(p.children[j].size());
    for (Eigen::Index c : p.children[j]) g.row(c) += inv * g_coarse.row(static_cast<Eigen::Index>(j));
  }
  return g;
}

Eigen::MatrixXd unpool_backward(const LevelPooling& p, const Eigen::MatrixXd& g_fine) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p.coarse.count()),
                                            g_fine.cols());
  for (std::size_t j = 0; j < p.children.size(); ++j) {
    for (Eigen::Index c : p.children[j]) g.row(static_cast<Eigen::Index>(j)) += g_fine.row(c);
  }
  return g;
}

std::uint64_t fnv1a(std::uint64_t h, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) {
    h ^= (v >> (8 * b)) & 0xffu;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

SphericalUNet::SphericalUNet(const NetSpec& spec, std::shared_ptr<const HealpixGrid> grid_in,
                             const CapMask& mask_in)
    : spec_(spec) {
  require(spec.nside_in >= 4, "net: input nside must be at least 4");
  require(spec.nside_fodf * 4 == spec.nside_in, "net: fodf nside must be input nside / 4");
  require(spec.cheb_order >= 1, "net: filter order must be positive");
  for (int w : spec.widths) require(w >= 1, "net: channel widths must be positive");
  require(grid_in->nside() == spec.nside_in, "net: grid/spec nside mismatch");

  pool01_ = make_pooling(*grid_in, mask_in);
  auto grid1 = std::make_shared<HealpixGrid>(spec.nside_in / 2);
  pool12_ = make_pooling(*grid1, pool01_.coarse);
  auto grid2 = std::make_shared<HealpixGrid>(spec.nside_in / 4);

  g0_ = build_graph(grid_in, mask_in);
  g1_ = build_graph(grid1, pool01_.coarse);
  g2_ = build_graph(grid2, pool12_.coarse);

  const int w0 = spec.widths[0], w1 = spec.widths[1], w2 = spec.widths[2];
  const std::array<std::array<int, 3>, 10> wiring{{
      {1, w0, 0}, {w0, w0, 0},            // encoder level 0
      {w0, w1, 1}, {w1, w1, 1},           // encoder level 1
      {w1, w2, 2}, {w2, w2, 2},           // bottom
      {w2 + w1, w1, 1}, {w1, w1, 1},      // decoder level 1 (skip concat)
      {w1 + w0, w0, 0}, {w0, w0, 0},      // decoder level 0 (skip concat)
  }};
  Eigen::Index off = 0;
  for (int i = 0; i < 10; ++i) {
    conv_[static_cast<std::size_t>(i)].in = wiring[static_cast<std::size_t>(i)][0];
    conv_[static_cast<std::size_t>(i)].out = wiring[static_cast<std::size_t>(i)][1];
    conv_[static_cast<std::size_t>(i)].graph = wiring[static_cast<std::size_t>(i)][2];
    conv_[static_cast<std::size_t>(i)].theta_off = off;
    off += static_cast<Eigen::Index>(spec.cheb_order) * wiring[static_cast<std::size_t>(i)][0] *
           wiring[static_cast<std::size_t>(i)][1];
    conv_[static_cast<std::size_t>(i)].bias_off = off;
    off += wiring[static_cast<std::size_t>(i)][1];
  }
  head_in_ = static_cast<Eigen::Index>(pool12_.coarse.count()) * w0;
  n_out_ = 12LL * spec.nside_fodf * spec.nside_fodf;
  head_w_off_ = off;
  off += n_out_ * head_in_;
  head_b_off_ = off;
  off += n_out_;
  params_ = Eigen::VectorXd::Zero(off);
}

void SphericalUNet::init_params(std::uint64_t seed) {
  Rng rng(seed);
  params_.setZero();
  for (const ConvDims& cd : conv_) {
    const double a = std::sqrt(6.0 / (static_cast<double>(spec_.cheb_order) * cd.in + cd.out));
    const Eigen::Index n = static_cast<Eigen::Index>(spec_.cheb_order) * cd.in * cd.out;
    for (Eigen::Index i = 0; i < n; ++i) params_[cd.theta_off + i] = rng.uniform(-a, a);
  }
  const double a = std::sqrt(6.0 / (static_cast<double>(head_in_) + static_cast<double>(n_out_)));
  for (Eigen::Index i = 0; i < n_out_ * head_in_; ++i) {
    params_[head_w_off_ + i] = rng.uniform(-a, a);
  }
}

namespace {

double leaky(double v, double s) { return v > 0.0 ? v : s * v; }

}  // namespace

Eigen::MatrixXd SphericalUNet::run_conv(int idx, const Eigen::MatrixXd& x, bool activate) const {
  const ConvDims& cd = conv_[static_cast<std::size_t>(idx)];
  const SphereGraph& g = cd.graph == 0 ? g0_ : cd.graph == 1 ? g1_ : g2_;
  require(x.rows() == g.size() && x.cols() == cd.in, "net conv: shape mismatch");

  const auto theta = [&](int k) {
    return Eigen::Map<const Eigen::MatrixXd>(
        params_.data() + cd.theta_off + static_cast<Eigen::Index>(k) * cd.in * cd.out, cd.in,
        cd.out);
  };
  Eigen::MatrixXd y = x * theta(0);
  if (spec_.cheb_order > 1) {
    Eigen::MatrixXd t_prev = x;
    Eigen::MatrixXd t_cur = g.scaled_laplacian * x;
    y += t_cur * theta(1);
    for (int k = 2; k < spec_.cheb_order; ++k) {
      Eigen::MatrixXd t_next = 2.0 * (g.scaled_laplacian * t_cur) - t_prev;
      y += t_next * theta(k);
      t_prev = std::move(t_cur);
      t_cur = std::move(t_next);
    }
  }
  y.rowwise() +=
      Eigen::Map<const Eigen::VectorXd>(params_.data() + cd.bias_off, cd.out).transpose();
  if (activate) {
    const double s = spec_.leaky_slope;
    y = y.unaryExpr([s](double v) { return leaky(v, s); });
  }
  return y;
}

void SphericalUNet::conv_backward(int idx, const Eigen::MatrixXd& x, const Eigen::MatrixXd& act,
                                  const Eigen::MatrixXd& g_out, bool activated,
                                  Eigen::MatrixXd& g_in, Eigen::VectorXd& g_params) const {
  const ConvDims& cd = conv_[static_cast<std::size_t>(idx)];
  const SphereGraph& g = cd.graph == 0 ? g0_ : cd.graph == 1 ? g1_ : g2_;

  Eigen::MatrixXd grad = g_out;
  if (activated) {
    const double s = spec_.leaky_slope;
    // The activation is sign-preserving, so the output sign recovers the
    // pre-activation sign.
    for (Eigen::Index j = 0; j < grad.cols(); ++j) {
      for (Eigen::Index i = 0; i < grad.rows(); ++i) {
        if (act(i, j) <= 0.0) grad(i, j) *= s;
      }
    }
  }

  Eigen::Map<Eigen::VectorXd>(g_params.data() + cd.bias_off, cd.out) +=
      grad.colwise().sum().transpose();

  const auto theta = [&](int k) {
    return Eigen::Map<const Eigen::MatrixXd>(
        params_.data() + cd.theta_off + static_cast<Eigen::Index>(k) * cd.in * cd.out, cd.in,
        cd.out);
  };
  const auto g_theta = [&](int k) {
    return Eigen::Map<Eigen::MatrixXd>(
        g_params.data() + cd.theta_off + static_cast<Eigen::Index>(k) * cd.in * cd.out, cd.in,
        cd.out);
  };

  // T_k recurrence on the input feeds the filter gradients; the same
  // recurrence on the upstream gradient feeds the input gradient (T_k(L~) is
  // symmetric).
  g_theta(0) += x.transpose() * grad;
  g_in.noalias() = grad * theta(0).transpose();
  if (spec_.cheb_order > 1) {
    Eigen::MatrixXd tx_prev = x;
    Eigen::MatrixXd tx_cur = g.scaled_laplacian * x;
    Eigen::MatrixXd tg_prev = grad;
    Eigen::MatrixXd tg_cur = g.scaled_laplacian * grad;
    g_theta(1) += tx_cur.transpose() * grad;
    g_in.noalias() += tg_cur * theta(1).transpose();
    for (int k = 2; k < spec_.cheb_order; ++k) {
      Eigen::MatrixXd tx_next = 2.0 * (g.scaled_laplacian * tx_cur) - tx_prev;
      Eigen::MatrixXd tg_next = 2.0 * (g.scaled_laplacian * tg_cur) - tg_prev;
      g_theta(k) += tx_next.transpose() * grad;
      g_in.noalias() += tg_next * theta(k).transpose();
      tx_prev = std::move(tx_cur);
      tx_cur = std::move(tx_next);
      tg_prev = std::move(tg_cur);
      tg_cur = std::move(tg_next);
    }
  }
}

Eigen::VectorXd SphericalUNet::forward(const Eigen::VectorXd& x_masked) const {
  Tape tape;
  return forward(x_masked, tape);
}

Eigen::VectorXd SphericalUNet::forward(const Eigen::VectorXd& x_masked, Tape& tape) const {
  require(x_masked.size() == n_inputs(), "net forward: input size mismatch");

  tape.in[0] = x_masked;
  tape.act[0] = run_conv(0, tape.in[0], true);
  tape.in[1] = tape.act[0];
  tape.act[1] = run_conv(1, tape.in[1], true);

  tape.in[2] = pool(pool01_, tape.act[1]);
  tape.act[2] = run_conv(2, tape.in[2], true);
  tape.in[3] = tape.act[2];
  tape.act[3] = run_conv(3, tape.in[3], true);

  tape.in[4] = pool(pool12_, tape.act[3]);
  tape.act[4] = run_conv(4, tape.in[4], true);
  tape.in[5] = tape.act[4];
  tape.act[5] = run_conv(5, tape.in[5], true);

  const Eigen::MatrixXd u1 = unpool(pool12_, tape.act[5]);
  tape.in[6].resize(u1.rows(), u1.cols() + tape.act[3].cols());
  tape.in[6] << u1, tape.act[3];
  tape.act[6] = run_conv(6, tape.in[6], true);
  tape.in[7] = tape.act[6];
  tape.act[7] = run_conv(7, tape.in[7], true);

  const Eigen::MatrixXd u0 = unpool(pool01_, tape.act[7]);
  tape.in[8].resize(u0.rows(), u0.cols() + tape.act[1].cols());
  tape.in[8] << u0, tape.act[1];
  tape.act[8] = run_conv(8, tape.in[8], true);
  tape.in[9] = tape.act[8];
  tape.act[9] = run_conv(9, tape.in[9], true);

  tape.h1 = pool(pool01_, tape.act[9]);
  tape.h2 = pool(pool12_, tape.h1);

  const Eigen::Map<const Eigen::VectorXd> flat(tape.h2.data(), head_in_);
  const Eigen::Map<const Eigen::MatrixXd> w(params_.data() + head_w_off_, n_out_, head_in_);
  const Eigen::Map<const Eigen::VectorXd> b(params_.data() + head_b_off_, n_out_);
  return w * flat + b;
}

void SphericalUNet::backward(const Tape& tape, const Eigen::VectorXd& g_raw,
                             Eigen::VectorXd& g_params) const {
  require(g_raw.size() == n_out_, "net backward: gradient size mismatch");
  require(g_params.size() == params_.size(), "net backward: parameter gradient size mismatch");

  Eigen::Map<Eigen::VectorXd>(g_params.data() + head_b_off_, n_out_) += g_raw;
  const Eigen::Map<const Eigen::VectorXd> flat(tape.h2.data(), head_in_);
  Eigen::Map<Eigen::MatrixXd>(g_params.data() + head_w_off_, n_out_, head_in_).noalias() +=
      g_raw * flat.transpose();

  const Eigen::Map<const Eigen::MatrixXd> w(params_.data() + head_w_off_, n_out_, head_in_);
  const Eigen::VectorXd g_flat = w.transpose() * g_raw;
  const Eigen::MatrixXd g_h2 =
      Eigen::Map<const Eigen::MatrixXd>(g_flat.data(), tape.h2.rows(), tape.h2.cols());

  const Eigen::MatrixXd g_h1 = pool_backward(pool12_, g_h2);
  const Eigen::MatrixXd g_e1 = pool_backward(pool01_, g_h1);

  Eigen::MatrixXd g_e0, g_k0;
  conv_backward(9, tape.in[9], tape.act[9], g_e1, true, g_e0, g_params);
  conv_backward(8, tape.in[8], tape.act[8], g_e0, true, g_k0, g_params);

  const int w0 = spec_.widths[0], w1 = spec_.widths[1], w2 = spec_.widths[2];
  const Eigen::MatrixXd g_d1 = unpool_backward(pool01_, g_k0.leftCols(w1));

  Eigen::MatrixXd g_d0, g_k1;
  conv_backward(7, tape.in[7], tape.act[7], g_d1, true, g_d0, g_params);
  conv_backward(6, tape.in[6], tape.act[6], g_d0, true, g_k1, g_params);

  const Eigen::MatrixXd g_c1 = unpool_backward(pool12_, g_k1.leftCols(w2));

  Eigen::MatrixXd g_c0, g_p2;
  conv_backward(5, tape.in[5], tape.act[5], g_c1, true, g_c0, g_params);
  conv_backward(4, tape.in[4], tape.act[4], g_c0, true, g_p2, g_params);

  const Eigen::MatrixXd g_b1 = pool_backward(pool12_, g_p2) + g_k1.rightCols(w1);

  Eigen::MatrixXd g_b0, g_p1;
  conv_backward(3, tape.in[3], tape.act[3], g_b1, true, g_b0, g_params);
  conv_backward(2, tape.in[2], tape.act[2], g_b0, true, g_p1, g_params);

  const Eigen::MatrixXd g_a1 = pool_backward(pool01_, g_p1) + g_k0.rightCols(w0);

  Eigen::MatrixXd g_a0, g_x;
  conv_backward(1, tape.in[1], tape.act[1], g_a1, true, g_a0, g_params);
  conv_backward(0, tape.in[0], tape.act[0], g_a0, true, g_x, g_params);
}

std::uint64_t SphericalUNet::arch_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  h = fnv1a(h, static_cast<std::uint64_t>(spec_.nside_in));
  h = fnv1a(h, static_cast<std::uint64_t>(spec_.nside_fodf));
  for (int w : spec_.widths) h = fnv1a(h, static_cast<std::uint64_t>(w));
  h = fnv1a(h, static_cast<std::uint64_t>(spec_.cheb_order));
  std::uint64_t slope_bits = 0;
  static_assert(sizeof(double) == 8);
  std::memcpy(&slope_bits, &spec_.leaky_slope, 8);
  h = fnv1a(h, slope_bits);
  h = fnv1a(h, static_cast<std::uint64_t>(pool01_.fine.count()));
  for (std::int64_t p : pool01_.fine.pixels) h = fnv1a(h, static_cast<std::uint64_t>(p));
  return h;
}

TrainResult train(SphericalUNet& net, const std::vector<Eigen::VectorXd>& signals_masked,
                  const KernelBank& bank, const FodfSmoother& smoother, const LossWeights& lw,
                  const TrainConfig& cfg) {
  require(!signals_masked.empty(), "train: empty dataset");
  require(cfg.lr > 0.0 && cfg.batch > 0 && cfg.epochs > 0, "train: config must be positive");
  require(bank.k.rows() == net.n_inputs(), "train: bank mask does not match net input");
  require(2 * bank.k.cols() == net.n_outputs(), "train: bank atoms do not match net output");
  require(smoother.smooth.rows() == bank.k.cols(), "train: smoother/bank atom mismatch");

  const auto n = signals_masked.size();
  std::vector<Eigen::VectorXd> inputs(n);
  for (std::size_t i = 0; i < n; ++i) {
    require(signals_masked[i].size() == net.n_inputs(), "train: signal size mismatch");
    const double m = signals_masked[i].maxCoeff();
    inputs[i] = m > 0.0 ? Eigen::VectorXd(signals_masked[i] / m) : signals_masked[i];
  }

  net.init_params(cfg.seed);
  Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  const Eigen::Index np = net.n_params();
  Eigen::VectorXd g(np), m1 = Eigen::VectorXd::Zero(np), m2 = Eigen::VectorXd::Zero(np);
  SphericalUNet::Tape tape;
  TrainResult res;
  long step = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_sum = 0.0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch)) {
      const std::size_t stop = std::min(n, start + static_cast<std::size_t>(cfg.batch));
      g.setZero();
      for (std::size_t bi = start; bi < stop; ++bi) {
        const std::size_t idx = order[bi];
        const Eigen::VectorXd raw = net.forward(inputs[idx], tape);
        const Eigen::VectorXd w_atoms = fold_axial(smoother, raw);
        const LossBreakdown lb = model_loss(w_atoms, inputs[idx], bank, smoother, lw);
        if (!std::isfinite(lb.l_total)) {
          throw numeric_error("train: non-finite loss at sample " + std::to_string(idx) +
                              " (batch starting at " + std::to_string(start) + ")");
        }
        epoch_sum += lb.l_total;
        const Eigen::VectorXd g_w = loss_gradient(w_atoms, inputs[idx], bank, smoother, lw);
        Eigen::VectorXd g_raw = Eigen::VectorXd::Zero(net.n_outputs());
        for (Eigen::Index a = 0; a < g_w.size(); ++a) {
          g_raw[smoother.atom_pixel[static_cast<std::size_t>(a)]] += 0.5 * g_w[a];
          g_raw[smoother.antipode_pixel[static_cast<std::size_t>(a)]] += 0.5 * g_w[a];
        }
        net.backward(tape, g_raw, g);
      }
      g /= static_cast<double>(stop - start);

      ++step;
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      m1 = cfg.beta1 * m1 + (1.0 - cfg.beta1) * g;
      m2 = cfg.beta2 * m2 + (1.0 - cfg.beta2) * g.cwiseProduct(g).eval();
      net.params() -=
          (cfg.lr * (m1.array() / c1) / ((m2.array() / c2).sqrt() + cfg.eps)).matrix() +
          (cfg.lr * cfg.weight_decay) * net.params();
    }
    res.epoch_loss.push_back(epoch_sum / static_cast<double>(n));
  }
  return res;
}

Fodf predict(const SphericalUNet& net, const ScatteringPattern& pattern,
             const MicroscopeGeometry& geometry, double centroid_sigma,
             const FodfSmoother& smoother) {
  const PatternCentroid c = find_centroid(pattern, centroid_sigma);
  const SphericalSignal s =
      project_to_sphere(pattern, c, geometry, net.input_grid(), net.input_mask());
  Eigen::VectorXd x = masked_values(s, net.input_mask());
  const double m = x.maxCoeff();
  if (m > 0.0) x /= m;
  const Eigen::VectorXd raw = net.forward(x);
  return make_fodf(smoother, fold_axial(smoother, raw));
}

}  // namespace sliodf
