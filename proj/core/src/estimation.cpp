#include "sliodf/estimation.hpp"

#include <cmath>

#include "sliodf/common.hpp"

namespace sliodf {

double pcc(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  require(a.size() == b.size(), "pcc: size mismatch");
  require(a.size() >= 2, "pcc: need at least two samples");
  const Eigen::VectorXd ac = a.array() - a.mean();
  const Eigen::VectorXd bc = b.array() - b.mean();
  const double na = ac.norm(), nb = bc.norm();
  if (na == 0.0 || nb == 0.0) throw numeric_error("pcc: zero variance input");
  return std::clamp(ac.dot(bc) / (na * nb), -1.0, 1.0);
}

double pcc(const SphericalSignal& a, const SphericalSignal& b) {
  require(a.grid->nside() == b.grid->nside(), "pcc: grid mismatch");
  std::vector<double> va, vb;
  for (std::int64_t p = 0; p < a.grid->npix(); ++p) {
    if (a.valid[p] && b.valid[p]) {
      va.push_back(a.values[p]);
      vb.push_back(b.values[p]);
    }
  }
  return pcc(Eigen::Map<const Eigen::VectorXd>(va.data(), static_cast<Eigen::Index>(va.size())),
             Eigen::Map<const Eigen::VectorXd>(vb.data(), static_cast<Eigen::Index>(vb.size())));
}

double reconstruction_loss(const Eigen::VectorXd& s, const Eigen::VectorXd& s_r,
                           const LossWeights& w, double* pcc_out, bool* pcc_substituted) {
  require(s.size() == s_r.size(), "reconstruction_loss: size mismatch");
  double rho = 0.0;
  bool substituted = false;
  try {
    rho = pcc(s, s_r);
  } catch (const numeric_error&) {
    substituted = true;
  }
  if (pcc_out) *pcc_out = rho;
  if (pcc_substituted) *pcc_substituted = substituted;
  return (s - s_r).squaredNorm() + w.lambda_r * (1.0 - rho);
}

double sparsity_loss(const Eigen::VectorXd& fodf, const LossWeights& w) {
  require(w.sigma_s > 0.0, "sparsity_loss: sigma_s must be positive");
  const double inv = 1.0 / (2.0 * w.sigma_s * w.sigma_s);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < fodf.size(); ++i) sum += std::log1p(fodf[i] * fodf[i] * inv);
  return w.lambda_s * sum;
}

double nonnegativity_loss(const Eigen::VectorXd& fodf) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < fodf.size(); ++i) {
    if (fodf[i] < 0.0) sum += fodf[i] * fodf[i];
  }
  return sum;
}

LossBreakdown total_loss(const Eigen::VectorXd& s, const Eigen::VectorXd& s_r,
                         const Eigen::VectorXd& fodf, const LossWeights& w) {
  LossBreakdown out;
  out.l_r = reconstruction_loss(s, s_r, w, &out.pcc_value, &out.pcc_substituted);
  out.l_s = sparsity_loss(fodf, w);
  out.l_n = nonnegativity_loss(fodf);
  out.l_total = out.l_r + out.l_s + out.l_n;
  return out;
}

LossBreakdown model_loss(const Eigen::VectorXd& w_atoms, const Eigen::VectorXd& s_masked,
                         const KernelBank& bank, const FodfSmoother& smoother,
                         const LossWeights& lw) {
  const Eigen::VectorXd fodf = lw.smooth_fodf ? Eigen::VectorXd(smoother.smooth * w_atoms) : w_atoms;
  return total_loss(s_masked, bank.k * fodf, fodf, lw);
}

Eigen::VectorXd loss_gradient(const Eigen::VectorXd& w_atoms, const Eigen::VectorXd& s_masked,
                              const KernelBank& bank, const FodfSmoother& smoother,
                              const LossWeights& lw) {
  const Eigen::VectorXd fodf = lw.smooth_fodf ? Eigen::VectorXd(smoother.smooth * w_atoms) : w_atoms;
  const Eigen::VectorXd s_r = bank.k * fodf;
  const Eigen::VectorXd resid = s_r - s_masked;

  Eigen::VectorXd d_sr = 2.0 * resid;
  const Eigen::VectorXd sc = s_masked.array() - s_masked.mean();
  const Eigen::VectorXd rc = s_r.array() - s_r.mean();
  const double ns = sc.norm(), nr = rc.norm();
  if (ns > 0.0 && nr > 0.0) {
    const double rho = std::clamp(sc.dot(rc) / (ns * nr), -1.0, 1.0);
    // d(1 - pcc)/d s_r = -grad pcc; the centering projector is a no-op here.
    d_sr -= lw.lambda_r * (sc / (ns * nr) - rho * rc / (nr * nr));
  }

  const double inv = 1.0 / (2.0 * lw.sigma_s * lw.sigma_s);
  Eigen::VectorXd d_fodf = bank.k.transpose() * d_sr;
  for (Eigen::Index i = 0; i < fodf.size(); ++i) {
    d_fodf[i] += lw.lambda_s * (2.0 * inv * fodf[i]) / (1.0 + fodf[i] * fodf[i] * inv);
    if (fodf[i] < 0.0) d_fodf[i] += 2.0 * fodf[i];
  }
  return lw.smooth_fodf ? Eigen::VectorXd(smoother.smooth.transpose() * d_fodf) : d_fodf;
}

SolveResult solve_direct(const Eigen::VectorXd& s_masked, const KernelBank& bank,
                         const FodfSmoother& smoother, const LossWeights& lw,
                         const SolveOptions& opts) {
  require(opts.max_iters > 0 && opts.step > 0.0 && opts.tol > 0.0,
          "solve_direct: options must be positive");
  require(s_masked.size() == bank.k.rows(), "solve_direct: signal/bank size mismatch");

  Eigen::VectorXd s = s_masked;
  normalize_max(s);

  SolveResult res;
  res.w = Eigen::VectorXd::Constant(bank.k.cols(), 1e-3);
  double cur = model_loss(res.w, s, bank, smoother, lw).l_total;
  res.trace.push_back(cur);

  double step = opts.step;
  for (int it = 0; it < opts.max_iters; ++it) {
    const Eigen::VectorXd g = loss_gradient(res.w, s, bank, smoother, lw);
    Eigen::VectorXd cand;
    double next = cur;
    double trial = step;
    bool improved = false;
    while (trial > 1e-14) {
      cand = (res.w - trial * g).cwiseMax(0.0);
      next = model_loss(cand, s, bank, smoother, lw).l_total;
      if (next < cur) {
        improved = true;
        break;
      }
      trial *= 0.5;
    }
    if (!improved) {
      res.converged = true;
      break;
    }
    // the accepted step seeds the next search but may recover toward the base
    step = std::min(opts.step, 2.0 * trial);
    res.w = cand;
    res.iterations = it + 1;
    res.trace.push_back(next);
    if (std::abs(cur - next) <= opts.tol * std::max(1.0, std::abs(cur))) {
      res.converged = true;
      cur = next;
      break;
    }
    cur = next;
  }
  res.loss = model_loss(res.w, s, bank, smoother, lw);
  return res;
}

SolveResult solve_direct(const SphericalSignal& s, const KernelBank& bank,
                         const FodfSmoother& smoother, const LossWeights& lw,
                         const SolveOptions& opts) {
  return solve_direct(masked_values(s, bank.mask), bank, smoother, lw, opts);
}

}  // namespace sliodf
