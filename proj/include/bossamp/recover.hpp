#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bossamp/denoise.hpp"
#include "bossamp/model.hpp"

namespace bossamp {

// Iterative recovery: AMP (soft thresholding), BAMP (Bayesian MMSE denoiser)
// and the structured variants with extrinsic group / prior updates.

struct StoppingRule {
  double eps_tol = 1e-4;
  int t_max = 100;
};

struct TrajectoryPoint {
  double nmse = 0.0;
  double beta = 0.0;
};

struct RecoveryResult {
  VectorXd x_hat;
  int iterations = 0;
  bool converged = false;
  std::vector<TrajectoryPoint> trajectory;  // filled only when tracing is on
};

// Test and instrumentation knobs. `onsager = false` drops the residual
// correction term (used by regression tests only).
struct SolverHooks {
  bool onsager = true;
  const VectorXd* trace_truth = nullptr;        // enables (nmse, beta) trajectory
  std::vector<VectorXd>* iterate_log = nullptr; // records every x^t
};

struct DivergenceError : std::runtime_error {
  explicit DivergenceError(int t)
      : std::runtime_error("solver diverged: non-finite state at iteration " + std::to_string(t)),
        iteration(t) {}
  int iteration;
};

// L-values: log P(zero)/P(nonzero). Positive favors zero.

inline VectorXd innovation_l_binary(const VectorXd& u, double beta) {
  return (1.0 - 2.0 * u.array()) / (2.0 * beta);
}

inline VectorXd innovation_l_gauss(const VectorXd& u, double beta, double sigma_x_sq) {
  const double log_ratio = 0.5 * std::log((beta + sigma_x_sq) / beta);
  const double curvature = 0.5 * sigma_x_sq / (beta * (beta + sigma_x_sq));
  return log_ratio - curvature * u.array().square();
}

inline VectorXd innovation_l_generic(const VectorXd& u, double beta,
                                     const NonzeroDensity& density) {
  VectorXd l(u.size());
  for (Index i = 0; i < u.size(); ++i) {
    const auto moments = generic_posterior(u[i], beta, 0.5, density);
    l[i] = log_normal_pdf(u[i], beta) - moments.log_conv_density;
  }
  return l;
}

// E-step responsibilities of the zero component for the Gaussian mixture of
// decoupled measurements.
inline VectorXd responsibilities(const VectorXd& u, double beta, double sigma_x_sq,
                                 const VectorXd& gamma_prev) {
  VectorXd out(u.size());
  for (Index i = 0; i < u.size(); ++i) {
    const double g = clamp_gamma(gamma_prev[i]);
    const double log_zero = std::log(g) + log_normal_pdf(u[i], beta);
    const double log_nonzero = std::log1p(-g) + log_normal_pdf(u[i], beta + sigma_x_sq);
    out[i] = detail::clamp_unit_open(logistic(log_zero - log_nonzero));
  }
  return out;
}

namespace detail {

// L-bar = prior L-value + extrinsic sum over groupmates. The own term is
// excluded from the sum itself (not subtracted afterwards) so that L-bar_n is
// bit-exactly independent of u_n; overlapping mates are counted once.
inline VectorXd accumulate_extrinsic(const VectorXd& innovations, const VectorXd& gamma0,
                                     const GroupStructure& groups) {
  const Index n = gamma0.size();
  VectorXd lbar(n);
  for (Index i = 0; i < n; ++i) lbar[i] = logit(clamp_gamma(gamma0[i]));
  if (groups.is_partition()) {
    for (const auto& group : groups.groups()) {
      for (Index i : group) {
        double extrinsic = 0.0;
        for (Index l : group)
          if (l != i) extrinsic += innovations[l];
        lbar[i] += extrinsic;
      }
    }
  } else {
    for (Index i = 0; i < n; ++i)
      for (Index mate : groups.mates(i)) lbar[i] += innovations[mate];
  }
  return lbar;
}

inline VectorXd innovations_for_prior(const SignalPrior& prior, const VectorXd& u, double beta) {
  switch (prior.kind) {
    case PriorKind::SparseBinary:
      return innovation_l_binary(u, beta);
    case PriorKind::SparseGaussian:
      return innovation_l_gauss(u, beta, prior.sigma_x_sq);
    default:
      return innovation_l_generic(u, beta, prior.nonzero_density);
  }
}

}  // namespace detail

inline VectorXd group_update_binary(const VectorXd& u, double beta, const VectorXd& gamma0,
                                    const GroupStructure& groups) {
  return detail::accumulate_extrinsic(innovation_l_binary(u, beta), gamma0, groups);
}

inline VectorXd group_update_gauss(const VectorXd& u, double beta, const VectorXd& gamma0,
                                   double sigma_x_sq, const GroupStructure& groups) {
  return detail::accumulate_extrinsic(innovation_l_gauss(u, beta, sigma_x_sq), gamma0, groups);
}

inline VectorXd group_update_generic(const VectorXd& u, double beta, const VectorXd& gamma0,
                                     const SignalPrior& prior, const GroupStructure& groups) {
  return detail::accumulate_extrinsic(detail::innovations_for_prior(prior, u, beta), gamma0,
                                      groups);
}

// Saturation bound for accumulated L-values; the sigmoid is flat beyond it.
inline constexpr double kLBarMax = 500.0;

inline VectorXd prior_update(const VectorXd& lbar) {
  VectorXd gamma(lbar.size());
  for (Index i = 0; i < lbar.size(); ++i) {
    const double l = std::min(std::max(lbar[i], -kLBarMax), kLBarMax);
    gamma[i] = clamp_gamma(logistic(l));
  }
  return gamma;
}

namespace detail {

inline double beta_floor_for(const VectorXd& y, Index m) {
  return 1e-12 * (y.squaredNorm() / static_cast<double>(m) + 1.0);
}

inline void check_dimensions(const VectorXd& y, const SensingMatrix& a) {
  if (y.size() != a.m()) throw std::invalid_argument("y length must match sensing matrix rows");
}

inline double traced_nmse(const VectorXd& truth, const VectorXd& x) {
  const double denom = truth.squaredNorm();
  return denom > 0.0 ? (truth - x).squaredNorm() / denom : 0.0;
}

// One BAMP block update. Writes the new estimate into xnew and advances the
// residual; the caller owns stopping and the gamma schedule. The residual is
// always accumulated in the same order so that runs are bit-reproducible.
struct BlockState {
  VectorXd x, r, u, xnew;
  double beta = 0.0;
};

inline void bamp_step(BlockState& st, const VectorXd& y, const SensingMatrix& a,
                      const SignalPrior& prior, const VectorXd& gamma, double beta_floor,
                      bool onsager) {
  const Index m = a.m();
  st.u.noalias() = a.entries.transpose() * st.r;
  st.u += st.x;
  st.beta = std::max(st.r.squaredNorm() / static_cast<double>(m), beta_floor);
  const double slope_sum = posterior_mean_and_slope_sum(prior, st.u, st.beta, gamma, st.xnew);
  const double correction = onsager ? slope_sum / static_cast<double>(m) : 0.0;
  st.r *= correction;
  st.r.noalias() -= a.entries * st.xnew;
  st.r += y;
}

// Entries whose extrinsic set is empty (singleton groups) carry no incoming
// soft information; their zero probability is pinned to the anchor instead of
// round-tripping through logit/sigmoid, which keeps the map exact.
inline std::vector<char> empty_extrinsic_mask(const GroupStructure& groups) {
  std::vector<char> mask(static_cast<std::size_t>(groups.n()), 0);
  for (Index i = 0; i < groups.n(); ++i)
    if (groups.mates(i).empty()) mask[static_cast<std::size_t>(i)] = 1;
  return mask;
}

template <class GammaUpdate>
RecoveryResult message_passing_loop(const VectorXd& y, const SensingMatrix& a,
                                    const SignalPrior& prior, const StoppingRule& stop,
                                    const SolverHooks& hooks, GammaUpdate&& update_gamma) {
  check_dimensions(y, a);
  if (prior.gamma0.size() != a.n())
    throw std::invalid_argument("gamma0 length must match sensing matrix columns");
  if (!(stop.eps_tol > 0.0) || stop.t_max < 1)
    throw std::invalid_argument("stopping rule needs eps_tol > 0 and t_max >= 1");

  const double beta_floor = beta_floor_for(y, a.m());
  BlockState st;
  st.x = VectorXd::Zero(a.n());
  st.r = y;
  VectorXd gamma = prior.gamma0;

  RecoveryResult result;
  int t = 0;
  bool keep_going = true;
  do {
    ++t;
    bamp_step(st, y, a, prior, gamma, beta_floor, hooks.onsager);
    if (!st.xnew.allFinite() || !st.r.allFinite()) throw DivergenceError(t);
    update_gamma(st.u, st.beta, gamma);
    const double dx = (st.xnew - st.x).norm();
    const double x_norm = st.x.norm();
    st.x.swap(st.xnew);
    if (hooks.trace_truth)
      result.trajectory.push_back({traced_nmse(*hooks.trace_truth, st.x), st.beta});
    if (hooks.iterate_log) hooks.iterate_log->push_back(st.x);
    result.converged = !(dx > stop.eps_tol * x_norm);
    keep_going = !result.converged && t < stop.t_max;
  } while (keep_going);

  result.x_hat = std::move(st.x);
  result.iterations = t;
  return result;
}

}  // namespace detail

// NMSE-minimizing threshold weight heuristic for n around 1000.
inline double default_amp_lambda(Index k) {
  return 2.678 * std::pow(static_cast<double>(std::max<Index>(k, 1)), -0.181);
}

// AMP with residual-scaled threshold tau = (lambda/sqrt(M)) * ||r||.
inline RecoveryResult amp(const VectorXd& y, const SensingMatrix& a, double lambda,
                          const StoppingRule& stop, const SolverHooks& hooks = {}) {
  detail::check_dimensions(y, a);
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (!(stop.eps_tol > 0.0) || stop.t_max < 1)
    throw std::invalid_argument("stopping rule needs eps_tol > 0 and t_max >= 1");

  const Index m = a.m();
  const Index n = a.n();
  const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));
  VectorXd x = VectorXd::Zero(n);
  VectorXd r = y;
  VectorXd u(n), xnew(n);

  RecoveryResult result;
  int t = 0;
  bool keep_going = true;
  do {
    ++t;
    const double tau = lambda * inv_sqrt_m * r.norm();
    u.noalias() = a.entries.transpose() * r;
    u += x;
    Index support = 0;
    for (Index i = 0; i < n; ++i) {
      xnew[i] = soft_threshold(u[i], tau);
      if (xnew[i] != 0.0) ++support;
    }
    const double b = hooks.onsager
                         ? static_cast<double>(support) / static_cast<double>(m)
                         : 0.0;
    r *= b;
    r.noalias() -= a.entries * xnew;
    r += y;
    if (!xnew.allFinite() || !r.allFinite()) throw DivergenceError(t);
    const double dx = (xnew - x).norm();
    const double x_norm = x.norm();
    x.swap(xnew);
    if (hooks.trace_truth)
      result.trajectory.push_back({detail::traced_nmse(*hooks.trace_truth, x),
                                   r.squaredNorm() / static_cast<double>(m)});
    if (hooks.iterate_log) hooks.iterate_log->push_back(x);
    result.converged = !(dx > stop.eps_tol * x_norm);
    keep_going = !result.converged && t < stop.t_max;
  } while (keep_going);

  result.x_hat = std::move(x);
  result.iterations = t;
  return result;
}

// BAMP: the Bayesian MMSE denoiser replaces soft thresholding; the zero
// probabilities stay at their prior values throughout.
inline RecoveryResult bamp(const VectorXd& y, const SensingMatrix& a, const SignalPrior& prior,
                           const StoppingRule& stop, const SolverHooks& hooks = {}) {
  return detail::message_passing_loop(y, a, prior, stop, hooks,
                                      [](const VectorXd&, double, VectorXd&) {});
}

// BAMP plus, per iteration, the extrinsic group update (anchored on gamma0)
// followed by the prior update.
inline RecoveryResult bossamp_group(const VectorXd& y, const SensingMatrix& a,
                                    const SignalPrior& prior, const GroupStructure& groups,
                                    const StoppingRule& stop, const SolverHooks& hooks = {}) {
  if (groups.n() != a.n())
    throw std::invalid_argument("group structure must cover the signal dimension");
  const auto anchored = detail::empty_extrinsic_mask(groups);
  const bool all_anchored =
      std::all_of(anchored.begin(), anchored.end(), [](char c) { return c != 0; });
  const VectorXd gamma_anchor = prior.gamma0;
  return detail::message_passing_loop(
      y, a, prior, stop, hooks,
      [&](const VectorXd& u, double beta, VectorXd& gamma) {
        if (all_anchored) return;  // no group carries extrinsic information
        VectorXd lbar = detail::accumulate_extrinsic(
            detail::innovations_for_prior(prior, u, beta), gamma_anchor, groups);
        gamma = prior_update(lbar);
        for (Index i = 0; i < gamma.size(); ++i)
          if (anchored[static_cast<std::size_t>(i)]) gamma[i] = gamma_anchor[i];
      });
}

// Jointly sparse recovery: a BAMP iteration per block, then the collective
// extrinsic update across blocks at every index, then the prior update.
// Stopping tests the concatenation of all block estimates.
inline std::vector<RecoveryResult> bossamp_joint(const std::vector<VectorXd>& ys,
                                                 const std::vector<SensingMatrix>& as,
                                                 const SignalPrior& prior,
                                                 const StoppingRule& stop,
                                                 const SolverHooks& hooks = {}) {
  const Index blocks = static_cast<Index>(ys.size());
  if (blocks < 1) throw std::invalid_argument("need at least one measurement block");
  if (as.empty() || (as.size() != 1 && static_cast<Index>(as.size()) != blocks))
    throw std::invalid_argument("pass one shared sensing matrix or one per block");
  const auto matrix_for = [&](Index b) -> const SensingMatrix& {
    return as[as.size() == 1 ? 0 : static_cast<std::size_t>(b)];
  };
  const Index m = matrix_for(0).m();
  const Index n = matrix_for(0).n();
  for (Index b = 0; b < blocks; ++b) {
    if (matrix_for(b).m() != m || matrix_for(b).n() != n)
      throw std::invalid_argument("all blocks must share the same dimensions");
    if (ys[static_cast<std::size_t>(b)].size() != m)
      throw std::invalid_argument("measurement length must match sensing matrix rows");
  }
  if (prior.gamma0.size() != n)
    throw std::invalid_argument("gamma0 length must match sensing matrix columns");
  if (!(stop.eps_tol > 0.0) || stop.t_max < 1)
    throw std::invalid_argument("stopping rule needs eps_tol > 0 and t_max >= 1");

  std::vector<detail::BlockState> states(static_cast<std::size_t>(blocks));
  std::vector<double> beta_floors(static_cast<std::size_t>(blocks));
  MatrixXd gamma(n, blocks);
  for (Index b = 0; b < blocks; ++b) {
    auto& st = states[static_cast<std::size_t>(b)];
    st.x = VectorXd::Zero(n);
    st.r = ys[static_cast<std::size_t>(b)];
    beta_floors[static_cast<std::size_t>(b)] = detail::beta_floor_for(st.r, m);
    gamma.col(b) = prior.gamma0;
  }
  VectorXd l0(n);
  for (Index i = 0; i < n; ++i) l0[i] = logit(prior.gamma0[i]);

  MatrixXd innovations(n, blocks);
  int t = 0;
  bool converged = false;
  bool keep_going = true;
  do {
    ++t;
    for (Index b = 0; b < blocks; ++b) {
      auto& st = states[static_cast<std::size_t>(b)];
      VectorXd gamma_b = gamma.col(b);
      detail::bamp_step(st, ys[static_cast<std::size_t>(b)], matrix_for(b), prior, gamma_b,
                        beta_floors[static_cast<std::size_t>(b)], hooks.onsager);
      if (!st.xnew.allFinite() || !st.r.allFinite()) throw DivergenceError(t);
      if (blocks > 1)
        innovations.col(b) = detail::innovations_for_prior(prior, st.u, st.beta);
    }
    if (blocks > 1) {
      for (Index b = 0; b < blocks; ++b) {
        for (Index i = 0; i < n; ++i) {
          double extrinsic = 0.0;
          for (Index l_blk = 0; l_blk < blocks; ++l_blk)
            if (l_blk != b) extrinsic += innovations(i, l_blk);
          const double l = std::min(std::max(l0[i] + extrinsic, -kLBarMax), kLBarMax);
          gamma(i, b) = clamp_gamma(logistic(l));
        }
      }
    }
    double dx_sq = 0.0;
    double x_sq = 0.0;
    for (auto& st : states) {
      dx_sq += (st.xnew - st.x).squaredNorm();
      x_sq += st.x.squaredNorm();
      st.x.swap(st.xnew);
    }
    const double dx = std::sqrt(dx_sq);
    const double x_norm = std::sqrt(x_sq);
    converged = !(dx > stop.eps_tol * x_norm);
    keep_going = !converged && t < stop.t_max;
  } while (keep_going);

  std::vector<RecoveryResult> results(static_cast<std::size_t>(blocks));
  for (Index b = 0; b < blocks; ++b) {
    auto& res = results[static_cast<std::size_t>(b)];
    res.x_hat = std::move(states[static_cast<std::size_t>(b)].x);
    res.iterations = t;
    res.converged = converged;
  }
  return results;
}

// Combined update for jointly sparse blocks that each carry the same group
// structure: the extrinsic double sum runs over groupmates i != n and blocks
// j != b only.
inline MatrixXd group_update_joint_group(const MatrixXd& u, const VectorXd& betas,
                                         const MatrixXd& gamma0, const GroupStructure& groups,
                                         const SignalPrior& prior) {
  const Index n = u.rows();
  const Index blocks = u.cols();
  if (betas.size() != blocks || gamma0.rows() != n || gamma0.cols() != blocks)
    throw std::invalid_argument("inconsistent joint group update dimensions");
  if (groups.n() != n)
    throw std::invalid_argument("group structure must cover the signal dimension");

  MatrixXd innovations(n, blocks);
  for (Index b = 0; b < blocks; ++b)
    innovations.col(b) = detail::innovations_for_prior(prior, u.col(b), betas[b]);

  MatrixXd lbar(n, blocks);
  for (Index b = 0; b < blocks; ++b) {
    for (Index i = 0; i < n; ++i) {
      double extrinsic = 0.0;
      for (Index mate : groups.mates(i))
        for (Index j = 0; j < blocks; ++j)
          if (j != b) extrinsic += innovations(mate, j);
      lbar(i, b) = logit(clamp_gamma(gamma0(i, b))) + extrinsic;
    }
  }
  return lbar;
}

}  // namespace bossamp
