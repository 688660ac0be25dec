#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "bossamp/model.hpp"
#include "bossamp/quadrature.hpp"

namespace bossamp {

// Scalar MMSE denoisers for the decoupled measurement u = x + noise(beta).
// F is the posterior mean, G the conditional variance, F' = G / beta.

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Inputs of one scalar denoiser evaluation.
struct DenoiserInput {
  double u = 0.0;
  double beta = 1.0;
  double gamma = 0.5;
  double sigma_x_sq = 1.0;
};

inline double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

inline double log_normal_pdf(double x, double variance) {
  return -0.5 * (kLog2Pi + std::log(variance)) - x * x / (2.0 * variance);
}

inline double soft_threshold(double u, double tau) {
  if (u < -tau) return u + tau;
  if (u > tau) return u - tau;
  return 0.0;
}

inline double f_binary(double u, double beta, double gamma);
inline double f_gauss(double u, double beta, double gamma, double sigma_x_sq);

inline double f_binary(const DenoiserInput& in) { return f_binary(in.u, in.beta, in.gamma); }
inline double f_gauss(const DenoiserInput& in) {
  return f_gauss(in.u, in.beta, in.gamma, in.sigma_x_sq);
}

// --- sparse binary prior: gamma*delta(x) + (1-gamma)*delta(x-1) ------------

namespace detail {
// Saturation keeps F inside (0,1) so that log-ratios stay finite.
inline double clamp_unit_open(double f) {
  constexpr double lo = std::numeric_limits<double>::min();
  constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon();
  return std::min(std::max(f, lo), hi);
}
}  // namespace detail

inline double f_binary(double u, double beta, double gamma) {
  gamma = clamp_gamma(gamma);
  const double s = (1.0 - 2.0 * u) / (2.0 * beta) + logit(gamma);
  return detail::clamp_unit_open(logistic(-s));
}

inline double g_binary(double u, double beta, double gamma) {
  const double f = f_binary(u, beta, gamma);
  return f - f * f;
}

inline double fprime_binary(double u, double beta, double gamma) {
  return g_binary(u, beta, gamma) / beta;
}

// --- sparse Gaussian (Bernoulli-Gaussian) prior -----------------------------

namespace detail {

// Shared pieces of the Bernoulli-Gaussian denoiser. `gain` is the factor M in
// F = u*M; `mix` is the auxiliary m (posterior zero/nonzero odds).
struct GaussParts {
  double mix;
  double gain;
  double mean;
};

inline GaussParts gauss_parts(double u, double beta, double gamma, double sigma_x_sq) {
  gamma = clamp_gamma(gamma);
  const double q = sigma_x_sq / beta;
  const double shrink = q / (1.0 + q);
  const double log_mix = logit(gamma) + 0.5 * std::log1p(q) - (u * u / (2.0 * beta)) * shrink;
  // exp cap keeps every downstream product finite even for extreme inputs
  const double mix = std::exp(std::min(log_mix, 345.0));
  const double gain = shrink / (1.0 + mix);
  return GaussParts{mix, gain, u * gain};
}

}  // namespace detail

inline double f_gauss(double u, double beta, double gamma, double sigma_x_sq) {
  return detail::gauss_parts(u, beta, gamma, sigma_x_sq).mean;
}

// Closed-form variance surrogate beta*M + m. Note the trailing m is the raw
// mixture odds, not the spread of the posterior mean; the exact conditional
// variance equals beta * f_gauss_slope and the two disagree wherever m is not
// negligible. Kept as the published closed form; solvers use f_gauss_slope.
inline double g_gauss(double u, double beta, double gamma, double sigma_x_sq) {
  const auto parts = detail::gauss_parts(u, beta, gamma, sigma_x_sq);
  return beta * parts.gain + parts.mix;
}

inline double fprime_gauss(double u, double beta, double gamma, double sigma_x_sq) {
  return g_gauss(u, beta, gamma, sigma_x_sq) / beta;
}

// Exact derivative d/du of f_gauss; equals the true conditional variance
// divided by beta. This is the slope the message passing loop needs.
inline double f_gauss_slope(double u, double beta, double gamma, double sigma_x_sq) {
  const auto parts = detail::gauss_parts(u, beta, gamma, sigma_x_sq);
  return parts.gain + parts.mean * parts.mean * parts.mix / beta;
}

// --- generic sparse prior: gamma*delta(x) + (1-gamma)*f_a(x) ----------------

struct PosteriorMoments {
  double mean = 0.0;
  double variance = 0.0;
  double log_conv_density = 0.0;  // log f_{a*w}(u), density of u given x nonzero
};

namespace detail {

inline std::vector<double> convolution_breakpoints(double u, double beta, double lo, double hi) {
  const double sigma = std::sqrt(beta);
  std::vector<double> pts;
  const double span = 42.0 * sigma;
  double a = std::max(lo, u - span);
  double b = std::min(hi, u + span);
  if (!(a < b)) {
    // Continuous support lies entirely outside the +-42 sigma window; keep a
    // token interval at the nearest support edge so the integral is ~0.
    a = std::min(std::max(lo, u - span), hi);
    b = std::min(a + sigma, hi);
    if (!(a < b)) {
      a = std::max(hi - sigma, lo);
      b = hi;
    }
  }
  pts.push_back(a);
  for (double k : {-8.0, -3.0, -1.0, 0.0, 1.0, 3.0, 8.0}) {
    const double p = u + k * sigma;
    if (p > a && p < b) pts.push_back(p);
  }
  const double mid = 0.5 * (lo + hi);
  if (std::isfinite(mid) && mid > a && mid < b) pts.push_back(mid);
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  return pts;
}

}  // namespace detail

// Posterior mean/variance of x given u under the generic sparse prior,
// computed by adaptive Gauss-Kronrod convolution (absolute tolerance 1e-9).
inline PosteriorMoments generic_posterior(double u, double beta, double gamma,
                                          const NonzeroDensity& density,
                                          double abs_tol = 1e-9) {
  gamma = clamp_gamma(gamma);
  double conv0 = 0.0, conv1 = 0.0, conv2 = 0.0;
  if (density.pdf) {
    const auto pts = detail::convolution_breakpoints(u, beta, density.lower, density.upper);
    const auto kernel = [&](double x) {
      return density.pdf(x) * std::exp(log_normal_pdf(u - x, beta));
    };
    conv0 = integrate_adaptive(kernel, pts, abs_tol).value;
    conv1 = integrate_adaptive([&](double x) { return x * kernel(x); }, pts, abs_tol).value;
    conv2 = integrate_adaptive([&](double x) { return x * x * kernel(x); }, pts, abs_tol).value;
  }
  for (const auto& [location, mass] : density.atoms) {
    const double w = mass * std::exp(log_normal_pdf(u - location, beta));
    conv0 += w;
    conv1 += w * location;
    conv2 += w * location * location;
  }
  conv0 = std::max(conv0, 0.0);

  const double p_zero = gamma * std::exp(log_normal_pdf(u, beta));
  const double p_nonzero = (1.0 - gamma) * conv0;
  const double denom = p_zero + p_nonzero;
  PosteriorMoments out;
  out.log_conv_density =
      conv0 > 0.0 ? std::log(conv0) : std::log(std::numeric_limits<double>::denorm_min());
  if (denom <= 0.0) return out;  // both hypotheses underflowed; zero-dominated
  const double scale = (1.0 - gamma) / denom;
  out.mean = scale * conv1;
  out.variance = std::max(scale * conv2 - out.mean * out.mean, 0.0);
  return out;
}

inline double f_generic(double u, double beta, double gamma, const NonzeroDensity& density) {
  return generic_posterior(u, beta, gamma, density).mean;
}

inline double g_generic(double u, double beta, double gamma, const NonzeroDensity& density) {
  return generic_posterior(u, beta, gamma, density).variance;
}

// --- vector kernel shared by the solvers ------------------------------------

// Fills x_out with the posterior mean of each entry and returns the summed
// slope d/du of the posterior mean (the residual-correction numerator).
inline double posterior_mean_and_slope_sum(const SignalPrior& prior, const VectorXd& u,
                                           double beta, const VectorXd& gamma, VectorXd& x_out) {
  const Index n = u.size();
  x_out.resize(n);
  double slope_sum = 0.0;
  switch (prior.kind) {
    case PriorKind::SparseBinary:
      for (Index i = 0; i < n; ++i) {
        const double f = f_binary(u[i], beta, gamma[i]);
        x_out[i] = f;
        slope_sum += (f - f * f) / beta;
      }
      break;
    case PriorKind::SparseGaussian:
      for (Index i = 0; i < n; ++i) {
        const auto parts = detail::gauss_parts(u[i], beta, gamma[i], prior.sigma_x_sq);
        x_out[i] = parts.mean;
        slope_sum += parts.gain + parts.mean * parts.mean * parts.mix / beta;
      }
      break;
    case PriorKind::Generic:
      for (Index i = 0; i < n; ++i) {
        const auto moments = generic_posterior(u[i], beta, gamma[i], prior.nonzero_density);
        x_out[i] = moments.mean;
        slope_sum += moments.variance / beta;
      }
      break;
  }
  return slope_sum;
}

}  // namespace bossamp
