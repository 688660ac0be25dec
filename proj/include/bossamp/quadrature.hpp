#pragma once

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace bossamp {

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace quad {

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule
// (QUADPACK qk15 constants).
inline constexpr double kNodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

inline constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

template <class F>
Segment gauss_kronrod_15(const F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double f_center = f(center);
  double kronrod = kKronrodWeights[7] * f_center;
  double gauss = kGaussWeights[3] * f_center;
  for (int i = 0; i < 7; ++i) {
    const double offset = half * kNodes[i];
    const double sum = f(center - offset) + f(center + offset);
    kronrod += kKronrodWeights[i] * sum;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * sum;
  }
  kronrod *= half;
  gauss *= half;
  return Segment{a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace quad

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int segments = 0;
};

// Globally adaptive Gauss-Kronrod integration with an absolute tolerance.
// Splits the worst segment until the summed error estimate drops below the
// tolerance; throws NumericError with diagnostics if the budget runs out.
template <class F>
QuadratureResult integrate_adaptive(const F& f, const std::vector<double>& breakpoints,
                                    double abs_tol, int max_segments = 4000) {
  if (breakpoints.size() < 2) throw std::invalid_argument("need at least one interval");
  std::priority_queue<quad::Segment> segments;
  double value = 0.0;
  double error = 0.0;
  int count = 0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (!(breakpoints[i] < breakpoints[i + 1])) continue;
    const auto seg = quad::gauss_kronrod_15(f, breakpoints[i], breakpoints[i + 1]);
    value += seg.value;
    error += seg.error;
    segments.push(seg);
    ++count;
  }
  while (error > abs_tol && !segments.empty()) {
    if (count >= max_segments)
      throw NumericError("adaptive quadrature did not converge: error estimate " +
                         std::to_string(error) + " after " + std::to_string(count) +
                         " segments (tolerance " + std::to_string(abs_tol) + ")");
    const quad::Segment worst = segments.top();
    segments.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(worst.a < mid && mid < worst.b)) continue;  // interval exhausted in double precision
    const auto left = quad::gauss_kronrod_15(f, worst.a, mid);
    const auto right = quad::gauss_kronrod_15(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    segments.push(left);
    segments.push(right);
    ++count;
  }
  return QuadratureResult{value, error, count};
}

template <class F>
QuadratureResult integrate_adaptive(const F& f, double a, double b, double abs_tol,
                                    int max_segments = 4000) {
  return integrate_adaptive(f, std::vector<double>{a, b}, abs_tol, max_segments);
}

}  // namespace bossamp
