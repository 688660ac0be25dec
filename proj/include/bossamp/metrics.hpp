#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bossamp/model.hpp"

namespace bossamp {

// Figures of merit and the 0.5-contour extraction for phase transitions.

inline constexpr double kSuccessNmseThreshold = 1e-4;

struct RealizationMetrics {
  double nmse = 0.0;
  double fanmse = 0.0;
  int iterations = 0;
  bool success = false;
  std::uint64_t seed = 0;
};

inline double nmse(const VectorXd& x_true, const VectorXd& x_hat) {
  const double denom = x_true.squaredNorm();
  if (!(denom > 0.0)) throw DegenerateSignalError("nmse needs a nonzero reference signal");
  return (x_true - x_hat).squaredNorm() / denom;
}

// Energy of the estimate on the exact-zero support of the reference, relative
// to the reference energy. Generated signals carry exact zeros off-support.
inline double fanmse(const VectorXd& x_true, const VectorXd& x_hat) {
  const double denom = x_true.squaredNorm();
  if (!(denom > 0.0)) throw DegenerateSignalError("fanmse needs a nonzero reference signal");
  double off_support = 0.0;
  for (Index i = 0; i < x_true.size(); ++i)
    if (x_true[i] == 0.0) off_support += x_hat[i] * x_hat[i];
  return off_support / denom;
}

inline bool success_indicator(double nmse_value) {
  if (!(nmse_value >= 0.0)) throw std::invalid_argument("nmse must be nonnegative");
  return nmse_value < kSuccessNmseThreshold;
}

inline double average_success(const std::vector<bool>& indicators) {
  if (indicators.empty()) throw std::invalid_argument("average over an empty set");
  double sum = 0.0;
  for (bool s : indicators) sum += s ? 1.0 : 0.0;
  return sum / static_cast<double>(indicators.size());
}

// --- 0.5 level-set extraction (marching squares) ----------------------------

// Average-success samples on an (undersampling, sparsity) grid:
// values(i, j) is the sample at (xs[i], ys[j]). Axes strictly increasing.
struct SuccessGrid {
  std::vector<double> xs;
  std::vector<double> ys;
  MatrixXd values;
};

using ContourPoint = std::array<double, 2>;
using Polyline = std::vector<ContourPoint>;

namespace detail {

struct SegmentSink {
  std::vector<std::pair<ContourPoint, ContourPoint>> segments;
  void add(const ContourPoint& a, const ContourPoint& b) {
    if (a[0] == b[0] && a[1] == b[1]) return;  // degenerate corner touch
    segments.emplace_back(a, b);
  }
};

// Chains raw segments into ordered polylines. Points are matched bit-exactly:
// both cells adjacent to an edge interpolate the crossing identically.
inline std::vector<Polyline> chain_segments(
    const std::vector<std::pair<ContourPoint, ContourPoint>>& segments) {
  using Key = std::pair<double, double>;
  const auto key = [](const ContourPoint& p) { return Key{p[0], p[1]}; };
  std::map<Key, std::vector<std::size_t>> incident;
  std::vector<Key> point_order;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    for (const auto& p : {segments[s].first, segments[s].second}) {
      auto [it, inserted] = incident.try_emplace(key(p));
      if (inserted) point_order.push_back(it->first);
      it->second.push_back(s);
    }
  }

  std::vector<char> used(segments.size(), 0);
  const auto walk = [&](Key start) {
    Polyline line;
    line.push_back({start.first, start.second});
    Key current = start;
    for (;;) {
      std::size_t next_seg = segments.size();
      for (std::size_t s : incident[current])
        if (!used[s]) {
          next_seg = s;
          break;
        }
      if (next_seg == segments.size()) break;
      used[next_seg] = 1;
      const auto& seg = segments[next_seg];
      const Key a = key(seg.first);
      current = (a == current) ? key(seg.second) : a;
      line.push_back({current.first, current.second});
    }
    return line;
  };

  std::vector<Polyline> polylines;
  for (const Key& p : point_order) {
    std::size_t open = 0;
    for (std::size_t s : incident[p])
      if (!used[s]) ++open;
    if (open == 1) polylines.push_back(walk(p));  // open chain endpoint
  }
  for (std::size_t s = 0; s < segments.size(); ++s)
    if (!used[s]) polylines.push_back(walk(key(segments[s].first)));  // closed loop
  return polylines;
}

}  // namespace detail

// Marching squares at level 0.5 with linear interpolation along cell edges.
// Saddle cells are disambiguated by the average of the four corners. Returns
// ordered polylines in axis coordinates; a grid without crossings yields an
// empty list.
inline std::vector<Polyline> contour_half(const SuccessGrid& grid) {
  constexpr double level = 0.5;
  const Index p = static_cast<Index>(grid.xs.size());
  const Index q = static_cast<Index>(grid.ys.size());
  if (grid.values.rows() != p || grid.values.cols() != q)
    throw std::invalid_argument("grid value shape must match the axes");
  for (std::size_t i = 1; i < grid.xs.size(); ++i)
    if (!(grid.xs[i - 1] < grid.xs[i]))
      throw std::invalid_argument("grid axes must be strictly increasing");
  for (std::size_t j = 1; j < grid.ys.size(); ++j)
    if (!(grid.ys[j - 1] < grid.ys[j]))
      throw std::invalid_argument("grid axes must be strictly increasing");

  detail::SegmentSink sink;
  const auto& v = grid.values;
  for (Index i = 0; i + 1 < p; ++i) {
    for (Index j = 0; j + 1 < q; ++j) {
      const double v00 = v(i, j), v10 = v(i + 1, j);
      const double v11 = v(i + 1, j + 1), v01 = v(i, j + 1);
      const int mask = (v00 >= level ? 1 : 0) | (v10 >= level ? 2 : 0) |
                       (v11 >= level ? 4 : 0) | (v01 >= level ? 8 : 0);
      if (mask == 0 || mask == 15) continue;

      const double x0 = grid.xs[static_cast<std::size_t>(i)];
      const double x1 = grid.xs[static_cast<std::size_t>(i + 1)];
      const double y0 = grid.ys[static_cast<std::size_t>(j)];
      const double y1 = grid.ys[static_cast<std::size_t>(j + 1)];
      const auto lerp = [level](double a, double b, double va, double vb) {
        return a + (level - va) / (vb - va) * (b - a);
      };
      const ContourPoint bottom{lerp(x0, x1, v00, v10), y0};
      const ContourPoint top{lerp(x0, x1, v01, v11), y1};
      const ContourPoint left{x0, lerp(y0, y1, v00, v01)};
      const ContourPoint right{x1, lerp(y0, y1, v10, v11)};

      switch (mask) {
        case 1: case 14: sink.add(left, bottom); break;
        case 2: case 13: sink.add(bottom, right); break;
        case 3: case 12: sink.add(left, right); break;
        case 4: case 11: sink.add(right, top); break;
        case 6: case 9: sink.add(bottom, top); break;
        case 7: case 8: sink.add(left, top); break;
        case 5:
          if (0.25 * (v00 + v10 + v11 + v01) >= level) {
            sink.add(bottom, right);
            sink.add(top, left);
          } else {
            sink.add(left, bottom);
            sink.add(right, top);
          }
          break;
        case 10:
          if (0.25 * (v00 + v10 + v11 + v01) >= level) {
            sink.add(left, bottom);
            sink.add(right, top);
          } else {
            sink.add(bottom, right);
            sink.add(top, left);
          }
          break;
        default: break;
      }
    }
  }
  return detail::chain_segments(sink.segments);
}

}  // namespace bossamp
