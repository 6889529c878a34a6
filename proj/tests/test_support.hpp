#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "segopt/market.hpp"

namespace segopt::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

// Flat Dirichlet draw with every entry at least `floor` before renormalizing.
inline Market random_market(Rng& rng, std::size_t K, double floor = 1e-3) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> x(K);
  double s = 0.0;
  for (auto& v : x) {
    v = e(rng) + floor;
    s += v;
  }
  for (auto& v : x) v /= s;
  return Market{x};
}

// Increasing values with gaps in [0.25, 1.5] starting in [0.5, 2].
inline ValueGrid random_grid(Rng& rng, std::size_t K) {
  std::vector<double> v(K);
  v[0] = uniform(rng, 0.5, 2.0);
  for (std::size_t k = 1; k < K; ++k) v[k] = v[k - 1] + uniform(rng, 0.25, 1.5);
  return ValueGrid(v);
}

// A random feasible segmentation of x built by repeated two-way splits.
inline Segmentation random_segmentation(Rng& rng, const Market& x, std::size_t pieces) {
  Segmentation seg{{1.0, x}};
  for (std::size_t p = 1; p < pieces; ++p) {
    std::size_t idx = std::uniform_int_distribution<std::size_t>(0, seg.size() - 1)(rng);
    const Segment s = seg[idx];
    const Market y = random_market(rng, x.size(), 0.0);
    double tmax = 1.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (y[k] > 0.0) tmax = std::min(tmax, s.market[k] / y[k]);
    }
    const double t = uniform(rng, 0.0, 0.999) * tmax;
    if (t <= 1e-9) continue;
    std::vector<double> z(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) z[k] = std::max(0.0, (s.market[k] - t * y[k]) / (1.0 - t));
    double zs = 0.0;
    for (double v : z) zs += v;
    for (double& v : z) v /= zs;
    seg[idx] = {s.weight * t, y};
    seg.push_back({s.weight * (1.0 - t), Market{z}});
  }
  return seg;
}

}  // namespace segopt::testing
