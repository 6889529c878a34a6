#include "segopt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "segopt/errors.hpp"
#include "segopt/parallel.hpp"
#include "segopt/screening.hpp"
#include "segopt/seg_solver.hpp"

namespace segopt {

NoSegTester::NoSegTester(const ValueGrid& grid, const CostSpec& cost, std::size_t h_grid) : grid_(grid), cost_(cost) {
  for (std::size_t k = 0; k + 1 < grid.size(); ++k)
    env_.push_back(concavify(rent_curve(cost, grid, k, CurveKind::Rent, 0.0, {}, h_grid, {})));
}

NoSegResult NoSegTester::operator()(const Market& xstar) const {
  if (xstar.size() != grid_.size())
    throw Error(ErrorKind::PreconditionViolated, "market and value grid differ in size");
  const std::size_t K = grid_.size();
  const auto st = local_stats(xstar, grid_);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  NoSegResult r;
  r.gap.assign(K - 1, nan);
  r.slope.assign(K - 1, nan);
  for (std::size_t k = 0; k + 1 < K; ++k) {
    if (!xstar.supported(k)) continue;
    const double h = st.hazard[k];
    const auto q = envelope_query(env_[k], h);
    const double u = rent_at(cost_, grid_[k], h);
    r.gap[k] = q.value - u;
    // Between samples a touching curve lies above the chord; use its own slope.
    r.slope[k] = (cost_.smooth() && r.gap[k] < kTouchTol) ? env_[k].obj.right_derivative(h) : q.slope_right;
  }
  for (std::size_t k = 0; k + 1 < K; ++k) {
    if (xstar.supported(k) && r.gap[k] >= kTouchTol) {
      r.condition = "touching";
      r.index = k;
      return r;
    }
  }
  double prev = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < K; ++k) {
    if (!xstar.supported(k)) continue;
    if (r.slope[k] < prev - kTouchTol) {
      r.condition = "slope";
      r.index = k;
      return r;
    }
    prev = r.slope[k];
  }
  r.in_O = true;
  return r;
}

NoSegResult no_seg_test(const Market& xstar, const ValueGrid& grid, const CostSpec& cost) {
  return NoSegTester(grid, cost)(xstar);
}

std::size_t QualityReport::dispersed_count(double eps) const {
  return static_cast<std::size_t>(std::count_if(dispersion.begin(), dispersion.end(), [&](double d) { return d > eps; }));
}

bool QualityReport::dispersion_bound_holds(double eps) const {
  return static_cast<double>(dispersed_count(eps)) <= q_max / eps + 1e-12;
}

QualityReport quality_report(const Segmentation& seg, const ValueGrid& grid, const CostSpec& cost) {
  const std::size_t K = grid.size();
  QualityReport r;
  r.q_max = efficient_quality(cost, grid.top());
  const auto shape = mc_shape(cost, grid);
  for (std::size_t k = 0; k + 1 < K; ++k) r.q_floor.push_back(cost.supply(grid[k] - shape.hbar[k]));

  std::vector<double> lo(K, std::numeric_limits<double>::infinity());
  std::vector<double> hi(K, -std::numeric_limits<double>::infinity());
  Market aggregate{std::vector<double>(K, 0.0)};
  for (const auto& s : seg) {
    const auto& x = s.market;
    if (x.size() != K) throw Error(ErrorKind::PreconditionViolated, "segment and value grid differ in size");
    const auto menu = optimal_menu(x, grid, cost);
    const auto st = local_stats(x, grid);
    std::vector<std::optional<double>> q(K), eta(K - 1);
    for (std::size_t k = 0; k < K; ++k) {
      aggregate.x[k] += s.weight * x[k];
      if (!x.supported(k)) continue;
      q[k] = menu.q[k];
      lo[k] = std::min(lo[k], menu.q[k]);
      hi[k] = std::max(hi[k], menu.q[k]);
      if (k + 1 < K && st.hazard[k] > 0.0) eta[k] = grid[k] / st.hazard[k];
    }
    r.q.push_back(std::move(q));
    r.eta.push_back(std::move(eta));
  }
  r.dispersion.assign(K, 0.0);
  std::optional<std::size_t> prev;
  for (std::size_t k = 0; k < K; ++k) {
    if (hi[k] < lo[k]) continue;
    r.dispersion[k] = hi[k] - lo[k];
    if (prev && hi[*prev] > lo[k] + kMonotoneTol && r.monotone) {
      r.monotone = false;
      r.monotone_violation = *prev;
    }
    prev = k;
  }

  if (cost.type() == CostType::Isoelastic && K >= 2 && mhr_holds(aggregate, grid)) {
    const auto st = local_stats(aggregate, grid);
    std::size_t cut = K - 1;
    for (std::size_t k = 0; k + 1 < K; ++k) {
      if (st.hazard[k] <= shape.hbar[k] + 1e-12 * std::max(1.0, grid[k])) {
        cut = k;
        break;
      }
    }
    r.cutoff = cut;
    const double below = cost.gamma() / (cost.gamma() - 1.0);
    double err = 0.0;
    for (const auto& eta : r.eta) {
      for (std::size_t k = 0; k + 1 < K; ++k) {
        if (!eta[k]) continue;
        const double target = k < cut ? below : grid[k] / st.hazard[k];
        err = std::max(err, std::abs(*eta[k] - target));
      }
    }
    r.iso_max_error = err;
    r.iso_pattern = err <= kIsoPatternTol;
  }
  return r;
}

OSetScan o_set_scan(const ValueGrid& grid, const CostSpec& cost, std::size_t den) {
  if (grid.size() != 3) throw Error(ErrorKind::PreconditionViolated, "simplex scans need exactly three values");
  if (den == 0) throw Error(ErrorKind::PreconditionViolated, "mesh denominator must be positive");
  const NoSegTester tester(grid, cost);
  OSetScan scan;
  scan.den = den;
  for (std::size_t i = 0; i <= den; ++i) {
    for (std::size_t j = 0; i + j <= den; ++j) {
      scan.points.push_back({static_cast<double>(i) / den, static_cast<double>(j) / den, false});
    }
  }
  parallel_for(scan.points.size(), [&](std::size_t n) {
    auto& p = scan.points[n];
    const double x3 = std::max(0.0, 1.0 - p.x1 - p.x2);
    p.in_O = tester(Market{{p.x1, p.x2, x3}}).in_O;
  });
  for (const auto& p : scan.points) scan.in_count += p.in_O ? 1 : 0;
  return scan;
}

std::size_t nesting_violations(const OSetScan& inner, const OSetScan& outer) {
  if (inner.den != outer.den || inner.points.size() != outer.points.size())
    throw Error(ErrorKind::PreconditionViolated, "scans use different meshes");
  std::size_t n = 0;
  for (std::size_t i = 0; i < inner.points.size(); ++i) n += (inner.points[i].in_O && !outer.points[i].in_O) ? 1 : 0;
  return n;
}

}  // namespace segopt
