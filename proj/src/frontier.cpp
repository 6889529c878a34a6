#include "segopt/frontier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "segopt/errors.hpp"
#include "segopt/parallel.hpp"

namespace segopt {

double first_best_welfare(const Market& xstar, const ValueGrid& grid, const CostSpec& cost) {
  double w = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) w += xstar[k] * welfare_at(cost, grid[k], 0.0);
  return w;
}

bool frontier_tight(const Market& xstar, const ValueGrid& grid, const CostSpec& cost, Orientation e) {
  if (e.e1 > 0 && e.e2 > 0) return true;
  if (grid.size() == 2) return true;
  return cost.type() == CostType::Isoelastic && cost.gamma() >= 2.0 && mhr_holds(xstar, grid);
}

FrontierPoint frontier_point(const Market& xstar, const ValueGrid& grid, const CostSpec& cost, double lambda,
                             Orientation e, const SolveOptions& options) {
  if (lambda < 0.0 || lambda > 1.0) throw Error(ErrorKind::PreconditionViolated, "lambda must lie in [0, 1]");
  const auto objective = Objective::scalarized(lambda, e);
  const auto report = solve_bound(xstar, grid, cost, objective, options);
  FrontierPoint p;
  p.lambda = lambda;
  p.e = e;
  p.bound = report.value;
  p.tight = frontier_tight(xstar, grid, cost, e);

  // Accounts implied by the bound's hazard mixture.
  const std::size_t K = grid.size();
  double u = 0.0;
  double w = xstar[K - 1] * welfare_at(cost, grid.top(), 0.0);
  for (std::size_t k = 0; k + 1 < K; ++k) {
    if (!xstar.supported(k)) continue;
    for (const auto& s : report.support[k].support) {
      u += xstar[k] * s.weight * rent_at(cost, grid[k], s.h);
      w += xstar[k] * s.weight * welfare_at(cost, grid[k], s.h);
    }
  }
  p.consumer = u;
  p.profit = w - u;

  if (p.tight) {
    try {
      const auto seg = build_segmentation(report, xstar, grid, cost);
      const auto check = verify_segmentation(seg, xstar, grid, cost, report);
      if (check.all_pass) {
        double pi = 0.0, cs = 0.0;
        for (const auto& s : seg) {
          const auto acc = surplus_accounts(s.market, grid, cost);
          pi += s.weight * acc.profit;
          cs += s.weight * acc.consumer;
        }
        p.profit = pi;
        p.consumer = cs;
        p.verified = true;
      }
    } catch (const Error&) {
      p.verified = false;
    }
  }
  return p;
}

std::vector<FrontierPoint> frontier_sweep(const Market& xstar, const ValueGrid& grid, const CostSpec& cost,
                                          const FrontierOptions& options) {
  const std::size_t n = std::max<std::size_t>(options.lambda_steps, 2);
  const std::size_t total = n * options.orientations.size();
  std::vector<FrontierPoint> out(total);
  parallel_for(total, [&](std::size_t i) {
    const auto e = options.orientations[i / n];
    const double lambda = static_cast<double>(i % n) / static_cast<double>(n - 1);
    out[i] = frontier_point(xstar, grid, cost, lambda, e, options.solve);
  });
  return out;
}

double frontier_concavity_violation(const std::vector<FrontierPoint>& points) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : points) {
    if (p.e.e1 > 0 && p.e.e2 > 0) pts.emplace_back(p.profit, p.consumer);
  }
  std::sort(pts.begin(), pts.end());
  std::vector<std::pair<double, double>> uniq;
  for (const auto& p : pts) {
    if (!uniq.empty() && std::abs(p.first - uniq.back().first) <= 1e-9) {
      uniq.back().second = std::max(uniq.back().second, p.second);
      continue;
    }
    uniq.push_back(p);
  }
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < uniq.size(); ++i) {
    const auto [xa, ya] = uniq[i - 1];
    const auto [xb, yb] = uniq[i];
    const auto [xc, yc] = uniq[i + 1];
    const double chord = ya + (yc - ya) * (xb - xa) / (xc - xa);
    worst = std::max(worst, chord - yb);
  }
  return worst;
}

double containment_violation(const std::vector<FrontierPoint>& points, double profit, double consumer) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& p : points) {
    const double value = p.e.e1 * p.lambda * profit + p.e.e2 * (1.0 - p.lambda) * consumer;
    worst = std::max(worst, value - p.bound);
  }
  return worst;
}

}  // namespace segopt
