#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "segopt/market.hpp"

namespace segopt {

// Quality comes in unit increments; increment i costs kappa_i (nondecreasing)
// and sells to every buyer whose value is at least its price rho_i.

struct IncrementalPrices {
  std::vector<double> rho;
  // Increments with kappa_i >= v_K never sell; their price is reported as v_K.
  std::vector<bool> unsold;
  std::vector<double> profit;
};

// Lowest revenue-maximizing grid price per increment.
IncrementalPrices optimal_increment_prices(const Market& m, const ValueGrid& grid, const std::vector<double>& kappa);

// Grid values (indices) at which increment i earns its maximal profit, within
// a relative tolerance of 1e-12.
std::vector<std::vector<std::size_t>> optimal_price_sets(const Market& m, const ValueGrid& grid,
                                                          const std::vector<double>& kappa);

struct PiecewiseParetoSpec {
  std::vector<double> kappa;
  std::vector<double> r;
};

struct ParetoMarket {
  Market market;
  std::vector<double> demand;
  // 0 below r_1, otherwise the region i = max{i : r_i <= v_k} (1-based).
  std::vector<std::size_t> region;
  std::vector<double> A;
  // Cutoffs after snapping to the grid.
  std::vector<double> r;
  bool snapped = false;
};

// Demand 1 below r_1 and A_i / (v - kappa_i) on region i; the top value
// carries the residual mass. Off-grid cutoffs snap to the nearest grid value.
ParetoMarket piecewise_pareto(const ValueGrid& grid, const PiecewiseParetoSpec& spec);

struct ExtremePointResult {
  bool is_extreme = false;
  std::vector<double> r;
};

// Throws NotInPriceRegion when rho is not optimal for m.
ExtremePointResult extreme_point_test(const Market& m, const ValueGrid& grid, const std::vector<double>& rho,
                                      const std::vector<double>& kappa);

// D^x(v_k) <= D_r(v_k) for every k. Requires the optimal prices of x to lie
// weakly below r (PreconditionViolated otherwise).
bool fosd_check(const Market& m, const ValueGrid& grid, const PiecewiseParetoSpec& spec);

// Sum_k x_k Sum_{i : rho_i <= v_k} (v_k - rho_i).
double consumer_surplus_at_prices(const Market& m, const ValueGrid& grid, const std::vector<double>& rho);

struct UnconstrainedOptimum {
  Market market;
  std::vector<double> r;
  std::vector<double> rho;
  double consumer = 0.0;
  std::size_t candidates = 0;
};

inline constexpr std::size_t kSearchCap = 20'000'000;

// Exhaustive search over nondecreasing grid cutoffs r with r_i > kappa_i;
// ties go to the lexicographically smallest r.
UnconstrainedOptimum unconstrained_cs_max(const ValueGrid& grid, const std::vector<double>& kappa);

struct TwoGoodsResult {
  double c = 0.0;
  bool bundles = false;
  double rho1 = 0.0;
  double rho2 = 0.0;
  // Multiplier on rho_1 <= rho_2 at the bundled candidate.
  double mu = 0.0;
  double consumer = 0.0;
  double kkt_residual = 0.0;
  // Continuum threshold on [0, 1], times v_K.
  double c_bar = 0.0;
  // Threshold found by bisection with unconstrained_cs_max on a grid of step delta.
  std::optional<double> c_bar_discrete;
};

// Two increments with costs (0, c) on values in [0, v_top]. delta > 0 adds the
// discrete threshold estimate on the grid delta, 2 delta, ..., v_top.
TwoGoodsResult two_goods_limit(double c, double delta = 0.0, double v_top = 1.0);

// Continuum consumer surplus of the two-increment Pareto market with prices
// rho_1 <= rho_2 on [0, 1].
double two_goods_surplus(double c, double rho1, double rho2);

}  // namespace segopt
