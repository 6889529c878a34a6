#pragma once

#include <cstddef>
#include <vector>

#include "segopt/cost.hpp"
#include "segopt/envelope.hpp"
#include "segopt/market.hpp"
#include "segopt/seg_solver.hpp"

namespace segopt {

struct FrontierPoint {
  double lambda = 0.0;
  Orientation e{};
  double profit = 0.0;
  double consumer = 0.0;
  double bound = 0.0;
  // The bound is attained by some segmentation.
  bool tight = false;
  // A segmentation was built and passed verification; (profit, consumer)
  // are then its achieved accounts.
  bool verified = false;
};

struct FrontierOptions {
  std::size_t lambda_steps = 101;
  std::vector<Orientation> orientations{{1, 1}, {-1, 1}, {1, -1}, {-1, -1}};
  SolveOptions solve{};
};

// Sum_k x*_k w_k(0): every type served its efficient quality.
double first_best_welfare(const Market& xstar, const ValueGrid& grid, const CostSpec& cost);

// True when the scalarized bound for (e, lambda) is known to be attained.
bool frontier_tight(const Market& xstar, const ValueGrid& grid, const CostSpec& cost, Orientation e);

FrontierPoint frontier_point(const Market& xstar, const ValueGrid& grid, const CostSpec& cost, double lambda,
                             Orientation e, const SolveOptions& options = {});

// Points ordered by orientation (as given) and then by ascending lambda.
std::vector<FrontierPoint> frontier_sweep(const Market& xstar, const ValueGrid& grid, const CostSpec& cost,
                                          const FrontierOptions& options = {});

// Largest violation of concavity of the e = (+1,+1) boundary traced in order
// of lambda; points closer than 1e-9 are merged first.
double frontier_concavity_violation(const std::vector<FrontierPoint>& points);

// Largest excess of e1 lambda Pi + e2 (1 - lambda) U over any point's bound;
// nonpositive (up to rounding) when (Pi, U) is inside the swept region.
double containment_violation(const std::vector<FrontierPoint>& points, double profit, double consumer);

}  // namespace segopt
