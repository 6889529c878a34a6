#pragma once

#include <cstddef>
#include <vector>

#include "segopt/cost.hpp"
#include "segopt/market.hpp"
#include "segopt/screening.hpp"
#include "segopt/seg_solver.hpp"

namespace segopt {

// Brute-force references. Nothing here shares code with the envelope solver:
// menus come from enumeration and segmentations from direct search.

inline constexpr double kDefaultQStep = 1.0 / 200.0;
inline constexpr double kMinQStep = 1.0 / 400.0;

// Best nondecreasing allocation on the quality grid {0, q_step, 2 q_step, ...}
// up to the top value's efficient quality, priced by binding local downward
// constraints; ties go to higher quality. For isoelastic costs each pooled
// block is then moved to its exact optimum when that keeps the allocation
// monotone and does not lower profit.
Menu brute_menu(const Market& m, const ValueGrid& grid, const CostSpec& cost, double q_step = kDefaultQStep);

// Accounts of m under brute_menu.
SurplusAccounts brute_accounts(const Market& m, const ValueGrid& grid, const CostSpec& cost,
                               double q_step = kDefaultQStep);

struct BruteSegmentResult {
  double value = 0.0;
  Segmentation segmentation;
  std::size_t candidates = 0;
};

// Searches segmentations whose markets lie on the simplex mesh {i * mesh}
// (plus x* itself). K = 2 enumerates pairs; K = 3 solves the weight program
// over all candidates exactly, which needs max_segments >= 3.
BruteSegmentResult brute_segment(const Market& xstar, const ValueGrid& grid, const CostSpec& cost, double mesh,
                                 std::size_t max_segments = 3, const Objective& objective = Objective::consumer(),
                                 double q_step = kDefaultQStep);

struct CalibrationInstance {
  Market xstar;
  ValueGrid grid;
};

struct SlackModel {
  // slack(mesh) = C * mesh.
  double C = 0.0;
  double coarse = 1.0 / 32.0;
  double fine = 1.0 / 64.0;
  double safety = 3.0;
  // Richardson limit 2 V(fine) - V(coarse) per calibration instance.
  std::vector<double> extrapolated;

  double slack(double mesh) const { return C * mesh; }
};

// Fits C from the change in brute_segment values between the two mesh levels
// (first-order Richardson model), scaled by the safety factor.
SlackModel calibrate_slack(const std::vector<CalibrationInstance>& set, const CostSpec& cost,
                           const Objective& objective = Objective::consumer(), double coarse = 1.0 / 32.0,
                           double fine = 1.0 / 64.0, double safety = 3.0);

}  // namespace segopt
