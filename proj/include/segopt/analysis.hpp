#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "segopt/cost.hpp"
#include "segopt/envelope.hpp"
#include "segopt/market.hpp"

namespace segopt {

// Envelope gap below which a hazard counts as touching the rent curve.
inline constexpr double kTouchTol = 1e-9;

struct NoSegResult {
  bool in_O = false;
  // Empty when in_O; otherwise "touching" or "slope".
  std::string condition;
  std::optional<std::size_t> index;
  // Per value k = 0..K-2 (NaN where x*_k = 0).
  std::vector<double> gap;
  std::vector<double> slope;
};

// Holds the rent envelopes of a (grid, cost) pair so that many markets can be
// tested without rebuilding them.
class NoSegTester {
 public:
  NoSegTester(const ValueGrid& grid, const CostSpec& cost, std::size_t h_grid = kDefaultHGrid);
  NoSegResult operator()(const Market& xstar) const;

 private:
  ValueGrid grid_;
  CostSpec cost_;
  std::vector<ConcaveEnvelope> env_;
};

// No segmentation raises consumer surplus iff every h*_k touches its envelope
// and the envelope right-slopes at h*_k are nondecreasing in k.
NoSegResult no_seg_test(const Market& xstar, const ValueGrid& grid, const CostSpec& cost);

struct QualityReport {
  // [segment][k]; absent where the segment does not contain v_k.
  std::vector<std::vector<std::optional<double>>> q;
  // [segment][k] for k = 0..K-2, eta = v_k / h_k; absent off support or at h = 0.
  std::vector<std::vector<std::optional<double>>> eta;
  std::vector<double> dispersion;
  // Q(v_k - hbar_k) for k = 0..K-2.
  std::vector<double> q_floor;
  double q_max = 0.0;
  bool monotone = true;
  std::optional<std::size_t> monotone_violation;
  // Isoelastic pattern on MHR aggregates: eta = gamma/(gamma-1) below the
  // cutoff and eta = v_k / h*_k from it on. Absent when it does not apply.
  std::optional<bool> iso_pattern;
  double iso_max_error = 0.0;
  std::optional<std::size_t> cutoff;

  std::size_t dispersed_count(double eps) const;
  bool dispersion_bound_holds(double eps) const;
};

inline constexpr double kMonotoneTol = 1e-9;
inline constexpr double kIsoPatternTol = 1e-6;

QualityReport quality_report(const Segmentation& seg, const ValueGrid& grid, const CostSpec& cost);

struct OSetPoint {
  double x1 = 0.0;
  double x2 = 0.0;
  bool in_O = false;
};

struct OSetScan {
  std::size_t den = 0;
  std::vector<OSetPoint> points;
  std::size_t in_count = 0;
};

// Labels every point (i/den, j/den, 1 - i/den - j/den) of the 2-simplex.
// Requires K = 3.
OSetScan o_set_scan(const ValueGrid& grid, const CostSpec& cost, std::size_t den);

// Points labeled in `inner` but not in `outer`; both scans must share a mesh.
std::size_t nesting_violations(const OSetScan& inner, const OSetScan& outer);

}  // namespace segopt
