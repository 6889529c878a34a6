#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace segopt {

// Absolute tolerance for probability and aggregation checks.
inline constexpr double kEpsFeas = 1e-9;
// Ingested weights are rescaled when their sum is this close to one.
inline constexpr double kRenormTol = 1e-6;

class ValueGrid {
 public:
  explicit ValueGrid(std::vector<double> values);

  std::size_t size() const { return v_.size(); }
  double operator[](std::size_t k) const { return v_[k]; }
  double top() const { return v_.back(); }
  const std::vector<double>& values() const { return v_; }

 private:
  std::vector<double> v_;
};

struct Market {
  std::vector<double> x;

  std::size_t size() const { return x.size(); }
  double operator[](std::size_t k) const { return x[k]; }
  bool supported(std::size_t k) const { return x[k] > 0.0; }
};

// Validates and rescales weights to sum to one; throws InvalidInstance when
// an entry is negative or non-finite, or the sum is off by more than renorm_tol.
Market make_market(std::vector<double> weights, double renorm_tol = kRenormTol);

// D_k = sum_{j >= k} x_j.
using DemandVec = std::vector<double>;

DemandVec demand_of(const Market& m);
Market market_from_demand(const DemandVec& d);

// Per-value gap, inverse hazard rate and virtual value. Values outside the
// support carry gap 0, hazard v_k and virtual value 0.
struct LocalStats {
  std::vector<double> gap;
  std::vector<double> hazard;
  std::vector<double> virtual_value;
  bool regular = true;
};

// Regularity tolerance on consecutive virtual values, scaled by max(1, v_K).
inline constexpr double kRegularTol = 1e-9;

LocalStats local_stats(const Market& m, const ValueGrid& grid);

struct Segment {
  double weight = 0.0;
  Market market;
};
using Segmentation = std::vector<Segment>;

struct AggregationReport {
  double max_error = 0.0;
  bool pass = false;
};

AggregationReport check_aggregation(const Segmentation& seg, const Market& aggregate,
                                    double tol = kEpsFeas);

// Entries D_2..D_K live at indices 1..K-1; index 0 is unused. Not required
// to be monotone.
struct QuasiMarket {
  std::vector<double> d;
};

QuasiMarket quasi_from_demand(const DemandVec& d);

struct MajorizationReport {
  bool holds = false;
  // slack[k] = tail sum of D* minus tail sum of D, starting at k = 0..K-2.
  std::vector<double> slack;
  // Normalized hazard h^D_k, absent where x*_k = 0.
  std::vector<std::optional<double>> hazard;
  std::vector<std::size_t> zero_weight;
};

MajorizationReport majorization(const QuasiMarket& d, const DemandVec& dstar,
                                const ValueGrid& grid, double tol = kEpsFeas);

// Tail sums sum_{i >= k} (v_{i+1} - v_i) D_{i+1} for k = 0..K-2.
std::vector<double> tail_budget(const QuasiMarket& d, const ValueGrid& grid);

}  // namespace segopt
