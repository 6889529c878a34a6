#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "segopt/cost.hpp"
#include "segopt/envelope.hpp"
#include "segopt/market.hpp"
#include "segopt/screening.hpp"

namespace segopt {

// What the segmentation maximizes: consumer surplus (Rent), or the
// scalarization e1 lambda Pi + e2 (1 - lambda) U.
struct Objective {
  CurveKind kind = CurveKind::Rent;
  double lambda = 0.0;
  Orientation e{};

  static Objective consumer() { return {}; }
  static Objective scalarized(double lambda, Orientation e) { return {CurveKind::Scalarized, lambda, e}; }
  // Objective value of a single market's accounts.
  double of(const SurplusAccounts& a) const;
};

struct SolveOptions {
  std::size_t h_grid = kDefaultHGrid;
  bool allow_fast_path = true;
  // Local grid refinement around the optimum for smooth costs; stops once the
  // local spacing falls below refine_floor * v_k.
  std::size_t refine_rounds = 12;
  double refine_floor = 1e-9;
};

struct SolveReport {
  Objective objective;
  QuasiMarket D;
  // Per value k = 0..K-2; absent where x*_k = 0.
  std::vector<std::optional<double>> hD;
  double value = 0.0;
  // Contribution of the top value (e1 lambda x*_K w_K(0)); included in value.
  double top_term = 0.0;
  // Multiplier per tail-sum constraint k = 0..K-2.
  std::vector<double> mu;
  double kkt_residual = 0.0;
  bool fast_path_used = false;
  bool slopes_nondecreasing = false;
  // Envelope per value k = 0..K-2 and the hazards it mixes at hD_k.
  std::vector<ConcaveEnvelope> envelopes;
  std::vector<EnvelopeQuery> support;
  // Fast-path extras: first value whose hazard already sits below its rent peak,
  // and the consumer-surplus gain over no segmentation.
  std::optional<std::size_t> cutoff;
  double gains = 0.0;
  std::size_t lp_pivots = 0;
};

SolveReport solve_bound(const Market& xstar, const ValueGrid& grid, const CostSpec& cost,
                        const Objective& objective = Objective::consumer(), const SolveOptions& options = {});

// Monotone hazard rate: (v_{k+1} - v_k) D*_k / x*_k nonincreasing in k.
bool mhr_holds(const Market& xstar, const ValueGrid& grid);

// Closed-form consumer optimum for isoelastic costs under MHR.
std::optional<SolveReport> fast_path(const Market& xstar, const ValueGrid& grid, const CostSpec& cost,
                                     const SolveOptions& options = {});

// True when some nondecreasing sequence s_k lies in [right_k, left_k] for
// every value with positive aggregate weight. The default tolerance absorbs
// the ~1e-8 resolution of h^D on smooth curves, where the objective is flat.
bool slopes_admit_monotone_selection(const SolveReport& report, const Market& xstar, double tol = 1e-6);

Segmentation build_segmentation(const SolveReport& report, const Market& xstar, const ValueGrid& grid,
                                const CostSpec& cost);

struct SupportCheck {
  std::size_t segment;
  std::size_t k;
  double hazard;
  bool pass;
};

struct VerificationReport {
  AggregationReport aggregation;
  std::vector<bool> regular;
  std::vector<SupportCheck> support;
  bool support_pass = true;
  // Per value k = 0..K-2: lambda-weighted average hazard across segments.
  std::vector<std::optional<double>> hazard_average;
  bool hazard_average_pass = true;
  double achieved = 0.0;
  double bound = 0.0;
  bool achieved_pass = false;
  bool all_pass = false;
  std::string first_failure;
};

inline constexpr double kSupportTol = 1e-6;
inline constexpr double kHazardAverageTol = 1e-7;
inline constexpr double kAchievedTol = 1e-7;

VerificationReport verify_segmentation(const Segmentation& seg, const Market& xstar, const ValueGrid& grid,
                                       const CostSpec& cost, const SolveReport& report);

// Consumer surplus of the unsegmented market, sum_k x*_k u_k(h*_k).
double no_segmentation_surplus(const Market& xstar, const ValueGrid& grid, const CostSpec& cost);

}  // namespace segopt
