#pragma once

#include <cstddef>
#include <vector>

#include "segopt/cost.hpp"
#include "segopt/market.hpp"

namespace segopt {

enum class CurveKind { Rent, Welfare, Scalarized };

const char* to_string(CurveKind kind);

// Signs (e1, e2) weighting profit and consumer surplus.
struct Orientation {
  int e1 = 1;
  int e2 = 1;
};

// The per-value objective as a function of the inverse hazard rate:
// rent u(h), welfare w(h), or a_w w(h) + a_u u(h) with a_w = e1 lambda and
// a_u = e2 (1 - lambda) - e1 lambda.
class LocalObjective {
 public:
  LocalObjective(CostSpec cost, double v, CurveKind kind, double lambda = 0.0, Orientation e = {});

  double operator()(double h) const { return weight_w_ * welfare(h) + weight_u_ * rent(h); }
  double rent(double h) const { return rent_at(cost_, v_, h); }
  double welfare(double h) const { return welfare_at(cost_, v_, h); }
  double right_derivative(double h) const;

  bool smooth() const { return cost_.smooth(); }
  double v() const { return v_; }
  CurveKind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  Orientation orientation() const { return e_; }
  double weight_w() const { return weight_w_; }
  double weight_u() const { return weight_u_; }
  const CostSpec& cost() const { return cost_; }

 private:
  CostSpec cost_;
  double v_;
  CurveKind kind_;
  double lambda_;
  Orientation e_;
  double weight_w_;
  double weight_u_;
};

inline constexpr std::size_t kDefaultHGrid = 4096;

// Samples of a local objective on [0, v_k]. The grid always contains 0, v_k,
// every marginal-cost kink v_k - kappa_i inside the interval and the rent peak.
struct RentCurve {
  std::size_t k = 0;
  LocalObjective obj;
  std::vector<double> h;
  std::vector<double> value;
};

RentCurve rent_curve(const CostSpec& cost, const ValueGrid& grid, std::size_t k, CurveKind kind,
                     double lambda = 0.0, Orientation e = {}, std::size_t n = kDefaultHGrid,
                     const std::vector<double>& extra = {});

// Adds `points` evenly spaced samples on [c - half_width, c + half_width] ∩ [0, v_k]
// around every center.
void refine_curve(RentCurve& curve, const std::vector<double>& centers, double half_width, std::size_t points);

// Upper concave hull truncated at its maximum; constant beyond the last breakpoint.
struct ConcaveEnvelope {
  std::vector<double> h;
  std::vector<double> value;
  std::vector<double> slope;  // per segment, strictly decreasing and positive
  std::vector<bool> gap;      // per segment: some sample lies strictly below the chord
  LocalObjective obj;

  double peak_h() const { return h.back(); }
  double peak_value() const { return value.back(); }
  double operator()(double x) const;
};

ConcaveEnvelope concavify(const RentCurve& curve);

struct SupportPoint {
  double h;
  double weight;
};

struct EnvelopeQuery {
  double value = 0.0;
  double slope_right = 0.0;
  double slope_left = 0.0;
  // Hazards the envelope mixes at h, with mixing weights summing to one.
  std::vector<SupportPoint> support;
  // Set on the flat tail: the rest of the hazard budget is spent by removing
  // the value from some markets.
  bool exclusion = false;
};

// Throws NegativeH for h < 0.
EnvelopeQuery envelope_query(const ConcaveEnvelope& env, double h);

}  // namespace segopt
