#pragma once

#include <vector>

#include "segopt/market.hpp"

namespace segopt {

enum class CostType { Isoelastic, StepMC, SampledConvex };

// Convex production cost of quality. Isoelastic is c(q) = q^gamma / gamma.
// Step and sampled costs share one representation: quality breakpoints
// 0 = b_0 < b_1 < ... < b_n with constant marginal cost slope_i on (b_{i-1}, b_i].
// For StepMC the breakpoints are the integers and slope_i = kappa_i.
class CostSpec {
 public:
  static CostSpec isoelastic(double gamma);
  static CostSpec step(std::vector<double> kappa);
  static CostSpec sampled(std::vector<double> q, std::vector<double> c);

  CostType type() const { return type_; }
  bool smooth() const { return type_ == CostType::Isoelastic; }
  double gamma() const { return gamma_; }
  const std::vector<double>& slopes() const { return slope_; }
  const std::vector<double>& breaks() const { return break_; }
  // Original sample points of a SampledConvex cost.
  const std::vector<double>& sample_q() const { return sample_q_; }
  const std::vector<double>& sample_c() const { return sample_c_; }
  // Largest producible quality; infinite for isoelastic costs.
  double capacity() const;

  double cost(double q) const;
  // Q(phi): 0 for phi < 0, otherwise the largest quality whose marginal cost is <= phi.
  double supply(double phi) const;
  // Left limit Q(phi-): only marginal costs strictly below phi count.
  double supply_below(double phi) const;
  // dQ/dphi; zero almost everywhere for step costs.
  double supply_slope(double phi) const;

 private:
  CostType type_ = CostType::Isoelastic;
  double gamma_ = 2.0;
  std::vector<double> break_;
  std::vector<double> slope_;
  std::vector<double> sample_q_;
  std::vector<double> sample_c_;
};

// Information rent u(h) = h Q(v - h) and welfare w(h) = v Q(v - h) - c(Q(v - h)).
double rent_at(const CostSpec& cost, double v, double h);
double welfare_at(const CostSpec& cost, double v, double h);

// argmax_h h Q(v - h) on [0, v]; the largest maximizer for step costs.
double peak_hazard(const CostSpec& cost, double v);

// Quality argmax_q v q - c(q).
double efficient_quality(const CostSpec& cost, double v);

struct McShape {
  bool conv_mc_holds = false;
  std::vector<double> hbar;
};

McShape mc_shape(const CostSpec& cost, const ValueGrid& grid);

}  // namespace segopt
