#include "segopt/cost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "segopt/errors.hpp"

namespace segopt {

namespace {

double tie_tol(double phi) { return 1e-12 * std::max(1.0, std::abs(phi)); }

}  // namespace

CostSpec CostSpec::isoelastic(double gamma) {
  if (!std::isfinite(gamma) || gamma <= 1.0)
    throw Error(ErrorKind::InvalidInstance, "isoelastic cost needs gamma > 1");
  CostSpec c;
  c.type_ = CostType::Isoelastic;
  c.gamma_ = gamma;
  return c;
}

CostSpec CostSpec::step(std::vector<double> kappa) {
  if (kappa.empty()) throw Error(ErrorKind::InvalidInstance, "step cost needs at least one increment");
  for (std::size_t i = 0; i < kappa.size(); ++i) {
    if (!std::isfinite(kappa[i]) || kappa[i] < 0.0)
      throw Error(ErrorKind::InvalidInstance, "step marginal cost " + std::to_string(i) + " is negative");
    if (i > 0 && kappa[i] < kappa[i - 1])
      throw Error(ErrorKind::InvalidInstance, "step marginal costs decrease at index " + std::to_string(i));
  }
  CostSpec c;
  c.type_ = CostType::StepMC;
  c.slope_ = std::move(kappa);
  c.break_.resize(c.slope_.size() + 1);
  for (std::size_t i = 0; i < c.break_.size(); ++i) c.break_[i] = static_cast<double>(i);
  return c;
}

CostSpec CostSpec::sampled(std::vector<double> q, std::vector<double> cq) {
  if (q.size() != cq.size() || q.size() < 2)
    throw Error(ErrorKind::InvalidInstance, "sampled cost needs at least two matching (q, c) points");
  if (q[0] != 0.0 || cq[0] != 0.0) throw Error(ErrorKind::InvalidInstance, "sampled cost must start at (0, 0)");
  CostSpec c;
  c.type_ = CostType::SampledConvex;
  c.sample_q_ = q;
  c.sample_c_ = cq;
  c.break_.push_back(0.0);
  for (std::size_t i = 1; i < q.size(); ++i) {
    if (!std::isfinite(q[i]) || !std::isfinite(cq[i]) || q[i] <= q[i - 1])
      throw Error(ErrorKind::InvalidInstance, "sampled cost qualities must increase strictly");
    const double s = (cq[i] - cq[i - 1]) / (q[i] - q[i - 1]);
    if (s < -1e-12) throw Error(ErrorKind::InvalidInstance, "sampled cost decreases");
    if (!c.slope_.empty() && s < c.slope_.back() - 1e-12)
      throw Error(ErrorKind::InvalidInstance, "sampled cost is not convex at index " + std::to_string(i));
    c.slope_.push_back(std::max(s, c.slope_.empty() ? 0.0 : c.slope_.back()));
    c.break_.push_back(q[i]);
  }
  return c;
}

double CostSpec::capacity() const {
  return smooth() ? std::numeric_limits<double>::infinity() : break_.back();
}

double CostSpec::cost(double q) const {
  if (q <= 0.0) return 0.0;
  if (smooth()) return std::pow(q, gamma_) / gamma_;
  double acc = 0.0;
  for (std::size_t i = 0; i < slope_.size(); ++i) {
    const double lo = break_[i];
    const double hi = break_[i + 1];
    if (q <= hi) return acc + slope_[i] * (q - lo);
    acc += slope_[i] * (hi - lo);
  }
  if (q <= break_.back() * (1.0 + 1e-12)) return acc;
  return std::numeric_limits<double>::infinity();
}

double CostSpec::supply(double phi) const {
  if (phi < 0.0) return 0.0;
  if (smooth()) return std::pow(phi, 1.0 / (gamma_ - 1.0));
  const auto m = std::upper_bound(slope_.begin(), slope_.end(), phi + tie_tol(phi)) - slope_.begin();
  return break_[static_cast<std::size_t>(m)];
}

double CostSpec::supply_below(double phi) const {
  if (phi <= 0.0) return 0.0;
  if (smooth()) return std::pow(phi, 1.0 / (gamma_ - 1.0));
  const auto m = std::lower_bound(slope_.begin(), slope_.end(), phi - tie_tol(phi)) - slope_.begin();
  return break_[static_cast<std::size_t>(m)];
}

double CostSpec::supply_slope(double phi) const {
  if (!smooth() || phi <= 0.0) return 0.0;
  const double a = 1.0 / (gamma_ - 1.0);
  return a * std::pow(phi, a - 1.0);
}

double rent_at(const CostSpec& cost, double v, double h) { return h * cost.supply(v - h); }

double welfare_at(const CostSpec& cost, double v, double h) {
  const double q = cost.supply(v - h);
  return v * q - cost.cost(q);
}

double efficient_quality(const CostSpec& cost, double v) { return cost.supply(v); }

double peak_hazard(const CostSpec& cost, double v) {
  if (!cost.smooth()) {
    double best_h = 0.0;
    double best = 0.0;
    const auto& s = cost.slopes();
    const auto& b = cost.breaks();
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] > v + tie_tol(v)) break;
      const double h = std::max(0.0, v - s[i]);
      const double val = h * b[i + 1];
      if (val > best + 1e-15 * std::max(1.0, best) || (val >= best - 1e-15 * std::max(1.0, best) && h > best_h)) {
        best = std::max(best, val);
        best_h = h;
      }
    }
    return best_h;
  }
  // Bracket the maximizer on a coarse grid, then bisect on the sign of
  // u'(h) = Q(v - h) - h Q'(v - h), which changes sign once.
  const int n = 256;
  int arg = 0;
  double best = -1.0;
  for (int i = 0; i <= n; ++i) {
    const double h = v * i / n;
    const double u = rent_at(cost, v, h);
    if (u > best) {
      best = u;
      arg = i;
    }
  }
  double lo = v * std::max(0, arg - 1) / n;
  double hi = v * std::min(n, arg + 1) / n;
  auto deriv = [&](double h) { return cost.supply(v - h) - h * cost.supply_slope(v - h); };
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (deriv(mid) > 0.0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

McShape mc_shape(const CostSpec& cost, const ValueGrid& grid) {
  McShape r;
  r.hbar.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) r.hbar[k] = peak_hazard(cost, grid[k]);
  if (cost.smooth()) {
    // c'''q / c'' = gamma - 2 >= -1 for every gamma > 1.
    r.conv_mc_holds = true;
    return r;
  }
  // Discrete analogue: increments of marginal cost, per unit of quality, are nondecreasing.
  const auto& s = cost.slopes();
  const auto& b = cost.breaks();
  r.conv_mc_holds = true;
  double prev = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double d = (s[i + 1] - s[i]) / (0.5 * (b[i + 2] - b[i]));
    if (d < prev - 1e-12) r.conv_mc_holds = false;
    prev = d;
  }
  return r;
}

}  // namespace segopt
