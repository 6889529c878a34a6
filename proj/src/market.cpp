#include "segopt/market.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "segopt/errors.hpp"

namespace segopt {

ValueGrid::ValueGrid(std::vector<double> values) : v_(std::move(values)) {
  if (v_.empty()) throw Error(ErrorKind::InvalidInstance, "value grid is empty");
  for (std::size_t k = 0; k < v_.size(); ++k) {
    if (!std::isfinite(v_[k]) || v_[k] <= 0.0)
      throw Error(ErrorKind::InvalidInstance, "value " + std::to_string(k) + " is not a positive real");
    if (k > 0 && v_[k] <= v_[k - 1])
      throw Error(ErrorKind::InvalidInstance, "values are not strictly increasing at index " + std::to_string(k));
  }
}

Market make_market(std::vector<double> weights, double renorm_tol) {
  if (weights.empty()) throw Error(ErrorKind::InvalidInstance, "market has no weights");
  double sum = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (!std::isfinite(weights[k]) || weights[k] < 0.0)
      throw Error(ErrorKind::InvalidInstance, "weight " + std::to_string(k) + " is negative or not finite");
    sum += weights[k];
  }
  if (std::abs(sum - 1.0) > renorm_tol)
    throw Error(ErrorKind::InvalidInstance, "weights sum to " + std::to_string(sum) + ", not 1");
  for (double& w : weights) w /= sum;
  return Market{std::move(weights)};
}

DemandVec demand_of(const Market& m) {
  DemandVec d(m.size(), 0.0);
  double tail = 0.0;
  for (std::size_t k = m.size(); k-- > 0;) {
    tail += m[k];
    d[k] = tail;
  }
  return d;
}

Market market_from_demand(const DemandVec& d) {
  Market m{std::vector<double>(d.size(), 0.0)};
  for (std::size_t k = 0; k < d.size(); ++k) m.x[k] = d[k] - (k + 1 < d.size() ? d[k + 1] : 0.0);
  return m;
}

LocalStats local_stats(const Market& m, const ValueGrid& grid) {
  const std::size_t K = m.size();
  LocalStats s;
  s.gap.assign(K, 0.0);
  s.hazard.assign(K, 0.0);
  s.virtual_value.assign(K, 0.0);
  double tail = 0.0;  // mass strictly above k
  std::optional<std::size_t> next;
  for (std::size_t k = K; k-- > 0;) {
    if (m.supported(k)) {
      if (next) {
        s.gap[k] = grid[*next] - grid[k];
        s.hazard[k] = s.gap[k] * tail / m[k];
      }
      next = k;
    } else {
      s.hazard[k] = grid[k];
    }
    s.virtual_value[k] = grid[k] - s.hazard[k];
    tail += m[k];
  }
  const double tol = kRegularTol * std::max(1.0, grid.top());
  std::optional<double> prev;
  for (std::size_t k = 0; k < K; ++k) {
    if (!m.supported(k)) continue;
    if (prev && s.virtual_value[k] < *prev - tol) s.regular = false;
    prev = s.virtual_value[k];
  }
  return s;
}

AggregationReport check_aggregation(const Segmentation& seg, const Market& aggregate, double tol) {
  if (seg.empty()) throw Error(ErrorKind::EmptySegmentation, "segmentation has no markets");
  std::vector<double> sum(aggregate.size(), 0.0);
  for (const auto& s : seg) {
    if (s.market.size() != aggregate.size())
      throw Error(ErrorKind::InvalidInstance, "segment dimension does not match the aggregate market");
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += s.weight * s.market[k];
  }
  AggregationReport r;
  for (std::size_t k = 0; k < sum.size(); ++k)
    r.max_error = std::max(r.max_error, std::abs(sum[k] - aggregate[k]));
  r.pass = r.max_error <= tol;
  return r;
}

QuasiMarket quasi_from_demand(const DemandVec& d) {
  QuasiMarket q{d};
  if (!q.d.empty()) q.d[0] = 0.0;
  return q;
}

std::vector<double> tail_budget(const QuasiMarket& d, const ValueGrid& grid) {
  const std::size_t K = grid.size();
  std::vector<double> t(K > 1 ? K - 1 : 0, 0.0);
  double acc = 0.0;
  for (std::size_t k = K - 1; k-- > 0;) {
    acc += (grid[k + 1] - grid[k]) * d.d[k + 1];
    t[k] = acc;
  }
  return t;
}

MajorizationReport majorization(const QuasiMarket& d, const DemandVec& dstar, const ValueGrid& grid,
                                double tol) {
  const std::size_t K = grid.size();
  if (d.d.size() != K || dstar.size() != K)
    throw Error(ErrorKind::InvalidInstance, "majorization: dimension mismatch");
  MajorizationReport r;
  r.holds = true;
  for (std::size_t k = 1; k < K; ++k) {
    if (d.d[k] < -tol) r.holds = false;
  }
  const auto lhs = tail_budget(d, grid);
  const auto rhs = tail_budget(quasi_from_demand(dstar), grid);
  r.slack.resize(lhs.size());
  r.hazard.resize(lhs.size());
  for (std::size_t k = 0; k < lhs.size(); ++k) {
    r.slack[k] = rhs[k] - lhs[k];
    if (r.slack[k] < -tol) r.holds = false;
    const double xk = dstar[k] - dstar[k + 1];
    if (xk > 0.0) {
      r.hazard[k] = (grid[k + 1] - grid[k]) * d.d[k + 1] / xk;
    } else {
      r.zero_weight.push_back(k);
    }
  }
  return r;
}

}  // namespace segopt
