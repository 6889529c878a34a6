#include "segopt/discrete_goods.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include "segopt/errors.hpp"
#include "segopt/parallel.hpp"

namespace segopt {

namespace {

constexpr double kTieTol = 1e-12;

void check_kappa(const std::vector<double>& kappa) {
  if (kappa.empty()) throw Error(ErrorKind::InvalidInstance, "at least one quality increment is required");
  for (std::size_t i = 0; i < kappa.size(); ++i) {
    if (!(kappa[i] >= 0.0) || (i > 0 && kappa[i] < kappa[i - 1]))
      throw Error(ErrorKind::InvalidInstance, "increment costs must be nonnegative and nondecreasing");
  }
}

std::vector<double> profits(const DemandVec& D, const ValueGrid& grid, double kappa) {
  std::vector<double> p(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) p[k] = D[k] * (grid[k] - kappa);
  return p;
}

}  // namespace

std::vector<std::vector<std::size_t>> optimal_price_sets(const Market& m, const ValueGrid& grid,
                                                          const std::vector<double>& kappa) {
  check_kappa(kappa);
  const auto D = demand_of(m);
  std::vector<std::vector<std::size_t>> sets;
  for (double c : kappa) {
    const auto p = profits(D, grid, c);
    const double best = *std::max_element(p.begin(), p.end());
    std::vector<std::size_t> s;
    if (c < grid.top() && best > 0.0) {
      for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k] >= best - kTieTol * std::max(1.0, std::abs(best))) s.push_back(k);
      }
    }
    sets.push_back(std::move(s));
  }
  return sets;
}

IncrementalPrices optimal_increment_prices(const Market& m, const ValueGrid& grid, const std::vector<double>& kappa) {
  const auto sets = optimal_price_sets(m, grid, kappa);
  const auto D = demand_of(m);
  IncrementalPrices r;
  for (std::size_t i = 0; i < kappa.size(); ++i) {
    if (sets[i].empty()) {
      r.rho.push_back(grid.top());
      r.unsold.push_back(true);
      r.profit.push_back(0.0);
      continue;
    }
    const std::size_t k = sets[i].front();
    r.rho.push_back(grid[k]);
    r.unsold.push_back(false);
    r.profit.push_back(D[k] * (grid[k] - kappa[i]));
  }
  return r;
}

ParetoMarket piecewise_pareto(const ValueGrid& grid, const PiecewiseParetoSpec& spec) {
  check_kappa(spec.kappa);
  const std::size_t n = spec.kappa.size();
  if (spec.r.size() != n) throw Error(ErrorKind::InvalidCutoffs, "one cutoff per increment is required");
  const std::size_t K = grid.size();
  ParetoMarket out;
  const double tol = 1e-12 * std::max(1.0, grid.top());
  for (std::size_t i = 0; i < n; ++i) {
    const double want = spec.r[i];
    const auto& v = grid.values();
    const auto it = std::lower_bound(v.begin(), v.end(), want);
    std::size_t k = it == v.end() ? K - 1 : static_cast<std::size_t>(it - v.begin());
    if (k > 0 && std::abs(v[k - 1] - want) < std::abs(v[k] - want)) --k;
    if (std::abs(v[k] - want) > tol) out.snapped = true;
    out.r.push_back(v[k]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && out.r[i] < out.r[i - 1])
      throw Error(ErrorKind::InvalidCutoffs, "cutoffs must be nondecreasing");
    if (!(out.r[i] > spec.kappa[i]))
      throw Error(ErrorKind::InvalidCutoffs, "cutoff " + std::to_string(i + 1) + " does not exceed its increment cost");
  }
  out.A.push_back(out.r[0] - spec.kappa[0]);
  for (std::size_t i = 1; i < n; ++i)
    out.A.push_back(out.A[i - 1] * (out.r[i] - spec.kappa[i]) / (out.r[i] - spec.kappa[i - 1]));

  out.demand.assign(K, 1.0);
  out.region.assign(K, 0);
  for (std::size_t k = 0; k < K; ++k) {
    std::size_t reg = 0;
    while (reg < n && out.r[reg] <= grid[k] + tol) ++reg;
    out.region[k] = reg;
    if (reg > 0) out.demand[k] = out.A[reg - 1] / (grid[k] - spec.kappa[reg - 1]);
  }
  out.market.x.assign(K, 0.0);
  for (std::size_t k = 0; k < K; ++k)
    out.market.x[k] = std::max(0.0, out.demand[k] - (k + 1 < K ? out.demand[k + 1] : 0.0));
  return out;
}

ExtremePointResult extreme_point_test(const Market& m, const ValueGrid& grid, const std::vector<double>& rho,
                                      const std::vector<double>& kappa) {
  const auto sets = optimal_price_sets(m, grid, kappa);
  if (rho.size() != kappa.size()) throw Error(ErrorKind::NotInPriceRegion, "one price per increment is required");
  const double tol = 1e-12 * std::max(1.0, grid.top());
  std::vector<double> support_values;
  std::vector<std::size_t> support;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (m.supported(k)) {
      support.push_back(k);
      support_values.push_back(grid[k]);
    }
  }
  PiecewiseParetoSpec spec;
  for (std::size_t i = 0; i < kappa.size(); ++i) {
    if (sets[i].empty()) continue;
    const bool optimal =
        std::any_of(sets[i].begin(), sets[i].end(), [&](std::size_t k) { return std::abs(grid[k] - rho[i]) <= tol; });
    if (!optimal)
      throw Error(ErrorKind::NotInPriceRegion, "price of increment " + std::to_string(i + 1) + " is not optimal");
    std::optional<double> lowest;
    for (std::size_t k : sets[i]) {
      if (m.supported(k)) {
        lowest = grid[k];
        break;
      }
    }
    if (!lowest) return {};
    spec.kappa.push_back(kappa[i]);
    spec.r.push_back(*lowest);
  }
  ExtremePointResult res;
  if (spec.kappa.empty()) return res;
  // Rebuild the Pareto demand on the support and compare.
  const ValueGrid sub(support_values);
  ParetoMarket rebuilt;
  try {
    rebuilt = piecewise_pareto(sub, spec);
  } catch (const Error&) {
    return res;
  }
  const auto D = demand_of(m);
  for (std::size_t j = 0; j < support.size(); ++j) {
    const double want = rebuilt.demand[j];
    if (std::abs(D[support[j]] - want) > 1e-8 * std::max(1e-300, std::abs(want))) return res;
  }
  res.is_extreme = true;
  res.r = spec.r;
  return res;
}

bool fosd_check(const Market& m, const ValueGrid& grid, const PiecewiseParetoSpec& spec) {
  const auto prices = optimal_increment_prices(m, grid, spec.kappa);
  if (spec.r.size() != spec.kappa.size()) throw Error(ErrorKind::InvalidCutoffs, "one cutoff per increment is required");
  for (std::size_t i = 0; i < spec.r.size(); ++i) {
    if (!prices.unsold[i] && prices.rho[i] > spec.r[i] + 1e-12 * std::max(1.0, grid.top()))
      throw Error(ErrorKind::PreconditionViolated, "market prices exceed the Pareto cutoffs");
  }
  const auto pareto = piecewise_pareto(grid, spec);
  const auto D = demand_of(m);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (D[k] > pareto.demand[k] + 1e-12) return false;
  }
  return true;
}

double consumer_surplus_at_prices(const Market& m, const ValueGrid& grid, const std::vector<double>& rho) {
  double u = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    for (double p : rho) {
      if (grid[k] >= p) u += m[k] * (grid[k] - p);
    }
  }
  return u;
}

namespace {

// Consumer surplus of the Pareto market with cutoffs at grid indices a, each
// increment priced at its cutoff: increment i earns sum_{j >= a_i} g_j D_{j+1}.
class ParetoSurplus {
 public:
  ParetoSurplus(const ValueGrid& grid, const std::vector<double>& kappa) : grid_(grid), kappa_(kappa) {
    const std::size_t K = grid.size();
    prefix_.assign(kappa.size(), std::vector<double>(K, 0.0));
    for (std::size_t m = 0; m < kappa.size(); ++m) {
      for (std::size_t j = 0; j + 1 < K; ++j) {
        const double den = grid[j + 1] - kappa[m];
        prefix_[m][j + 1] = prefix_[m][j] + (den > 0.0 ? (grid[j + 1] - grid[j]) / den : 0.0);
      }
    }
  }

  double operator()(const std::vector<std::size_t>& a, std::vector<double>& A) const {
    const std::size_t n = a.size();
    const std::size_t K = grid_.size();
    A[0] = grid_[a[0]] - kappa_[0];
    for (std::size_t m = 1; m < n; ++m)
      A[m] = A[m - 1] * (grid_[a[m]] - kappa_[m]) / (grid_[a[m]] - kappa_[m - 1]);
    double u = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t m = i; m < n; ++m) {
        const std::size_t lo = std::max(a[i], a[m] == 0 ? 0 : a[m] - 1);
        const std::size_t hi = (m + 1 < n ? a[m + 1] : K) - 1;
        if (hi > lo) u += A[m] * (prefix_[m][hi] - prefix_[m][lo]);
      }
    }
    return u;
  }

 private:
  const ValueGrid& grid_;
  const std::vector<double>& kappa_;
  std::vector<std::vector<double>> prefix_;
};

}  // namespace

UnconstrainedOptimum unconstrained_cs_max(const ValueGrid& grid, const std::vector<double>& kappa) {
  check_kappa(kappa);
  const std::size_t K = grid.size();
  const std::size_t n = kappa.size();
  // First admissible index per increment.
  std::vector<std::size_t> first(n, K);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < K; ++k) {
      if (grid[k] > kappa[i]) {
        first[i] = k;
        break;
      }
    }
    if (first[i] == K)
      throw Error(ErrorKind::InvalidInstance, "increment " + std::to_string(i + 1) + " costs at least the top value");
  }
  // count[i][k]: admissible completions of increments i..n-1 with a_i >= k.
  std::vector<std::vector<double>> count(n + 1, std::vector<double>(K + 1, 0.0));
  std::fill(count[n].begin(), count[n].end(), 1.0);
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = K; k-- > 0;) {
      count[i][k] = count[i][k + 1] + (k >= first[i] ? count[i + 1][k] : 0.0);
    }
  }
  if (count[0][0] > static_cast<double>(kSearchCap))
    throw Error(ErrorKind::SearchSpaceTooLarge,
                "cutoff search has " + std::to_string(count[0][0]) + " candidates; cap is " + std::to_string(kSearchCap));

  const ParetoSurplus surplus(grid, kappa);
  struct Best {
    double u = -1.0;
    std::vector<std::size_t> a;
    std::size_t seen = 0;
  };
  std::vector<Best> per_first(K);
  parallel_for(K, [&](std::size_t a0) {
    if (a0 < first[0]) return;
    Best& best = per_first[a0];
    std::vector<std::size_t> a(n, a0);
    std::vector<double> A(n);
    std::function<void(std::size_t)> extend = [&](std::size_t i) {
      if (i == n) {
        ++best.seen;
        const double u = surplus(a, A);
        if (u > best.u + kTieTol * std::max(1.0, std::abs(best.u))) {
          best.u = u;
          best.a = a;
        }
        return;
      }
      for (std::size_t k = std::max(a[i - 1], first[i]); k < K; ++k) {
        a[i] = k;
        extend(i + 1);
      }
    };
    extend(1);
  });
  Best best;
  std::size_t seen = 0;
  for (const auto& b : per_first) {
    seen += b.seen;
    if (!b.a.empty() && b.u > best.u + kTieTol * std::max(1.0, std::abs(best.u))) best = b;
  }
  UnconstrainedOptimum out;
  out.candidates = seen;
  PiecewiseParetoSpec spec{kappa, {}};
  for (std::size_t idx : best.a) spec.r.push_back(grid[idx]);
  out.r = spec.r;
  out.market = piecewise_pareto(grid, spec).market;
  out.rho = optimal_increment_prices(out.market, grid, kappa).rho;
  out.consumer = consumer_surplus_at_prices(out.market, grid, out.rho);
  return out;
}

double two_goods_surplus(double c, double rho1, double rho2) {
  return rho1 * (std::log(rho2 / rho1) + 2.0 * (1.0 - c / rho2) * std::log((1.0 - c) / (rho2 - c)));
}

namespace {

double bundle_multiplier(double c) {
  const double e = std::numbers::e;
  return 2.0 * (1.0 - c) / (1.0 + (e - 1.0) * c) - 1.0;
}

template <class F>
double bisect(F f, double lo, double hi, int iters = 200) {
  double flo = f(lo);
  for (int i = 0; i < iters && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TwoGoodsResult two_goods_limit(double c_in, double delta, double v_top) {
  if (!(v_top > 0.0) || c_in < 0.0 || c_in >= v_top)
    throw Error(ErrorKind::PreconditionViolated, "second increment cost must lie in [0, v_top)");
  const double c = c_in / v_top;
  TwoGoodsResult r;
  r.c = c_in;
  r.mu = bundle_multiplier(c);
  double rho1 = 0.0, rho2 = 0.0;
  if (r.mu >= 0.0) {
    r.bundles = true;
    rho1 = rho2 = c + (1.0 - c) / std::numbers::e;
  } else {
    rho2 = bisect([&](double p) { return p - 2.0 * c * std::log((1.0 - c) / (p - c)); }, c + 1e-14, 1.0);
    const double L = std::log((1.0 - c) / (rho2 - c));
    rho1 = rho2 * std::exp(2.0 * (1.0 - c / rho2) * L - 1.0);
  }
  // Stationarity of U - mu (rho_1 - rho_2), with mu = 0 off the bundle.
  const double L = std::log((1.0 - c) / (rho2 - c));
  const double d1 = std::log(rho2 / rho1) - 1.0 + 2.0 * (1.0 - c / rho2) * L;
  const double d2 = (rho1 / rho2) * (2.0 * c * L / rho2 - 1.0);
  const double mu = r.bundles ? r.mu : 0.0;
  r.kkt_residual = std::max(std::abs(d1 - mu), std::abs(d2 + mu));
  r.consumer = two_goods_surplus(c, rho1, rho2) * v_top;
  r.rho1 = rho1 * v_top;
  r.rho2 = rho2 * v_top;
  r.c_bar = bisect(bundle_multiplier, 0.0, 1.0) * v_top;

  if (delta > 0.0) {
    const auto steps = static_cast<std::size_t>(std::llround(v_top / delta));
    std::vector<double> values;
    for (std::size_t k = 1; k <= steps; ++k) values.push_back(v_top * static_cast<double>(k) / static_cast<double>(steps));
    const ValueGrid grid(values);
    auto bundled = [&](double cost) {
      const auto opt = unconstrained_cs_max(grid, {0.0, cost});
      return opt.rho[0] == opt.rho[1];
    };
    double lo = 0.0, hi = 0.9 * v_top;
    if (bundled(lo) && !bundled(hi)) {
      while (hi - lo > 0.25 * delta) {
        const double mid = 0.5 * (lo + hi);
        (bundled(mid) ? lo : hi) = mid;
      }
      r.c_bar_discrete = 0.5 * (lo + hi);
    }
  }
  return r;
}

}  // namespace segopt
