#include "segopt/screening.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

namespace segopt {

std::vector<double> ironed_virtual_values(const Market& m, const ValueGrid& grid) {
  const auto st = local_stats(m, grid);
  struct Block {
    double w;
    double wphi;
    std::size_t count;
    double avg() const { return wphi / w; }
  };
  std::vector<Block> blocks;
  std::vector<std::size_t> support;
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (!m.supported(k)) continue;
    support.push_back(k);
    blocks.push_back({m[k], m[k] * st.virtual_value[k], 1});
    while (blocks.size() >= 2) {
      const Block& b = blocks.back();
      const Block& a = blocks[blocks.size() - 2];
      const double tol = 1e-14 * std::max(1.0, std::abs(a.avg()));
      if (a.avg() <= b.avg() + tol) break;
      Block merged{a.w + b.w, a.wphi + b.wphi, a.count + b.count};
      blocks.pop_back();
      blocks.back() = merged;
    }
  }
  std::vector<double> out(m.size(), 0.0);
  std::size_t pos = 0;
  for (const auto& b : blocks) {
    for (std::size_t i = 0; i < b.count; ++i) out[support[pos++]] = b.avg();
  }
  return out;
}

Menu price_allocation(const Market& m, const ValueGrid& grid, std::vector<double> q) {
  Menu menu;
  menu.q.assign(m.size(), 0.0);
  menu.t.assign(m.size(), 0.0);
  menu.offered.assign(m.size(), false);
  bool first = true;
  double prev_q = 0.0;
  double prev_t = 0.0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (!m.supported(k)) continue;
    menu.offered[k] = true;
    menu.q[k] = q[k];
    menu.t[k] = first ? grid[k] * q[k] : prev_t + grid[k] * (q[k] - prev_q);
    first = false;
    prev_q = menu.q[k];
    prev_t = menu.t[k];
  }
  return menu;
}

Menu optimal_menu(const Market& m, const ValueGrid& grid, const CostSpec& cost) {
  const auto phi = ironed_virtual_values(m, grid);
  std::vector<double> q(m.size(), 0.0);
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (m.supported(k)) q[k] = cost.supply(phi[k]);
  }
  return price_allocation(m, grid, std::move(q));
}

SurplusAccounts menu_accounts(const Market& m, const ValueGrid& grid, const CostSpec& cost, const Menu& menu) {
  SurplusAccounts a;
  a.rent.assign(m.size(), 0.0);
  a.quality = menu.q;
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (!m.supported(k)) continue;
    a.rent[k] = grid[k] * menu.q[k] - menu.t[k];
    a.consumer += m[k] * a.rent[k];
    a.profit += m[k] * (menu.t[k] - cost.cost(menu.q[k]));
  }
  a.welfare = a.consumer + a.profit;
  const auto st = local_stats(m, grid);
  a.regular = st.regular;
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (m.supported(k)) a.consumer_by_hazard += m[k] * rent_at(cost, grid[k], st.hazard[k]);
  }
  return a;
}

SurplusAccounts surplus_accounts(const Market& m, const ValueGrid& grid, const CostSpec& cost) {
  auto a = menu_accounts(m, grid, cost, optimal_menu(m, grid, cost));
  if (a.regular && std::abs(a.consumer - a.consumer_by_hazard) > 1e-8) {
    throw Error(ErrorKind::CrossCheckFailure,
                "menu surplus " + std::to_string(a.consumer) + " vs hazard surplus " +
                    std::to_string(a.consumer_by_hazard));
  }
  return a;
}

bool same_menu_on(const Market& m, const Menu& a, const Menu& b, double tol) {
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (!m.supported(k)) continue;
    if (std::abs(a.q[k] - b.q[k]) > tol * std::max(1.0, std::abs(a.q[k]))) return false;
    if (std::abs(a.t[k] - b.t[k]) > tol * std::max(1.0, std::abs(a.t[k]))) return false;
  }
  return true;
}

namespace {

// Moves eps of mass between two values; positive eps shifts mass from hi
// down to lo.
Market shift(const Market& y, std::size_t lo, std::size_t hi, double eps) {
  Market z = y;
  z.x[lo] = std::max(0.0, y[lo] + eps);
  z.x[hi] = std::max(0.0, y[hi] - eps);
  return z;
}

}  // namespace

Segmentation regular_decomposition(const Market& m, const ValueGrid& grid, const CostSpec& cost) {
  const Menu original = optimal_menu(m, grid, cost);
  if (local_stats(m, grid).regular) return {{1.0, m}};

  const std::size_t K = m.size();
  const std::size_t cap = 10 * K * K;
  const double tol = kRegularTol * std::max(1.0, grid.top());
  std::deque<Segment> work{{1.0, m}};
  Segmentation done;
  std::size_t splits = 0;

  auto preserves = [&](const Market& y) { return same_menu_on(y, original, optimal_menu(y, grid, cost)); };

  while (!work.empty()) {
    Segment s = work.front();
    work.pop_front();
    const auto st = local_stats(s.market, grid);
    if (st.regular) {
      done.push_back(std::move(s));
      continue;
    }
    if (++splits > cap) {
      done.push_back(std::move(s));
      for (auto& w : work) done.push_back(std::move(w));
      throw DecompositionStall("split cap of " + std::to_string(cap) + " reached", std::move(done));
    }
    // First adjacent supported pair whose virtual values decrease.
    std::size_t lo = K, hi = K;
    std::optional<std::size_t> prev;
    for (std::size_t k = 0; k < K && hi == K; ++k) {
      if (!s.market.supported(k)) continue;
      if (prev && st.virtual_value[k] < st.virtual_value[*prev] - tol) {
        lo = *prev;
        hi = k;
      }
      prev = k;
    }
    const Market& y = s.market;
    // Largest menu-preserving shift in one direction, up to `limit`.
    auto reach = [&](double sign, double limit) {
      if (preserves(shift(y, lo, hi, sign * limit))) return limit;
      double a = 0.0, b = limit;
      while (b - a > 1e-12) {
        const double mid = 0.5 * (a + b);
        if (preserves(shift(y, lo, hi, sign * mid))) a = mid;
        else b = mid;
      }
      return a;
    };
    const double up = reach(1.0, y[hi]);
    const double down = reach(-1.0, y[lo]);
    if (up <= 0.0 || down <= 0.0) {
      done.push_back(std::move(s));
      for (auto& w : work) done.push_back(std::move(w));
      throw DecompositionStall("no menu-preserving transfer between values " + std::to_string(lo) + " and " +
                                   std::to_string(hi),
                               std::move(done));
    }
    // Weights keep the mixture equal to y: w_up * up = w_down * down.
    const double w_up = down / (up + down);
    work.push_back({w_up * s.weight, shift(y, lo, hi, up)});
    work.push_back({(1.0 - w_up) * s.weight, shift(y, lo, hi, -down)});
  }
  return done;
}

}  // namespace segopt
