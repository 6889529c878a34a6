#include "segopt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "segopt/errors.hpp"
#include "segopt/parallel.hpp"
#include "segopt/simplex.hpp"

namespace segopt {

namespace {

constexpr double kBudget = 5e7;

// Profit of a monotone allocation with binding local downward constraints.
double profit_of(const Market& m, const ValueGrid& grid, const CostSpec& cost, const std::vector<double>& q) {
  const Menu menu = price_allocation(m, grid, q);
  double pi = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (m.supported(k)) pi += m[k] * (menu.t[k] - cost.cost(menu.q[k]));
  }
  return pi;
}

}  // namespace

Menu brute_menu(const Market& m, const ValueGrid& grid, const CostSpec& cost, double q_step) {
  const std::size_t K = grid.size();
  if (m.size() != K) throw Error(ErrorKind::PreconditionViolated, "market and value grid differ in size");
  if (K > 4) throw Error(ErrorKind::BudgetExceeded, "menu enumeration is limited to four values");
  if (!(q_step >= kMinQStep)) throw Error(ErrorKind::BudgetExceeded, "quality step below 1/400");
  const double qmax = efficient_quality(cost, grid.top());
  const auto G = static_cast<std::size_t>(std::ceil(qmax / q_step - 1e-9)) + 1;
  std::vector<std::size_t> types;
  for (std::size_t k = 0; k < K; ++k) {
    if (m.supported(k)) types.push_back(k);
  }
  if (static_cast<double>(G) * static_cast<double>(types.size()) > kBudget)
    throw Error(ErrorKind::BudgetExceeded, "quality grid too fine for enumeration");

  // Per-type contribution x_k (v_k q - c(q)) - rent passed to higher types,
  // which with local downward constraints binding is gap * (mass above) * q.
  std::vector<double> grid_q(G), grid_c(G);
  for (std::size_t j = 0; j < G; ++j) {
    grid_q[j] = std::min(qmax, static_cast<double>(j) * q_step);
    grid_c[j] = cost.cost(grid_q[j]);
  }
  const std::size_t n = types.size();
  std::vector<double> coef(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double above = 0.0;
    for (std::size_t l = i + 1; l < n; ++l) above += m[types[l]];
    const double gap = i + 1 < n ? grid[types[i + 1]] - grid[types[i]] : 0.0;
    coef[i] = m[types[i]] * grid[types[i]] - gap * above;
  }
  // best[i][j]: best total for types 0..i with q_i = grid_q[j]; arg[i][j]: chosen q_{i-1}.
  std::vector<std::vector<double>> best(n, std::vector<double>(G));
  std::vector<std::vector<std::size_t>> arg(n, std::vector<std::size_t>(G, 0));
  for (std::size_t i = 0; i < n; ++i) {
    const double x = m[types[i]];
    double run = -std::numeric_limits<double>::infinity();
    std::size_t run_arg = 0;
    for (std::size_t j = 0; j < G; ++j) {
      if (i > 0 && best[i - 1][j] >= run) {
        run = best[i - 1][j];
        run_arg = j;
      }
      const double own = coef[i] * grid_q[j] - x * grid_c[j];
      best[i][j] = own + (i > 0 ? run : 0.0);
      arg[i][j] = run_arg;
    }
  }
  std::vector<double> q(K, 0.0);
  if (n > 0) {
    std::size_t j = 0;
    for (std::size_t l = 0; l < G; ++l) {
      if (best[n - 1][l] >= best[n - 1][j]) j = l;
    }
    for (std::size_t i = n; i-- > 0;) {
      q[types[i]] = grid_q[j];
      j = arg[i][j];
    }
  }

  if (cost.type() == CostType::Isoelastic && n > 0) {
    const double gamma = cost.gamma();
    std::vector<double> polished = q;
    std::size_t start = 0;
    while (start < n) {
      std::size_t end = start;
      while (end + 1 < n && q[types[end + 1]] == q[types[start]]) ++end;
      double a = 0.0, b = 0.0;
      for (std::size_t i = start; i <= end; ++i) {
        a += coef[i];
        b += m[types[i]];
      }
      const double qb = a > 0.0 ? std::pow(a / b, 1.0 / (gamma - 1.0)) : 0.0;
      for (std::size_t i = start; i <= end; ++i) polished[types[i]] = qb;
      start = end + 1;
    }
    bool monotone = true;
    for (std::size_t i = 1; i < n; ++i) monotone = monotone && polished[types[i]] >= polished[types[i - 1]];
    if (monotone && profit_of(m, grid, cost, polished) >= profit_of(m, grid, cost, q)) q = polished;
  }
  return price_allocation(m, grid, q);
}

SurplusAccounts brute_accounts(const Market& m, const ValueGrid& grid, const CostSpec& cost, double q_step) {
  return menu_accounts(m, grid, cost, brute_menu(m, grid, cost, q_step));
}

BruteSegmentResult brute_segment(const Market& xstar, const ValueGrid& grid, const CostSpec& cost, double mesh,
                                 std::size_t max_segments, const Objective& objective, double q_step) {
  const std::size_t K = grid.size();
  if (xstar.size() != K) throw Error(ErrorKind::PreconditionViolated, "market and value grid differ in size");
  if (K > 3) throw Error(ErrorKind::BudgetExceeded, "segmentation search is limited to three values");
  if (!(mesh >= 1.0 / 64.0 - 1e-15)) throw Error(ErrorKind::BudgetExceeded, "mesh finer than 1/64");
  if (max_segments == 0) throw Error(ErrorKind::PreconditionViolated, "at least one segment is required");
  const auto den = static_cast<std::size_t>(std::llround(1.0 / mesh));

  std::vector<Market> cand{xstar};
  if (K == 1) {
    // Nothing to split.
  } else if (K == 2) {
    for (std::size_t i = 0; i <= den; ++i) {
      const double a = static_cast<double>(i) / den;
      cand.push_back(Market{{a, 1.0 - a}});
    }
  } else {
    for (std::size_t i = 0; i <= den; ++i) {
      for (std::size_t j = 0; i + j <= den; ++j) {
        const double a = static_cast<double>(i) / den, b = static_cast<double>(j) / den;
        cand.push_back(Market{{a, b, std::max(0.0, 1.0 - a - b)}});
      }
    }
  }
  std::vector<double> f(cand.size());
  parallel_for(cand.size(), [&](std::size_t i) { f[i] = objective.of(brute_accounts(cand[i], grid, cost, q_step)); });

  BruteSegmentResult res;
  res.candidates = cand.size();
  res.value = f[0];
  res.segmentation = {{1.0, xstar}};
  if (K == 1 || max_segments == 1) return res;

  if (K == 2) {
    const double xl = xstar[0];
    for (std::size_t a = 1; a < cand.size(); ++a) {
      for (std::size_t b = 1; b < cand.size(); ++b) {
        const double hi = cand[a][0], lo = cand[b][0];
        if (!(hi > xl && lo < xl)) continue;
        const double wa = (xl - lo) / (hi - lo);
        const double v = wa * f[a] + (1.0 - wa) * f[b];
        if (v > res.value + 1e-15) {
          res.value = v;
          res.segmentation = {{wa, cand[a]}, {1.0 - wa, cand[b]}};
        }
      }
    }
    return res;
  }

  if (max_segments < 3) throw Error(ErrorKind::PreconditionViolated, "three-value search needs three segments");
  // Weights solve max sum s_j f_j s.t. sum s_j x_j = x*, s >= 0. The
  // equalities become <= rows with a large bonus on total weight: every
  // candidate has unit mass, so full weight forces each row to bind.
  double scale = 1.0;
  for (double v : f) scale = std::max(scale, std::abs(v));
  const double M = 10.0 * scale;
  std::vector<std::vector<double>> A(K, std::vector<double>(cand.size()));
  std::vector<double> c(cand.size());
  for (std::size_t j = 0; j < cand.size(); ++j) {
    c[j] = f[j] + M;
    for (std::size_t k = 0; k < K; ++k) A[k][j] = cand[j][k];
  }
  const auto lp = lp::maximize(A, xstar.x, c);
  if (lp.status != lp::Status::Optimal) throw Error(ErrorKind::NumericalStall, "segment weight program failed");
  double total = 0.0, value = 0.0;
  Segmentation seg;
  for (std::size_t j = 0; j < cand.size(); ++j) {
    if (lp.x[j] <= 1e-14) continue;
    total += lp.x[j];
    value += lp.x[j] * f[j];
    seg.push_back({lp.x[j], cand[j]});
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorKind::NumericalStall, "segment weights do not sum to one");
  if (value > res.value) {
    res.value = value;
    res.segmentation = std::move(seg);
  }
  return res;
}

SlackModel calibrate_slack(const std::vector<CalibrationInstance>& set, const CostSpec& cost,
                           const Objective& objective, double coarse, double fine, double safety) {
  SlackModel s;
  s.coarse = coarse;
  s.fine = fine;
  s.safety = safety;
  double rate = 0.0;
  for (const auto& inst : set) {
    const double vc = brute_segment(inst.xstar, inst.grid, cost, coarse, 3, objective).value;
    const double vf = brute_segment(inst.xstar, inst.grid, cost, fine, 3, objective).value;
    s.extrapolated.push_back(2.0 * vf - vc);
    rate = std::max(rate, std::abs(vf - vc) / (coarse - fine));
  }
  s.C = safety * rate;
  return s;
}

}  // namespace segopt
