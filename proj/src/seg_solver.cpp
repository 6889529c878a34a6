#include "segopt/seg_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "segopt/errors.hpp"
#include "segopt/simplex.hpp"

namespace segopt {

double Objective::of(const SurplusAccounts& a) const {
  switch (kind) {
    case CurveKind::Rent: return a.consumer;
    case CurveKind::Welfare: return a.welfare;
    case CurveKind::Scalarized: return e.e1 * lambda * a.profit + e.e2 * (1.0 - lambda) * a.consumer;
  }
  return 0.0;
}

namespace {

double top_weight_w(const Objective& o) {
  switch (o.kind) {
    case CurveKind::Rent: return 0.0;
    case CurveKind::Welfare: return 1.0;
    case CurveKind::Scalarized: return o.e.e1 * o.lambda;
  }
  return 0.0;
}

void check_dims(const Market& xstar, const ValueGrid& grid) {
  if (xstar.size() != grid.size())
    throw Error(ErrorKind::PreconditionViolated, "market and value grid differ in size");
}

struct LpOutcome {
  std::vector<double> hD;  // per k, NaN where inactive
  std::vector<double> mu;
  std::vector<double> nu;
  std::vector<double> mass;  // sum of alpha per active k
  std::size_t pivots = 0;
};

// Columns are hull breakpoints j >= 1 of each active envelope, weighted by
// alpha_kj; the breakpoint at h = 0 absorbs 1 - sum_j alpha_kj.
LpOutcome solve_lp(const std::vector<ConcaveEnvelope>& envs, const Market& xstar, const std::vector<double>& budget) {
  const std::size_t K1 = envs.size();
  std::vector<std::size_t> conv_row(K1, 0);
  std::size_t rows = K1;
  for (std::size_t k = 0; k < K1; ++k) {
    if (xstar[k] > 0.0) conv_row[k] = rows++;
  }
  struct Col {
    std::size_t k, j;
  };
  std::vector<Col> cols;
  for (std::size_t k = 0; k < K1; ++k) {
    if (xstar[k] <= 0.0) continue;
    for (std::size_t j = 1; j < envs[k].h.size(); ++j) cols.push_back({k, j});
  }
  std::vector<std::vector<double>> A(rows, std::vector<double>(cols.size(), 0.0));
  std::vector<double> b(rows, 1.0);
  std::vector<double> c(cols.size(), 0.0);
  for (std::size_t i = 0; i < K1; ++i) b[i] = std::max(0.0, budget[i]);
  for (std::size_t col = 0; col < cols.size(); ++col) {
    const auto [k, j] = cols[col];
    const auto& env = envs[k];
    c[col] = xstar[k] * (env.value[j] - env.value[0]);
    for (std::size_t i = 0; i <= k; ++i) A[i][col] = xstar[k] * env.h[j];
    A[conv_row[k]][col] = 1.0;
  }
  LpOutcome out;
  out.hD.assign(K1, std::numeric_limits<double>::quiet_NaN());
  out.mass.assign(K1, 0.0);
  out.mu.assign(K1, 0.0);
  out.nu.assign(K1, 0.0);
  for (std::size_t k = 0; k < K1; ++k) {
    if (xstar[k] > 0.0) out.hD[k] = 0.0;
  }
  if (cols.empty()) return out;
  const auto res = lp::maximize(A, b, c);
  if (res.status == lp::Status::Unbounded)
    throw Error(ErrorKind::Infeasible, "bound program reported unbounded; envelopes are malformed");
  if (res.status != lp::Status::Optimal) throw Error(ErrorKind::NumericalStall, "bound program did not converge");
  out.pivots = res.pivots;
  for (std::size_t col = 0; col < cols.size(); ++col) {
    const auto [k, j] = cols[col];
    out.hD[k] += res.x[col] * envs[k].h[j];
    out.mass[k] += res.x[col];
  }
  for (std::size_t i = 0; i < K1; ++i) out.mu[i] = res.y[i];
  for (std::size_t k = 0; k < K1; ++k) {
    if (xstar[k] > 0.0) out.nu[k] = res.y[conv_row[k]];
  }
  return out;
}

// Widest sample interval touching c.
double local_spacing(const std::vector<double>& h, double c) {
  const auto it = std::lower_bound(h.begin(), h.end(), c);
  const auto i = static_cast<std::size_t>(it - h.begin());
  double gap = 0.0;
  if (i > 0 && i < h.size()) gap = h[i] - h[i - 1];
  if (i < h.size() && h[i] == c) {
    if (i > 0) gap = std::max(gap, h[i] - h[i - 1]);
    if (i + 1 < h.size()) gap = std::max(gap, h[i + 1] - h[i]);
  }
  return gap;
}

}  // namespace

double no_segmentation_surplus(const Market& xstar, const ValueGrid& grid, const CostSpec& cost) {
  const auto st = local_stats(xstar, grid);
  double u = 0.0;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    if (xstar.supported(k)) u += xstar[k] * rent_at(cost, grid[k], st.hazard[k]);
  }
  return u;
}

bool mhr_holds(const Market& xstar, const ValueGrid& grid) {
  const auto D = demand_of(xstar);
  std::optional<double> prev;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    if (xstar[k] <= 0.0) return false;
    const double m = (grid[k + 1] - grid[k]) * D[k] / xstar[k];
    if (prev && m > *prev + 1e-12 * std::max(1.0, std::abs(*prev))) return false;
    prev = m;
  }
  return true;
}

bool slopes_admit_monotone_selection(const SolveReport& report, const Market& xstar, double tol) {
  double s = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < report.support.size(); ++k) {
    if (xstar[k] <= 0.0) continue;
    const auto& q = report.support[k];
    const double lo = std::max(s, q.slope_right);
    if (lo > q.slope_left + tol) return false;
    s = lo;
  }
  return true;
}

std::optional<SolveReport> fast_path(const Market& xstar, const ValueGrid& grid, const CostSpec& cost,
                                     const SolveOptions& options) {
  check_dims(xstar, grid);
  const std::size_t K = grid.size();
  if (!cost.smooth() || K < 2) return std::nullopt;
  const auto shape = mc_shape(cost, grid);
  if (!shape.conv_mc_holds || !mhr_holds(xstar, grid)) return std::nullopt;

  const auto st = local_stats(xstar, grid);
  SolveReport r;
  r.objective = Objective::consumer();
  r.fast_path_used = true;
  r.D = quasi_from_demand(demand_of(xstar));
  r.hD.resize(K - 1);
  r.mu.assign(K - 1, 0.0);
  r.support.resize(K - 1);
  r.cutoff = K - 1;
  double prev_slope = 0.0;
  for (std::size_t k = 0; k + 1 < K; ++k) {
    const double v = grid[k];
    const double hs = st.hazard[k];
    const double hb = shape.hbar[k];
    r.hD[k] = hs;
    auto curve = rent_curve(cost, grid, k, CurveKind::Rent, 0.0, {}, options.h_grid, {hs});
    r.envelopes.push_back(concavify(curve));
    const bool below = hs <= hb + 1e-12 * std::max(1.0, v);
    if (below) r.cutoff = std::min(*r.cutoff, k);
    EnvelopeQuery q;
    if (below) {
      q.value = rent_at(cost, v, hs);
      q.support = {{hs, 1.0}};
      q.slope_left = q.slope_right = r.envelopes.back().obj.right_derivative(hs);
    } else {
      q.value = rent_at(cost, v, hb);
      q.support = {{hb, 1.0}};
      q.slope_left = q.slope_right = 0.0;
      q.exclusion = true;
      r.gains += xstar[k] * (q.value - rent_at(cost, v, hs));
    }
    r.value += xstar[k] * q.value;
    r.mu[k] = q.slope_right - prev_slope;
    prev_slope = q.slope_right;
    r.support[k] = q;
  }
  double residual = 0.0;
  for (double m : r.mu) residual = std::max(residual, -m);
  r.kkt_residual = residual;
  r.slopes_nondecreasing = slopes_admit_monotone_selection(r, xstar);
  return r;
}

SolveReport solve_bound(const Market& xstar, const ValueGrid& grid, const CostSpec& cost, const Objective& objective,
                        const SolveOptions& options) {
  check_dims(xstar, grid);
  const std::size_t K = grid.size();
  SolveReport r;
  r.objective = objective;
  r.top_term = xstar[K - 1] * top_weight_w(objective) * welfare_at(cost, grid.top(), 0.0);
  r.value = r.top_term;
  r.D.d.assign(K, 0.0);
  if (K == 1) {
    r.slopes_nondecreasing = true;
    return r;
  }
  if (objective.kind == CurveKind::Rent && options.allow_fast_path) {
    if (auto fp = fast_path(xstar, grid, cost, options)) return *fp;
  }

  const auto st = local_stats(xstar, grid);
  const auto dstar = demand_of(xstar);
  const auto budget = tail_budget(quasi_from_demand(dstar), grid);
  std::vector<RentCurve> curves;
  for (std::size_t k = 0; k + 1 < K; ++k) {
    std::vector<double> extra;
    if (xstar.supported(k) && st.hazard[k] <= grid[k]) extra.push_back(st.hazard[k]);
    curves.push_back(rent_curve(cost, grid, k, objective.kind, objective.lambda, objective.e, options.h_grid, extra));
  }

  LpOutcome lp;
  for (std::size_t round = 0;; ++round) {
    r.envelopes.clear();
    for (const auto& c : curves) r.envelopes.push_back(concavify(c));
    lp = solve_lp(r.envelopes, xstar, budget);
    r.lp_pivots += lp.pivots;
    if (!cost.smooth() || round >= options.refine_rounds) break;
    bool refined = false;
    for (std::size_t k = 0; k + 1 < K; ++k) {
      if (!xstar.supported(k)) continue;
      std::vector<double> centers{lp.hD[k]};
      for (const auto& p : envelope_query(r.envelopes[k], lp.hD[k]).support) centers.push_back(p.h);
      // The optimum can move between rounds, so each window is sized by the
      // sample spacing actually present around its center.
      for (double c : centers) {
        const double gap = local_spacing(curves[k].h, c);
        if (gap <= options.refine_floor * grid[k]) continue;
        refine_curve(curves[k], {c}, 4.0 * gap, 33);
        refined = true;
      }
    }
    if (!refined) break;
  }

  r.hD.assign(K - 1, std::nullopt);
  r.support.assign(K - 1, EnvelopeQuery{});
  r.mu = lp.mu;
  for (std::size_t k = 0; k + 1 < K; ++k) {
    if (!xstar.supported(k)) continue;
    const double h = std::max(0.0, lp.hD[k]);
    r.hD[k] = h;
    r.support[k] = envelope_query(r.envelopes[k], h);
    r.value += xstar[k] * r.support[k].value;
    r.D.d[k + 1] = xstar[k] * h / (grid[k + 1] - grid[k]);
  }
  const auto used = tail_budget(r.D, grid);
  double residual = 0.0;
  for (std::size_t i = 0; i + 1 < K; ++i) {
    const double slack = budget[i] - used[i];
    if (slack < -1e-9 * std::max(1.0, budget[i])) throw Error(ErrorKind::Infeasible, "bound program broke a tail-sum constraint");
    residual = std::max(residual, std::abs(r.mu[i] * slack));
  }
  for (std::size_t k = 0; k + 1 < K; ++k) {
    if (xstar.supported(k)) residual = std::max(residual, std::abs(lp.nu[k] * (1.0 - lp.mass[k])));
  }
  r.kkt_residual = residual;
  r.slopes_nondecreasing = slopes_admit_monotone_selection(r, xstar);
  return r;
}

namespace {

struct Unscaled {
  double sigma;
  std::vector<double> z;
};

// Gap to the next supported value above j times the mass above j.
double hazard_numerator(const Unscaled& m, const ValueGrid& grid, std::size_t j) {
  double tail = 0.0;
  std::optional<std::size_t> next;
  for (std::size_t i = j + 1; i < m.z.size(); ++i) {
    if (m.z[i] > 0.0) {
      if (!next) next = i;
      tail += m.z[i];
    }
  }
  return next ? (grid[*next] - grid[j]) * tail : 0.0;
}

Segmentation rescale(const std::vector<Unscaled>& ms) {
  Segmentation seg;
  for (const auto& m : ms) {
    double total = 0.0;
    for (double z : m.z) total += z;
    if (total <= 0.0) continue;
    const double w = m.sigma * total;
    if (w < 1e-14) continue;
    Market x{m.z};
    for (double& v : x.x) v /= total;
    seg.push_back({w, std::move(x)});
  }
  return seg;
}

Segmentation build_gapless(const SolveReport& report, const Market& xstar, const ValueGrid& grid) {
  const std::size_t K = grid.size();
  const std::size_t cut = report.cutoff.value_or(K - 1);
  // Full-support market whose hazards are min(hbar_k, h*_k).
  std::vector<double> z(K, 0.0), D(K, 0.0);
  z[K - 1] = 1.0;
  D[K - 1] = 1.0;
  for (std::size_t k = K - 1; k-- > 0;) {
    const double h = report.support[k].support.front().h;
    z[k] = (grid[k + 1] - grid[k]) * D[k + 1] / h;
    D[k] = z[k] + D[k + 1];
  }
  // Market j is the conditional of z on {v_j, ..., v_K}.
  auto entry = [&](std::size_t j, std::size_t i) { return i < j ? 0.0 : z[i] / D[j]; };
  std::vector<double> sigma(cut + 1, 0.0);
  double used = 0.0;
  for (std::size_t j = 0; j < cut; ++j) {
    double covered = 0.0;
    for (std::size_t l = 0; l < j; ++l) covered += sigma[l] * entry(l, j);
    sigma[j] = (xstar[j] - covered) / entry(j, j);
    used += sigma[j];
  }
  sigma[cut] = 1.0 - used;
  Segmentation seg;
  for (std::size_t j = 0; j <= cut; ++j) {
    if (sigma[j] < -1e-12) throw Error(ErrorKind::RegularityBreach, "gapless family produced a negative weight");
    if (sigma[j] <= 1e-14) continue;
    Market x{std::vector<double>(K, 0.0)};
    for (std::size_t i = j; i < K; ++i) x.x[i] = entry(j, i);
    seg.push_back({sigma[j], std::move(x)});
  }
  return seg;
}

}  // namespace

Segmentation build_segmentation(const SolveReport& report, const Market& xstar, const ValueGrid& grid,
                                const CostSpec& cost) {
  (void)cost;
  check_dims(xstar, grid);
  const std::size_t K = grid.size();
  if (K == 1) return {{1.0, xstar}};
  if (report.fast_path_used) return build_gapless(report, xstar, grid);

  const double htol = 1e-12 * std::max(1.0, grid.top());
  std::vector<Unscaled> ms{{1.0, xstar.x}};
  for (std::size_t j = K - 1; j-- > 0;) {
    if (!xstar.supported(j)) continue;
    const auto& targets = report.support[j].support;
    double zero_mass = 0.0;
    struct Need {
      double h;
      double budget;
    };
    std::vector<Need> needs;
    for (const auto& p : targets) {
      if (p.weight <= 0.0) continue;
      if (p.h <= htol) zero_mass += p.weight * xstar[j];
      else needs.push_back({p.h, p.weight * xstar[j] * p.h});
    }
    // Markets that still contain v_{j+1} come first.
    std::stable_partition(ms.begin(), ms.end(), [&](const Unscaled& m) { return m.z[j + 1] > 0.0; });
    std::vector<double> numer(ms.size());
    for (std::size_t i = 0; i < ms.size(); ++i) numer[i] = hazard_numerator(ms[i], grid, j);

    std::vector<Unscaled> next;
    std::vector<bool> assigned(ms.size(), false);
    if (zero_mass > 0.0) {
      double sigma0 = 0.0;
      for (std::size_t i = 0; i < ms.size(); ++i) {
        if (numer[i] == 0.0) sigma0 += ms[i].sigma;
      }
      if (sigma0 > 0.0) {
        for (std::size_t i = 0; i < ms.size(); ++i) {
          if (numer[i] != 0.0) continue;
          Unscaled m = ms[i];
          m.z[j] = zero_mass / sigma0;
          next.push_back(std::move(m));
          assigned[i] = true;
        }
      } else {
        // Carve a market with nothing above v_j out of the first one: halving its
        // weight and doubling its upper part leaves every upper aggregate intact.
        Unscaled& src = ms.front();
        src.sigma *= 0.5;
        for (std::size_t i = j + 1; i < K; ++i) src.z[i] *= 2.0;
        numer.front() *= 2.0;
        Unscaled m{src.sigma, src.z};
        for (std::size_t i = j + 1; i < K; ++i) m.z[i] = 0.0;
        m.z[j] = zero_mass / m.sigma;
        next.push_back(std::move(m));
      }
    }
    std::size_t t = 0;
    for (std::size_t i = 0; i < ms.size(); ++i) {
      if (assigned[i]) continue;
      Unscaled m = ms[i];
      double left = m.sigma;
      const double N = numer[i];
      while (N > 0.0 && t < needs.size() && left > 0.0) {
        const double offer = left * N;
        Unscaled piece = m;
        piece.z[j] = N / needs[t].h;
        if (offer <= needs[t].budget * (1.0 + 1e-13)) {
          piece.sigma = left;
          needs[t].budget -= offer;
          left = 0.0;
        } else {
          piece.sigma = needs[t].budget / N;
          left -= piece.sigma;
          needs[t].budget = 0.0;
          if (left <= 1e-15 * m.sigma) left = 0.0;
        }
        next.push_back(std::move(piece));
        if (needs[t].budget <= 1e-14 * std::max(1.0, xstar[j] * needs[t].h)) ++t;
      }
      if (left > 0.0) {
        m.sigma = left;
        m.z[j] = 0.0;
        next.push_back(std::move(m));
      }
    }
    for (; t < needs.size(); ++t) {
      if (needs[t].budget > 1e-9 * std::max(1.0, xstar[j] * needs[t].h))
        throw Error(ErrorKind::Infeasible, "hazard budget exhausted at value index " + std::to_string(j));
    }
    ms.swap(next);
  }
  return rescale(ms);
}

VerificationReport verify_segmentation(const Segmentation& seg, const Market& xstar, const ValueGrid& grid,
                                       const CostSpec& cost, const SolveReport& report) {
  check_dims(xstar, grid);
  const std::size_t K = grid.size();
  VerificationReport v;
  v.bound = report.value;
  auto fail = [&](const std::string& why) {
    if (v.first_failure.empty()) v.first_failure = why;
  };
  v.aggregation = check_aggregation(seg, xstar);
  if (!v.aggregation.pass) fail("aggregation error " + std::to_string(v.aggregation.max_error));

  const double stol = kSupportTol * std::max(1.0, grid.top());
  std::vector<double> num(K > 0 ? K - 1 : 0, 0.0), den(K > 0 ? K - 1 : 0, 0.0);
  for (std::size_t i = 0; i < seg.size(); ++i) {
    const auto& x = seg[i].market;
    const auto st = local_stats(x, grid);
    v.regular.push_back(st.regular);
    if (!st.regular) fail("segment " + std::to_string(i) + " is irregular");
    for (std::size_t k = 0; k + 1 < K; ++k) {
      if (!x.supported(k)) continue;
      bool pass = false;
      if (k < report.support.size()) {
        for (const auto& p : report.support[k].support) pass = pass || std::abs(st.hazard[k] - p.h) <= stol;
      }
      v.support.push_back({i, k, st.hazard[k], pass});
      if (!pass) {
        v.support_pass = false;
        fail("segment " + std::to_string(i) + " hazard at value " + std::to_string(k) + " is off the envelope support");
      }
      num[k] += seg[i].weight * x[k] * st.hazard[k];
      den[k] += seg[i].weight * x[k];
    }
    SurplusAccounts acc;
    try {
      acc = surplus_accounts(x, grid, cost);
    } catch (const Error& e) {
      fail(e.what());
      acc = menu_accounts(x, grid, cost, optimal_menu(x, grid, cost));
    }
    v.achieved += seg[i].weight * report.objective.of(acc);
  }
  v.hazard_average.assign(K > 0 ? K - 1 : 0, std::nullopt);
  for (std::size_t k = 0; k + 1 < K; ++k) {
    if (den[k] <= 0.0 || k >= report.hD.size() || !report.hD[k]) continue;
    const double avg = num[k] / den[k];
    v.hazard_average[k] = avg;
    const double target = *report.hD[k];
    bool pass = std::abs(avg - target) <= kHazardAverageTol;
    // On the flat tail any average between the peak and h^D attains the same value.
    if (!pass && report.support[k].exclusion) {
      const double peak = report.envelopes[k].peak_h();
      pass = avg >= peak - kHazardAverageTol && avg <= target + kHazardAverageTol;
    }
    if (!pass) {
      v.hazard_average_pass = false;
      fail("average hazard at value " + std::to_string(k) + " is " + std::to_string(avg) + " vs " +
           std::to_string(target));
    }
  }
  v.achieved_pass = std::abs(v.achieved - v.bound) <= kAchievedTol;
  if (!v.achieved_pass) fail("achieved " + std::to_string(v.achieved) + " vs bound " + std::to_string(v.bound));
  bool all_regular = std::all_of(v.regular.begin(), v.regular.end(), [](bool b) { return b; });
  v.all_pass = v.aggregation.pass && all_regular && v.support_pass && v.hazard_average_pass && v.achieved_pass;
  return v;
}

}  // namespace segopt
