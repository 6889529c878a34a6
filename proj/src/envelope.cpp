#include "segopt/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "segopt/errors.hpp"

namespace segopt {

const char* to_string(CurveKind kind) {
  switch (kind) {
    case CurveKind::Rent: return "rent";
    case CurveKind::Welfare: return "welfare";
    case CurveKind::Scalarized: return "scalarized";
  }
  return "unknown";
}

LocalObjective::LocalObjective(CostSpec cost, double v, CurveKind kind, double lambda, Orientation e)
    : cost_(std::move(cost)), v_(v), kind_(kind), lambda_(lambda), e_(e) {
  switch (kind_) {
    case CurveKind::Rent:
      weight_w_ = 0.0;
      weight_u_ = 1.0;
      break;
    case CurveKind::Welfare:
      weight_w_ = 1.0;
      weight_u_ = 0.0;
      break;
    case CurveKind::Scalarized:
      weight_w_ = e.e1 * lambda;
      weight_u_ = e.e2 * (1.0 - lambda) - e.e1 * lambda;
      break;
  }
}

double LocalObjective::right_derivative(double h) const {
  const double phi = v_ - h;
  if (phi <= 0.0) return 0.0;
  double du = 0.0;
  double dw = 0.0;
  if (cost_.smooth()) {
    const double qs = cost_.supply_slope(phi);
    du = cost_.supply(phi) - h * qs;
    // c'(Q(phi)) = phi, so d/dh [v Q - c(Q)] = -Q'(phi) (v - phi).
    dw = -h * qs;
  } else {
    du = cost_.supply_below(phi);
  }
  return weight_w_ * dw + weight_u_ * du;
}

namespace {

struct Sample {
  double h;
  bool keep;  // exact breakpoint or previously placed sample; wins on collisions
};

void merge_samples(std::vector<Sample>& pts, double scale) {
  std::stable_sort(pts.begin(), pts.end(), [](const Sample& a, const Sample& b) { return a.h < b.h; });
  const double tol = 1e-14 * std::max(1.0, scale);
  std::vector<Sample> out;
  out.reserve(pts.size());
  for (const auto& p : pts) {
    if (!out.empty() && p.h - out.back().h <= tol) {
      if (p.keep && !out.back().keep) out.back() = p;
      continue;
    }
    out.push_back(p);
  }
  pts.swap(out);
}

}  // namespace

RentCurve rent_curve(const CostSpec& cost, const ValueGrid& grid, std::size_t k, CurveKind kind, double lambda,
                     Orientation e, std::size_t n, const std::vector<double>& extra) {
  if (k >= grid.size()) throw Error(ErrorKind::PreconditionViolated, "value index out of range");
  if (kind == CurveKind::Rent && k + 1 == grid.size())
    throw Error(ErrorKind::PreconditionViolated, "the top value earns no rent");
  n = std::max<std::size_t>(n, 2);
  const double v = grid[k];
  RentCurve c{k, LocalObjective(cost, v, kind, lambda, e), {}, {}};

  std::vector<Sample> pts;
  pts.reserve(n + cost.slopes().size() + extra.size() + 3);
  for (std::size_t i = 0; i < n; ++i) pts.push_back({v * static_cast<double>(i) / static_cast<double>(n - 1), false});
  pts.push_back({0.0, true});
  pts.push_back({v, true});
  for (double s : cost.slopes()) {
    if (s > 0.0 && s < v) pts.push_back({v - s, true});
  }
  pts.push_back({peak_hazard(cost, v), true});
  for (double x : extra) {
    if (x >= 0.0 && x <= v) pts.push_back({x, true});
  }
  merge_samples(pts, v);
  c.h.reserve(pts.size());
  c.value.reserve(pts.size());
  for (const auto& p : pts) {
    c.h.push_back(p.h);
    c.value.push_back(c.obj(p.h));
  }
  return c;
}

void refine_curve(RentCurve& curve, const std::vector<double>& centers, double half_width, std::size_t points) {
  const double v = curve.obj.v();
  std::vector<Sample> pts;
  pts.reserve(curve.h.size() + centers.size() * points);
  for (double h : curve.h) pts.push_back({h, true});
  for (double c : centers) {
    const double a = std::max(0.0, c - half_width);
    const double b = std::min(v, c + half_width);
    if (b <= a || points < 2) continue;
    for (std::size_t i = 0; i < points; ++i)
      pts.push_back({a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1), false});
  }
  merge_samples(pts, v);
  std::vector<double> h, val;
  h.reserve(pts.size());
  val.reserve(pts.size());
  std::size_t old = 0;
  for (const auto& p : pts) {
    h.push_back(p.h);
    // Reuse existing evaluations; only new samples are computed.
    while (old < curve.h.size() && curve.h[old] < p.h) ++old;
    if (old < curve.h.size() && curve.h[old] == p.h) val.push_back(curve.value[old]);
    else val.push_back(curve.obj(p.h));
  }
  curve.h.swap(h);
  curve.value.swap(val);
}

double ConcaveEnvelope::operator()(double x) const {
  if (x >= h.back()) return value.back();
  if (x <= h.front()) return value.front();
  const std::size_t j = static_cast<std::size_t>(std::upper_bound(h.begin(), h.end(), x) - h.begin()) - 1;
  return value[j] + slope[j] * (x - h[j]);
}

ConcaveEnvelope concavify(const RentCurve& curve) {
  const auto& H = curve.h;
  const auto& V = curve.value;
  std::vector<std::size_t> hull;
  hull.reserve(H.size());
  for (std::size_t i = 0; i < H.size(); ++i) {
    while (hull.size() >= 2) {
      const std::size_t a = hull[hull.size() - 2];
      const std::size_t b = hull.back();
      const double s_ab = (V[b] - V[a]) / (H[b] - H[a]);
      const double s_bi = (V[i] - V[b]) / (H[i] - H[b]);
      if (s_ab - s_bi > 1e-12) break;
      hull.pop_back();
    }
    hull.push_back(i);
  }
  // Truncate at the maximum: the first vertex whose outgoing slope is not positive.
  std::size_t peak = 0;
  while (peak + 1 < hull.size()) {
    const std::size_t a = hull[peak], b = hull[peak + 1];
    if ((V[b] - V[a]) / (H[b] - H[a]) <= 0.0) break;
    ++peak;
  }
  hull.resize(peak + 1);

  ConcaveEnvelope env{{}, {}, {}, {}, curve.obj};
  for (std::size_t i : hull) {
    env.h.push_back(H[i]);
    env.value.push_back(V[i]);
  }
  double scale = 1.0;
  for (double x : V) scale = std::max(scale, std::abs(x));
  const double gap_tol = 1e-10 * scale;
  for (std::size_t j = 0; j + 1 < hull.size(); ++j) {
    const double s = (env.value[j + 1] - env.value[j]) / (env.h[j + 1] - env.h[j]);
    env.slope.push_back(s);
    bool gap = false;
    for (std::size_t i = hull[j] + 1; i < hull[j + 1] && !gap; ++i) {
      const double chord = env.value[j] + s * (H[i] - env.h[j]);
      gap = chord - V[i] > gap_tol;
    }
    env.gap.push_back(gap);
  }
  return env;
}

EnvelopeQuery envelope_query(const ConcaveEnvelope& env, double h) {
  const double tol = 1e-12 * std::max(1.0, env.obj.v());
  if (h < 0.0) {
    if (h < -tol) throw Error(ErrorKind::NegativeH, "envelope queried at h = " + std::to_string(h));
    h = 0.0;
  }
  const double inf = std::numeric_limits<double>::infinity();
  const std::size_t last = env.h.size() - 1;
  const bool smooth = env.obj.smooth();
  EnvelopeQuery q;

  // Slopes at breakpoint j, using the analytic derivative on touching sides of smooth curves.
  auto at_breakpoint = [&](std::size_t j) {
    q.value = env.value[j];
    q.support = {{env.h[j], 1.0}};
    const double d = smooth ? env.obj.right_derivative(env.h[j]) : 0.0;
    if (j == last) {
      q.slope_right = 0.0;
    } else {
      q.slope_right = (smooth && !env.gap[j]) ? d : env.slope[j];
    }
    if (j == 0) {
      q.slope_left = inf;
    } else {
      q.slope_left = (smooth && !env.gap[j - 1]) ? d : env.slope[j - 1];
    }
  };

  if (h >= env.peak_h() - tol) {
    at_breakpoint(last);
    if (h > env.peak_h() + tol) {
      q.slope_left = 0.0;
      q.exclusion = true;
    }
    return q;
  }
  const std::size_t j = static_cast<std::size_t>(std::upper_bound(env.h.begin(), env.h.end(), h) - env.h.begin()) - 1;
  if (h - env.h[j] <= tol) {
    at_breakpoint(j);
    return q;
  }
  if (env.h[j + 1] - h <= tol) {
    at_breakpoint(j + 1);
    return q;
  }
  q.value = env.value[j] + env.slope[j] * (h - env.h[j]);
  if (env.gap[j]) {
    const double len = env.h[j + 1] - env.h[j];
    q.support = {{env.h[j], (env.h[j + 1] - h) / len}, {env.h[j + 1], (h - env.h[j]) / len}};
    q.slope_left = q.slope_right = env.slope[j];
  } else {
    q.support = {{h, 1.0}};
    q.slope_left = q.slope_right = smooth ? env.obj.right_derivative(h) : env.slope[j];
  }
  return q;
}

}  // namespace segopt
