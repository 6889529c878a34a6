#include "segopt/simplex.hpp"

#include <cmath>
#include <limits>

#include "segopt/errors.hpp"

namespace segopt::lp {

namespace {

constexpr double kPivotTol = 1e-12;
constexpr std::size_t kDegenerateRun = 50;

}  // namespace

Result maximize(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                const std::vector<double>& c, std::size_t max_pivots) {
  const std::size_t m = b.size();
  const std::size_t n = c.size();
  if (A.size() != m) throw Error(ErrorKind::PreconditionViolated, "lp: row count mismatch");
  for (std::size_t i = 0; i < m; ++i) {
    if (A[i].size() != n) throw Error(ErrorKind::PreconditionViolated, "lp: column count mismatch");
    if (b[i] < 0.0) throw Error(ErrorKind::PreconditionViolated, "lp: negative right-hand side");
  }
  const std::size_t width = n + m + 1;  // structural, slack, rhs
  const std::size_t rhs = n + m;
  std::vector<double> T((m + 1) * width, 0.0);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return T[i * width + j]; };
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) at(i, j) = A[i][j];
    at(i, n + i) = 1.0;
    at(i, rhs) = b[i];
  }
  // Objective row holds reduced costs; its rhs entry holds minus the objective value.
  for (std::size_t j = 0; j < n; ++j) at(m, j) = c[j];
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) basis[i] = n + i;

  double cscale = 1.0;
  for (double v : c) cscale = std::max(cscale, std::abs(v));
  const double enter_tol = 1e-13 * cscale;

  Result r;
  bool bland = false;
  std::size_t degenerate = 0;
  while (true) {
    std::size_t s = width;
    double best = enter_tol;
    for (std::size_t j = 0; j < rhs; ++j) {
      const double d = at(m, j);
      if (d > best) {
        s = j;
        if (bland) break;
        best = d;
      } else if (bland && d > enter_tol) {
        s = j;
        break;
      }
    }
    if (s == width) {
      r.status = Status::Optimal;
      break;
    }
    std::size_t row = m;
    double ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const double a = at(i, s);
      if (a <= kPivotTol) continue;
      const double t = at(i, rhs) / a;
      if (row == m) {
        ratio = t;
        row = i;
        continue;
      }
      const double tie = 1e-15 * std::max(1.0, std::abs(ratio));
      if (t < ratio - tie || (std::abs(t - ratio) <= tie && basis[i] < basis[row])) {
        ratio = t;
        row = i;
      }
    }
    if (row == m) {
      r.status = Status::Unbounded;
      return r;
    }
    if (r.pivots++ >= max_pivots) {
      r.status = Status::Stalled;
      return r;
    }
    if (ratio <= 1e-14) {
      if (++degenerate >= kDegenerateRun) bland = true;
    } else {
      degenerate = 0;
    }
    const double p = at(row, s);
    for (std::size_t j = 0; j < width; ++j) at(row, j) /= p;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == row) continue;
      const double f = at(i, s);
      if (f == 0.0) continue;
      double* dst = &T[i * width];
      const double* src = &T[row * width];
      for (std::size_t j = 0; j < width; ++j) dst[j] -= f * src[j];
      dst[s] = 0.0;
    }
    basis[row] = s;
  }
  r.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n) r.x[basis[i]] = std::max(0.0, at(i, rhs));
  }
  r.y.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) r.y[i] = std::max(0.0, -at(m, n + i));
  r.value = 0.0;
  for (std::size_t j = 0; j < n; ++j) r.value += c[j] * r.x[j];
  return r;
}

}  // namespace segopt::lp
