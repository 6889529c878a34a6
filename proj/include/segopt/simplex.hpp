#pragma once

#include <cstddef>
#include <vector>

namespace segopt::lp {

enum class Status { Optimal, Unbounded, Stalled };

struct Result {
  Status status = Status::Stalled;
  double value = 0.0;
  std::vector<double> x;  // primal solution, one entry per column
  std::vector<double> y;  // row duals, nonnegative at optimality
  std::size_t pivots = 0;
};

// Maximizes c.x subject to A x <= b and x >= 0, where b >= 0 so the origin is
// a feasible starting basis. A is dense and row-major (m rows, c.size() columns).
//
// Entering columns follow the largest reduced cost; after a run of degenerate
// pivots the rule switches permanently to Bland's lowest-index rule, which
// cannot cycle. Ratio-test ties go to the lowest basic index.
Result maximize(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                const std::vector<double>& c, std::size_t max_pivots = 200000);

}  // namespace segopt::lp
