#pragma once

#include <string>
#include <vector>

#include "segopt/cost.hpp"
#include "segopt/errors.hpp"
#include "segopt/market.hpp"

namespace segopt {

// Quality and payment per value; entries outside the market's support are 0
// and flagged as not offered.
struct Menu {
  std::vector<double> q;
  std::vector<double> t;
  std::vector<bool> offered;
};

// Seller-optimal menu. Virtual values are ironed by pool-adjacent-violators
// with weights x_k; q_k = Q(ironed phi_k); local downward constraints bind.
Menu optimal_menu(const Market& m, const ValueGrid& grid, const CostSpec& cost);

// Ironed virtual values over the support (0 elsewhere).
std::vector<double> ironed_virtual_values(const Market& m, const ValueGrid& grid);

// Prices a nondecreasing allocation with binding local downward constraints
// and zero rent for the lowest supported value.
Menu price_allocation(const Market& m, const ValueGrid& grid, std::vector<double> q);

struct SurplusAccounts {
  double consumer = 0.0;  // U
  double profit = 0.0;    // Pi
  double welfare = 0.0;   // W
  std::vector<double> rent;
  std::vector<double> quality;
  bool regular = false;
  // Sum_k x_k u_k(h_k); only meaningful for regular markets.
  double consumer_by_hazard = 0.0;
};

// Throws CrossCheckFailure when the two consumer-surplus routes disagree by
// more than 1e-8 on a regular market.
SurplusAccounts surplus_accounts(const Market& m, const ValueGrid& grid, const CostSpec& cost);

SurplusAccounts menu_accounts(const Market& m, const ValueGrid& grid, const CostSpec& cost, const Menu& menu);

// True when both menus agree on quality and payment at every value supported
// in `m` (tolerance scaled by max(1, |entry|)).
bool same_menu_on(const Market& m, const Menu& a, const Menu& b, double tol = 1e-9);

// Raised when the split loop hits its cap; carries the segments found so far
// (regular ones plus the unresolved remainder).
class DecompositionStall : public Error {
 public:
  DecompositionStall(const std::string& what, Segmentation partial)
      : Error(ErrorKind::DecompositionStall, what), partial_(std::move(partial)) {}
  const Segmentation& partial() const { return partial_; }

 private:
  Segmentation partial_;
};

// Splits an irregular market into regular markets that each keep the
// original optimal menu. Regular input returns the identity segmentation.
Segmentation regular_decomposition(const Market& m, const ValueGrid& grid, const CostSpec& cost);

}  // namespace segopt
