#include <cmath>

#include "doctest.h"
#include "segopt/errors.hpp"
#include "segopt/oracle.hpp"
#include "test_support.hpp"

using namespace segopt;
using doctest::Approx;

namespace {

const ValueGrid kV12({1.0, 2.0});
const ValueGrid kV123({1.0, 2.0, 3.0});
const CostSpec kQuad = CostSpec::isoelastic(2.0);

bool throws_kind(ErrorKind kind, auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind() == kind;
  }
  return false;
}

}  // namespace

TEST_CASE("enumerated menus") {
  const Menu a = brute_menu(Market{{2.0 / 3.0, 1.0 / 3.0}}, kV12, kQuad);
  CHECK(a.q[0] == Approx(0.5));
  CHECK(a.q[1] == Approx(2.0));
  const Menu b = brute_menu(Market{{0.5, 0.1, 0.4}}, kV123, kQuad);
  CHECK(b.q[0] == 0.0);
  CHECK(b.q[1] == 0.0);
  CHECK(b.q[2] == Approx(3.0));
  CHECK(brute_accounts(Market{{0.6, 0.4}}, kV12, kQuad).consumer == Approx(2.0 / 15.0));
}

TEST_CASE("enumeration agrees with the ironed menu") {
  testing::Rng rng(91);
  for (int t = 0; t < 80; ++t) {
    const std::size_t K = 1 + t % 4;
    const ValueGrid g = testing::random_grid(rng, K);
    const Market m = testing::random_market(rng, K);
    const auto a = brute_accounts(m, g, kQuad);
    const auto b = surplus_accounts(m, g, kQuad);
    CHECK(a.profit == Approx(b.profit).epsilon(1e-9));
    CHECK(a.consumer == Approx(b.consumer).epsilon(1e-6));
  }
}

TEST_CASE("oracle budgets") {
  CHECK(throws_kind(ErrorKind::BudgetExceeded,
                    [] { brute_menu(Market{{0.2, 0.2, 0.2, 0.2, 0.2}}, ValueGrid({1, 2, 3, 4, 5}), kQuad); }));
  CHECK(throws_kind(ErrorKind::BudgetExceeded, [] { brute_menu(Market{{0.5, 0.5}}, kV12, kQuad, 1.0 / 1000.0); }));
  CHECK(throws_kind(ErrorKind::BudgetExceeded,
                    [] { brute_segment(Market{{0.25, 0.25, 0.25, 0.25}}, ValueGrid({1, 2, 3, 4}), kQuad, 0.25); }));
  CHECK(throws_kind(ErrorKind::BudgetExceeded, [] { brute_segment(Market{{0.5, 0.5}}, kV12, kQuad, 1.0 / 128.0); }));
}

TEST_CASE("direct search on the binary market") {
  const auto r = brute_segment(Market{{0.5, 0.5}}, kV12, kQuad, 1.0 / 64.0);
  CHECK(r.value <= 0.125 + 1e-12);
  CHECK(r.value >= 0.125 - 1e-3);
  CHECK(check_aggregation(r.segmentation, Market{{0.5, 0.5}}).pass);
  CHECK(r.candidates == 66);
}

TEST_CASE("direct search on three values") {
  const Market x{{17.0 / 24.0, 1.0 / 8.0, 1.0 / 6.0}};
  const auto r = brute_segment(x, kV123, kQuad, 1.0 / 32.0);
  CHECK(r.value <= 193.0 / 640.0 + 1e-9);
  CHECK(r.value >= 193.0 / 640.0 - 5e-3);
  CHECK(check_aggregation(r.segmentation, x, 1e-9).pass);
  double s = 0.0;
  for (const auto& p : r.segmentation) s += p.weight * brute_accounts(p.market, kV123, kQuad).consumer;
  CHECK(s == Approx(r.value).epsilon(1e-9));
}

TEST_CASE("slack calibration") {
  testing::Rng rng(92);
  std::vector<CalibrationInstance> set;
  for (int i = 0; i < 4; ++i) set.push_back({testing::random_market(rng, 2, 0.05), testing::random_grid(rng, 2)});
  const auto s = calibrate_slack(set, kQuad);
  CHECK(s.C >= 0.0);
  CHECK(s.extrapolated.size() == 4);
  CHECK(s.slack(1.0 / 64.0) == Approx(s.C / 64.0));
}
