#include <cmath>

#include "doctest.h"
#include "segopt/oracle.hpp"
#include "segopt/screening.hpp"
#include "test_support.hpp"

using namespace segopt;
using doctest::Approx;

namespace {

const ValueGrid kV12({1.0, 2.0});
const ValueGrid kV123({1.0, 2.0, 3.0});
const CostSpec kQuad = CostSpec::isoelastic(2.0);

void check_ic_ir(const Market& m, const ValueGrid& g, const Menu& menu) {
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!m.supported(k)) continue;
    const double own = g[k] * menu.q[k] - menu.t[k];
    CHECK(own >= -1e-12);
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (m.supported(j)) CHECK(own >= g[k] * menu.q[j] - menu.t[j] - 1e-10);
    }
  }
}

}  // namespace

TEST_CASE("binary menu with a served low type") {
  const Market m{{2.0 / 3.0, 1.0 / 3.0}};
  const Menu menu = optimal_menu(m, kV12, kQuad);
  CHECK(menu.q[0] == Approx(0.5));
  CHECK(menu.q[1] == Approx(2.0));
  CHECK(menu.t[0] == Approx(0.5));
  CHECK(menu.t[1] == Approx(0.5 + 2.0 * 1.5));
  const auto a = surplus_accounts(m, kV12, kQuad);
  CHECK(a.consumer == Approx(1.0 / 6.0));
  CHECK(a.regular);
}

TEST_CASE("binary menu excludes the low type at one half") {
  const Market m{{0.5, 0.5}};
  const Menu menu = optimal_menu(m, kV12, kQuad);
  CHECK(menu.q[0] == Approx(0.0));
  CHECK(surplus_accounts(m, kV12, kQuad).consumer == Approx(0.0));
}

TEST_CASE("ironing pools an irregular pair") {
  const Market m{{0.5, 0.1, 0.4}};
  const auto phi = ironed_virtual_values(m, kV123);
  CHECK(phi[0] == Approx(-1.0 / 3.0));
  CHECK(phi[1] == Approx(-1.0 / 3.0));
  CHECK(phi[2] == Approx(3.0));
  const Menu menu = optimal_menu(m, kV123, kQuad);
  CHECK(menu.q[0] == 0.0);
  CHECK(menu.q[1] == 0.0);
  CHECK(menu.q[2] == Approx(3.0));
  const auto a = surplus_accounts(m, kV123, kQuad);
  CHECK_FALSE(a.regular);
  CHECK(a.consumer == Approx(0.0));
  CHECK(a.profit == Approx(0.4 * 4.5));
}

TEST_CASE("accounts of the split markets") {
  // x^ = (40/59, 760/4661, 741/4661): hazards (19/40, 39/40).
  const Market xh{{40.0 / 59.0, 760.0 / 4661.0, 741.0 / 4661.0}};
  const auto a = surplus_accounts(xh, kV123, kQuad);
  const double u0 = 19.0 / 40.0 * (1.0 - 19.0 / 40.0);
  const double u1 = 39.0 / 40.0 * (2.0 - 39.0 / 40.0);
  CHECK(a.consumer == Approx(40.0 / 59.0 * u0 + 760.0 / 4661.0 * u1).epsilon(1e-12));
  CHECK(a.consumer == Approx(0.332021).epsilon(1e-6));

  const Market xt{{80.0 / 99.0, 0.0, 19.0 / 99.0}};
  const auto b = surplus_accounts(xt, kV123, kQuad);
  CHECK(b.consumer == Approx(80.0 / 99.0 * 0.475 * 0.525).epsilon(1e-12));
}

TEST_CASE("accounts of the two-value frontier instance") {
  const auto a = surplus_accounts(Market{{0.6, 0.4}}, kV12, kQuad);
  CHECK(a.consumer == Approx(2.0 / 15.0).epsilon(1e-14));
  CHECK(a.profit == Approx(5.0 / 6.0).epsilon(1e-14));
  CHECK(a.welfare == Approx(29.0 / 30.0).epsilon(1e-14));
}

TEST_CASE("degenerate market at the top value") {
  const auto a = surplus_accounts(Market{{0.0, 0.0, 1.0}}, kV123, kQuad);
  CHECK(a.consumer == 0.0);
  CHECK(a.profit == Approx(4.5));
  CHECK(a.welfare == Approx(4.5));
}

TEST_CASE("step cost menu") {
  const CostSpec step = CostSpec::step({0.0, 0.75});
  const Market m{{0.5, 0.5}};
  // Hazard 1 at v = 1 gives phi = 0, so the low type still gets the free unit.
  const Menu menu = optimal_menu(m, kV12, step);
  CHECK(menu.q[0] == 1.0);
  CHECK(menu.q[1] == 2.0);
  check_ic_ir(m, kV12, menu);
}

TEST_CASE("optimal menus are incentive compatible and balance the accounts") {
  testing::Rng rng(21);
  const CostSpec costs[] = {CostSpec::isoelastic(1.5), kQuad, CostSpec::isoelastic(3.0),
                            CostSpec::step({0.0, 0.5, 1.5})};
  for (int t = 0; t < 400; ++t) {
    const std::size_t K = 1 + t % 6;
    const ValueGrid g = testing::random_grid(rng, K);
    const Market m = testing::random_market(rng, K, t % 3 == 0 ? 0.0 : 1e-3);
    const auto& c = costs[t % 4];
    const Menu menu = optimal_menu(m, g, c);
    check_ic_ir(m, g, menu);
    for (std::size_t k = 1; k < K; ++k) CHECK(menu.q[k] + 1e-12 >= menu.q[k - 1]);
    const auto a = surplus_accounts(m, g, c);
    CHECK(a.consumer + a.profit == Approx(a.welfare).epsilon(1e-12));
    CHECK(a.consumer >= -1e-12);
  }
}

TEST_CASE("consumer surplus through hazards on regular markets") {
  testing::Rng rng(22);
  const CostSpec costs[] = {CostSpec::isoelastic(1.5), kQuad, CostSpec::isoelastic(3.0)};
  int seen = 0;
  while (seen < 300) {
    const std::size_t K = 2 + rng() % 5;
    const ValueGrid g = testing::random_grid(rng, K);
    const Market m = testing::random_market(rng, K);
    if (!local_stats(m, g).regular) continue;
    const auto a = surplus_accounts(m, g, costs[seen % 3]);
    CHECK(std::abs(a.consumer - a.consumer_by_hazard) <= 1e-8);
    ++seen;
  }
}

TEST_CASE("no grid allocation beats the optimal menu") {
  testing::Rng rng(23);
  for (int t = 0; t < 60; ++t) {
    const std::size_t K = 1 + t % 3;
    const ValueGrid g = testing::random_grid(rng, K);
    const Market m = testing::random_market(rng, K);
    const CostSpec c = t % 2 ? kQuad : CostSpec::isoelastic(3.0);
    const auto best = surplus_accounts(m, g, c);
    const auto brute = brute_accounts(m, g, c);
    CHECK(brute.profit <= best.profit + 1e-10);
    CHECK(brute.profit >= best.profit - 1e-3);
  }
}

TEST_CASE("regular decomposition preserves the menu") {
  const Market irregular{{0.5, 0.1, 0.4}};
  const Segmentation seg = regular_decomposition(irregular, kV123, kQuad);
  CHECK(seg.size() >= 2);
  CHECK(check_aggregation(seg, irregular).pass);
  const Menu menu = optimal_menu(irregular, kV123, kQuad);
  for (const auto& s : seg) {
    CHECK(local_stats(s.market, kV123).regular);
    CHECK(same_menu_on(s.market, optimal_menu(s.market, kV123, kQuad), menu));
  }

  const Market regular{{17.0 / 24.0, 1.0 / 8.0, 1.0 / 6.0}};
  const Segmentation id = regular_decomposition(regular, kV123, kQuad);
  REQUIRE(id.size() == 1);
  CHECK(id[0].weight == 1.0);

  testing::Rng rng(24);
  int irregular_seen = 0;
  for (int t = 0; t < 300; ++t) {
    const std::size_t K = 3 + t % 3;
    const ValueGrid g = testing::random_grid(rng, K);
    const Market m = testing::random_market(rng, K);
    if (local_stats(m, g).regular) continue;
    ++irregular_seen;
    const Segmentation parts = regular_decomposition(m, g, kQuad);
    CHECK(check_aggregation(parts, m).pass);
    const Menu base = optimal_menu(m, g, kQuad);
    for (const auto& s : parts) {
      CHECK(local_stats(s.market, g).regular);
      CHECK(same_menu_on(s.market, optimal_menu(s.market, g, kQuad), base, 1e-7));
    }
  }
  CHECK(irregular_seen > 10);
}
