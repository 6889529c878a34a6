#include <cmath>

#include "doctest.h"
#include "segopt/analysis.hpp"
#include "segopt/seg_solver.hpp"
#include "test_support.hpp"

using namespace segopt;
using doctest::Approx;

namespace {

const ValueGrid kV12({1.0, 2.0});
const ValueGrid kV123({1.0, 2.0, 3.0});
const ValueGrid kV345({3.0, 4.0, 5.0});
const CostSpec kQuad = CostSpec::isoelastic(2.0);

}  // namespace

TEST_CASE("binary certificates") {
  const auto in = no_seg_test(Market{{0.75, 0.25}}, kV12, kQuad);
  CHECK(in.in_O);
  CHECK(in.condition.empty());
  CHECK(std::abs(in.gap[0]) < kTouchTol);

  const auto out = no_seg_test(Market{{0.5, 0.5}}, kV12, kQuad);
  CHECK_FALSE(out.in_O);
  CHECK(out.condition == "touching");
  REQUIRE(out.index.has_value());
  CHECK(*out.index == 0);
  // h* = 1 lies on the flat tail: envelope 1/4 against u(1) = 0.
  CHECK(out.gap[0] == Approx(0.25));
}

TEST_CASE("three-value market fails the touching condition at the low value") {
  const auto r = no_seg_test(Market{{17.0 / 24.0, 1.0 / 8.0, 1.0 / 6.0}}, kV123, kQuad);
  CHECK_FALSE(r.in_O);
  CHECK(r.condition == "touching");
  CHECK(*r.index == 1);
}

TEST_CASE("membership in O matches the bound") {
  testing::Rng rng(61);
  const double gammas[] = {1.5, 2.0, 3.0};
  int in = 0, out = 0;
  for (int t = 0; t < 120; ++t) {
    const std::size_t K = 2 + t % 3;
    const ValueGrid g = testing::random_grid(rng, K);
    const Market x = testing::random_market(rng, K, 0.02);
    const CostSpec c = CostSpec::isoelastic(gammas[t % 3]);
    const bool o = no_seg_test(x, g, c).in_O;
    const double gain = solve_bound(x, g, c).value - no_segmentation_surplus(x, g, c);
    if (o) {
      ++in;
      CHECK(gain <= 1e-8);
    } else {
      ++out;
      CHECK(gain > 1e-8);
    }
  }
  CHECK(in > 0);
  CHECK(out > 0);
}

TEST_CASE("quality report of the binary split") {
  const Market x{{0.5, 0.5}};
  const auto r = solve_bound(x, kV12, kQuad);
  const auto seg = build_segmentation(r, x, kV12, kQuad);
  const auto q = quality_report(seg, kV12, kQuad);
  CHECK(q.monotone);
  CHECK(q.q_max == Approx(2.0));
  CHECK(q.q_floor[0] == Approx(0.5));
  // The low type gets 1/2 in one segment and is absent from the other.
  CHECK(q.dispersion[0] == Approx(0.0).epsilon(1e-7));
  CHECK(q.dispersion[1] == Approx(0.0));
  for (const auto& eta : q.eta) {
    if (eta[0]) CHECK(*eta[0] == Approx(2.0).epsilon(1e-7));
  }
  REQUIRE(q.iso_pattern.has_value());
  CHECK(*q.iso_pattern);
  CHECK(*q.cutoff == 1);
}

TEST_CASE("identity segmentation has no dispersion") {
  const auto q = quality_report({{1.0, Market{{0.2, 0.3, 0.5}}}}, kV123, kQuad);
  for (double d : q.dispersion) CHECK(d == 0.0);
  CHECK(q.dispersed_count(0.01) == 0);
  CHECK(q.dispersion_bound_holds(0.01));
}

TEST_CASE("built segmentations are monotone and respect the dispersion bound") {
  testing::Rng rng(62);
  const double gammas[] = {1.5, 2.0, 3.0};
  for (int t = 0; t < 60; ++t) {
    const std::size_t K = 2 + t % 4;
    const ValueGrid g = testing::random_grid(rng, K);
    const Market x = testing::random_market(rng, K, 0.02);
    const CostSpec c = CostSpec::isoelastic(gammas[t % 3]);
    const auto r = solve_bound(x, g, c);
    const auto q = quality_report(build_segmentation(r, x, g, c), g, c);
    CHECK(q.monotone);
    CHECK(q.dispersion_bound_holds(0.1));
    CHECK(q.dispersion_bound_holds(0.01));
    // Qualities never drop below the floor set by the rent peak.
    for (const auto& row : q.q)
      for (std::size_t k = 0; k + 1 < K; ++k)
        if (row[k]) CHECK(*row[k] >= q.q_floor[k] - 1e-6);
  }
}

TEST_CASE("isoelastic pattern on MHR aggregates") {
  testing::Rng rng(63);
  int seen = 0;
  while (seen < 25) {
    const std::size_t K = 2 + rng() % 4;
    const ValueGrid g = testing::random_grid(rng, K);
    const Market x = testing::random_market(rng, K, 0.02);
    if (!mhr_holds(x, g)) continue;
    const CostSpec c = CostSpec::isoelastic(seen % 2 ? 2.0 : 3.0);
    const auto r = solve_bound(x, g, c);
    const auto q = quality_report(build_segmentation(r, x, g, c), g, c);
    REQUIRE(q.iso_pattern.has_value());
    CHECK_MESSAGE(*q.iso_pattern, q.iso_max_error);
    ++seen;
  }
}

TEST_CASE("O-set scans nest in the cost elasticity") {
  const auto a = o_set_scan(kV345, CostSpec::isoelastic(1.5), 20);
  const auto b = o_set_scan(kV345, kQuad, 20);
  const auto c = o_set_scan(kV345, CostSpec::isoelastic(3.0), 20);
  CHECK(a.points.size() == 231);
  CHECK(nesting_violations(a, b) == 0);
  CHECK(nesting_violations(b, c) == 0);
  CHECK(b.in_count > 0);
  CHECK(b.in_count < b.points.size());
  // Markets concentrated on one value cannot be improved.
  for (const auto& p : b.points) {
    const bool vertex = (p.x1 == 1.0) || (p.x2 == 1.0) || (p.x1 == 0.0 && p.x2 == 0.0);
    if (vertex) CHECK(p.in_O);
  }
  CHECK(nesting_violations(c, a) > 0);
}
