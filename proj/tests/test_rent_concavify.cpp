#include <cmath>

#include "doctest.h"
#include "segopt/envelope.hpp"
#include "segopt/errors.hpp"
#include "test_support.hpp"

using namespace segopt;
using doctest::Approx;

namespace {

const CostSpec kQuad = CostSpec::isoelastic(2.0);
// Two increments with marginal costs 0 and 3/4 at v = 1.
const CostSpec kStep = CostSpec::step({0.0, 0.75});
const ValueGrid kV12({1.0, 2.0});

void check_majorant(const RentCurve& c, const ConcaveEnvelope& env) {
  for (std::size_t i = 0; i < c.h.size(); ++i) CHECK(env(c.h[i]) >= c.value[i] - 1e-12);
}

}  // namespace

TEST_CASE("local curves at sample points") {
  const LocalObjective u(kQuad, 1.0, CurveKind::Rent);
  CHECK(u(0.5) == Approx(0.25));
  CHECK(u(1.0) == Approx(0.0));
  const LocalObjective w(kQuad, 2.0, CurveKind::Welfare);
  CHECK(w(0.0) == Approx(2.0));
  const LocalObjective s(kStep, 1.0, CurveKind::Rent);
  CHECK(s(0.25) == Approx(0.5));
  CHECK(s(0.2) == Approx(0.4));
  CHECK(s(0.6) == Approx(0.6));
  CHECK(s(1.0) == Approx(1.0));
  // Scalarized weights: a_w = e1 lambda, a_u = e2 (1 - lambda) - e1 lambda.
  const LocalObjective z(kQuad, 2.0, CurveKind::Scalarized, 0.25, {1, -1});
  CHECK(z.weight_w() == Approx(0.25));
  CHECK(z.weight_u() == Approx(-1.0));
}

TEST_CASE("step-cost envelope breakpoints are exact") {
  const auto c = rent_curve(kStep, kV12, 0, CurveKind::Rent);
  const auto env = concavify(c);
  REQUIRE(env.h.size() == 3);
  CHECK(env.h[0] == 0.0);
  CHECK(env.value[0] == 0.0);
  CHECK(env.h[1] == 0.25);
  CHECK(env.value[1] == 0.5);
  CHECK(env.h[2] == 1.0);
  CHECK(env.value[2] == 1.0);
  CHECK(env.slope[0] == Approx(2.0));
  CHECK(env.slope[1] == Approx(2.0 / 3.0));
  CHECK(env.gap[1]);
  CHECK_FALSE(env.gap[0]);

  const auto q = envelope_query(env, 0.6);
  REQUIRE(q.support.size() == 2);
  CHECK(q.support[0].h == 0.25);
  CHECK(q.support[1].h == 1.0);
  CHECK(q.support[0].weight == Approx(8.0 / 15.0));
  CHECK(q.value == Approx(0.5 + 0.35 * 2.0 / 3.0));
  CHECK_FALSE(q.exclusion);
}

TEST_CASE("quadratic envelope queries") {
  const auto env = concavify(rent_curve(kQuad, kV12, 0, CurveKind::Rent));
  const auto inner = envelope_query(env, 0.3);
  CHECK(inner.value == Approx(0.21).epsilon(1e-6));
  CHECK(inner.slope_right == Approx(0.4).epsilon(1e-3));
  REQUIRE(inner.support.size() >= 1);
  for (const auto& p : inner.support) CHECK(p.h == Approx(0.3).epsilon(1e-3));

  const auto tail = envelope_query(env, 0.9);
  CHECK(tail.value == Approx(0.25).epsilon(1e-9));
  CHECK(tail.exclusion);
  CHECK(tail.slope_right == 0.0);
  REQUIRE(tail.support.size() == 1);
  CHECK(tail.support[0].h == Approx(0.5).epsilon(1e-9));

  bool threw = false;
  try {
    envelope_query(env, -0.1);
  } catch (const Error& e) {
    threw = e.kind() == ErrorKind::NegativeH;
  }
  CHECK(threw);
}

TEST_CASE("concave increasing samples are their own envelope") {
  RentCurve c{0, LocalObjective(kQuad, 1.0, CurveKind::Rent), {}, {}};
  for (int i = 0; i <= 100; ++i) {
    c.h.push_back(i / 100.0);
    c.value.push_back(std::sqrt(i / 100.0));
  }
  const auto env = concavify(c);
  CHECK(env.h.size() == c.h.size());
  for (std::size_t i = 0; i < c.h.size(); ++i) CHECK(env(c.h[i]) == Approx(c.value[i]).epsilon(1e-14));
}

TEST_CASE("envelope dominates, touches at breakpoints and has decreasing slopes") {
  testing::Rng rng(31);
  const CostSpec costs[] = {CostSpec::isoelastic(1.5), kQuad, CostSpec::isoelastic(3.0), kStep,
                            CostSpec::step({0.1, 0.4, 0.4, 2.0}),
                            CostSpec::sampled({0.0, 0.5, 1.0, 3.0}, {0.0, 0.1, 0.4, 3.0})};
  for (int t = 0; t < 60; ++t) {
    const ValueGrid g = testing::random_grid(rng, 3);
    const auto& cost = costs[t % 6];
    const auto kind = t % 2 ? CurveKind::Rent : CurveKind::Scalarized;
    const double lambda = testing::uniform(rng, 0.0, 1.0);
    const Orientation e{t % 4 < 2 ? 1 : -1, t % 3 ? 1 : -1};
    for (std::size_t k = 0; k < 2; ++k) {
      const auto c = rent_curve(cost, g, k, kind, lambda, e, 512);
      const auto env = concavify(c);
      check_majorant(c, env);
      for (std::size_t j = 0; j < env.h.size(); ++j) {
        const LocalObjective& f = c.obj;
        CHECK(env.value[j] == Approx(f(env.h[j])).epsilon(1e-12));
      }
      for (std::size_t j = 1; j < env.slope.size(); ++j) CHECK(env.slope[j] < env.slope[j - 1] - 1e-12);
      for (double s : env.slope) CHECK(s > 0.0);
    }
  }
}

TEST_CASE("doubling the sample grid moves the envelope by at most one cell") {
  for (double g : {1.5, 2.0, 3.0}) {
    const CostSpec cost = CostSpec::isoelastic(g);
    const ValueGrid grid({1.0, 2.0});
    const auto a = concavify(rent_curve(cost, grid, 0, CurveKind::Rent, 0.0, {}, 1024));
    const auto b = concavify(rent_curve(cost, grid, 0, CurveKind::Rent, 0.0, {}, 2048));
    // Chord error on a C2 curve is at most max|u''| cell^2 / 8, and |u''| <= 4 here.
    const double cell = 1.0 / 1024.0;
    for (int i = 0; i <= 200; ++i) CHECK(std::abs(a(i / 200.0) - b(i / 200.0)) <= cell * cell + 1e-12);
  }
}

TEST_CASE("isoelastic envelope follows the curve up to the rent peak") {
  for (double g : {1.5, 2.0, 3.0, 5.0}) {
    const CostSpec cost = CostSpec::isoelastic(g);
    const ValueGrid grid({2.0, 3.0});
    const std::size_t n = 4096;
    const auto c = rent_curve(cost, grid, 0, CurveKind::Rent, 0.0, {}, n);
    const auto env = concavify(c);
    const double hbar = (g - 1.0) / g * 2.0;
    const double cell = 2.0 / static_cast<double>(n);
    CHECK(std::abs(env.peak_h() - hbar) <= cell);
    const LocalObjective& u = c.obj;
    for (int i = 0; i <= 400; ++i) {
      const double h = 2.0 * i / 400.0;
      if (h <= hbar - cell) CHECK(env(h) - u(h) <= 1e-6);
      if (h >= hbar) CHECK(env(h) == Approx(u(hbar)).epsilon(1e-10));
    }
  }
}
