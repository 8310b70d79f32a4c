#include <doctest.h>

#include <cmath>

#include "support/generators.hpp"
#include "wgs/nsw.hpp"

using namespace wgs;

namespace {

Basplc additive(std::vector<double> rates, double cap = kInf) {
  Basplc u;
  for (double r : rates) u.goods.push_back({Segment{r, 1.0}});
  u.cap = cap;
  return u;
}

NSWInstance two_by_two() {
  NSWInstance inst;
  inst.copies = {1, 1};
  inst.agents = {additive({2.0, 1.0}), additive({1.0, 2.0})};
  return inst;
}

NormalizedEquilibrium hand_equilibrium(std::vector<double> prices, std::vector<Basplc> utilities,
                                       std::vector<Bundle> allocation) {
  NormalizedEquilibrium eq;
  eq.eps = 0.01;
  eq.prices = std::move(prices);
  eq.utilities = std::move(utilities);
  eq.report.allocation = std::move(allocation);
  eq.bang_per_buck.assign(eq.utilities.size(), 1.0);
  eq.gamma.assign(eq.utilities.size(), 0.0);
  eq.capped.assign(eq.utilities.size(), 0);
  eq.expensive.assign(eq.prices.size(), 0);
  for (std::size_t j = 0; j < eq.prices.size(); ++j) eq.expensive[j] = eq.prices[j] > 1.0;
  return eq;
}

}  // namespace

TEST_CASE("relaxation to a Fisher market") {
  const auto sr = relax_to_fisher(two_by_two());
  CHECK(sr.budgets == std::vector<double>{1.0, 1.0});
  CHECK(sr.caps == std::vector<double>{1.0, 1.0});

  NSWInstance wide;
  wide.copies = {3, 1};
  Basplc u;
  u.goods = {{{5.0, 2.0}, {1.0, 1.0}}, {{2.0, 1.0}}};
  u.cap = 3.0;
  wide.agents = {u};
  const auto fisher = relax_to_fisher(wide);
  CHECK(fisher.caps == std::vector<double>{3.0, 1.0});
  CHECK(fisher.supply == std::vector<double>{3.0, 1.0});
  const auto& clamped = std::get<Basplc>(fisher.demands[0]);
  CHECK(clamped.goods[0][0].rate == 3.0);
  CHECK(clamped != u);
  // Clamping never changes the capped utility of a whole-copy bundle.
  for (int a = 0; a <= 3; ++a)
    for (int b = 0; b <= 1; ++b) CHECK(agent_utility(clamped, {a, b}) == doctest::Approx(agent_utility(u, {a, b})));
}

TEST_CASE("upper bound in normalized units") {
  auto eq = hand_equilibrium({1.0, 0.5}, {additive({1.0, 1.0}), additive({1.0, 1.0})}, {});
  CHECK(nsw_upper_bound_normalized(eq, {1, 1}) == doctest::Approx(1.0));

  eq = hand_equilibrium({4.0}, {additive({1.0}), additive({1.0})}, {});
  CHECK(nsw_upper_bound_normalized(eq, {1}) == doctest::Approx(2.0));
}

TEST_CASE("rounding") {
  const auto inst = two_by_two();
  SUBCASE("integral holdings are kept") {
    const auto eq = hand_equilibrium({1.0, 1.0}, {additive({1.0, 0.5}), additive({0.5, 1.0})},
                                     {{1.0, 0.0}, {0.0, 1.0}});
    const auto k = round_allocation(eq, inst);
    CHECK(k == CopyAllocation{{1, 0}, {0, 1}});
  }
  SUBCASE("an evenly split copy goes to the lower index") {
    NSWInstance one;
    one.copies = {1};
    one.agents = {additive({1.0}), additive({1.0})};
    const auto eq = hand_equilibrium({2.0}, {additive({0.5}), additive({0.5})}, {{0.5}, {0.5}});
    const auto k = round_allocation(eq, one);
    CHECK(k == CopyAllocation{{1}, {0}});
  }
}

TEST_CASE("Nash social welfare values") {
  NSWInstance single;
  single.copies = {1};
  single.agents = {additive({5.0})};
  CHECK(nsw_value({{1}}, single) == doctest::Approx(5.0));

  const auto inst = two_by_two();
  CHECK(nsw_value({{1, 0}, {0, 1}}, inst) == doctest::Approx(2.0));
  CHECK(nsw_value({{1, 1}, {0, 0}}, inst) == 0.0);
}

TEST_CASE("exhaustive optimum") {
  const auto best = brute_force_nsw(two_by_two());
  CHECK(best.value == doctest::Approx(2.0));
  CHECK(best.allocation == CopyAllocation{{1, 0}, {0, 1}});

  NSWInstance one;
  one.copies = {1};
  one.agents = {additive({1.0}), additive({1.0})};
  CHECK(brute_force_nsw(one).value == 0.0);

  NSWInstance capped;
  capped.copies = {1, 1};
  capped.agents = {additive({3.0, 2.0}, 1.0), additive({2.0, 5.0}, 1.0)};
  CHECK(brute_force_nsw(capped).value == doctest::Approx(1.0));

  NSWInstance big;
  big.copies = {7, 6};
  big.agents = {additive({1.0, 1.0})};
  CHECK_THROWS_AS(brute_force_nsw(big), std::invalid_argument);
}

TEST_CASE("pipeline on the 2x2 additive instance") {
  const auto r = solve_nsw(two_by_two(), {}, true);
  CHECK(r.rounded == CopyAllocation{{1, 0}, {0, 1}});
  CHECK(r.nsw == doctest::Approx(2.0));
  REQUIRE(r.optimum);
  CHECK(*r.optimum == doctest::Approx(2.0));
  CHECK(r.upper_bound >= 2.0 - 1e-6);
  CHECK(r.equilibrium.auxiliary_value >= 0.0);
}

TEST_CASE("tiny utility caps bind for every agent") {
  NSWInstance inst;
  inst.copies = {1, 2};
  Basplc a;
  a.goods = {{{3.0, 1.0}}, {{2.5, 1.0}, {2.0, 1.0}}};
  a.cap = 0.5;
  Basplc b;
  b.goods = {{{2.0, 1.0}}, {{4.0, 2.0}}};
  b.cap = 0.4;
  inst.agents = {a, b};
  const auto r = solve_nsw(inst, {}, true);
  CHECK(r.equilibrium.capped == std::vector<std::uint8_t>{1, 1});
  REQUIRE(r.optimum);
  CHECK(*r.optimum <= r.upper_bound + 1e-6);
  CHECK(r.nsw == doctest::Approx(std::sqrt(0.5 * 0.4)));
}

TEST_CASE("random instances land within the approximation factor") {
  for (std::uint64_t seed = 300; seed < 312; ++seed) {
    const auto inst = testing::random_nsw(seed, 2 + seed % 2, 2 + seed % 3, 9);
    const auto r = solve_nsw(inst, {}, true);
    REQUIRE(r.optimum);
    CAPTURE(seed);
    CHECK(r.nsw > 0.0);
    CHECK(*r.optimum <= r.nsw * 2.404 + 1e-9);
    CHECK(*r.optimum <= r.upper_bound + 1e-6);
  }
}
