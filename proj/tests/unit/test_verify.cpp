#include <doctest.h>

#include <cmath>

#include "support/generators.hpp"
#include "wgs/verify.hpp"

using namespace wgs;

namespace {

ExchangeInstance swap_market() {
  ExchangeInstance inst;
  inst.eps = 0.05;
  inst.endowments = {{1.0, 0.0}, {0.0, 1.0}};
  inst.demands = {Linear{{1.0, 2.0}}, Linear{{2.0, 1.0}}};
  return inst;
}

EquilibriumReport report_at(std::vector<double> prices, std::vector<Bundle> allocation) {
  EquilibriumReport r;
  r.prices = PriceVector(prices, 0.05);
  for (std::size_t i = 0; i < allocation.size(); ++i) r.individual.emplace_back(prices);
  r.allocation = std::move(allocation);
  return r;
}

bool any_starts_with(const std::vector<std::string>& msgs, const std::string& prefix) {
  for (const auto& m : msgs)
    if (m.rfind(prefix, 0) == 0) return true;
  return false;
}

}  // namespace

TEST_CASE("exchange certification of hand-built reports") {
  const auto inst = swap_market();
  const auto exact = check_approx_equilibrium(inst, report_at({1.0, 1.0}, {{0.0, 1.0}, {1.0, 0.0}}), 0.05);
  CHECK(exact.pass);
  CHECK(exact.clearing_residual == 0.0);
  CHECK(exact.leftover_value == 0.0);
  CHECK(exact.domination_slack == 0.0);

  const auto short_sold = report_at({1.0, 1.0}, {{0.0, 0.9}, {0.9, 0.0}});
  CHECK(check_approx_equilibrium(inst, short_sold, 0.1).pass);
  const auto fail = check_approx_equilibrium(inst, short_sold, 0.05);
  CHECK_FALSE(fail.pass);
  CHECK(any_starts_with(fail.failures, "(iii)"));

  auto wrong_good = report_at({1.0, 1.0}, {{1.0, 0.0}, {0.0, 1.0}});
  CHECK_FALSE(check_approx_equilibrium(inst, wrong_good, 0.05).pass);
}

TEST_CASE("dominating demand witnesses") {
  const std::vector<double> p{1.0, 1.0};
  const CobbDouglas cd{{0.5, 0.5}};
  const auto z = dominating_demand(cd, p, 2.0, Bundle{0.0, 0.0});
  REQUIRE(z);
  CHECK((*z)[0] == doctest::Approx(1.0));

  CHECK_FALSE(dominating_demand(Linear{{2.0, 1.0}}, p, 1.0, Bundle{0.0, 0.5}));

  const auto tie = dominating_demand(Linear{{1.0, 1.0}}, p, 1.0, Bundle{0.0, 0.3});
  REQUIRE(tie);
  CHECK((*tie)[1] >= 0.3);
  CHECK((*tie)[0] + (*tie)[1] == doctest::Approx(1.0));
}

TEST_CASE("spending-restricted certification of hand-built reports") {
  SRInstance inst;
  inst.eps = 0.05;
  inst.budgets = {2.0};
  inst.caps = {1.0, 1.0};
  inst.supply = {1.0, 1.0};
  inst.demands = {Linear{{1.0, 1.0}}};

  const auto exact = check_approx_sr(inst, report_at({2.0, 2.0}, {{0.5, 0.5}}), 1e-9, false);
  CHECK(exact.pass);
  CHECK(exact.clearing_residual == doctest::Approx(0.0));

  // Price moved to 2.2 but the holdings were not cut to 1/2.2.
  const auto stale = check_approx_sr(inst, report_at({2.2, 2.2}, {{0.5, 0.5}}), 0.05, false);
  CHECK_FALSE(stale.pass);
  CHECK(any_starts_with(stale.failures, "(ii)"));
}

TEST_CASE("Fisher oracle") {
  SUBCASE("one agent pays its spending shares") {
    const auto eq = brute_force_fisher_eq({{2.0}, {CobbDouglas{{0.3, 0.7}}}});
    CHECK(eq.prices[0] == doctest::Approx(0.6).epsilon(1e-6));
    CHECK(eq.prices[1] == doctest::Approx(1.4).epsilon(1e-6));
  }
  SUBCASE("symmetric linear swap") {
    const auto eq = brute_force_fisher_eq({{1.0, 1.0}, {Linear{{2.0, 1.0}}, Linear{{1.0, 2.0}}}});
    CHECK(eq.prices[0] == doctest::Approx(eq.prices[1]).epsilon(1e-6));
    CHECK(eq.prices[0] == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("random CES markets clear") {
    testing::Rng r(61);
    for (int k = 0; k < 5; ++k) {
      FisherInstance inst;
      for (int i = 0; i < 2; ++i) {
        inst.budgets.push_back(r.uniform(0.5, 2.0));
        inst.demands.push_back(testing::random_ces(r, 2));
      }
      CHECK(brute_force_fisher_eq(inst).excess <= 1e-6);
    }
  }
}

TEST_CASE("property suites") {
  for (const char* family : {"linear", "ces", "cobb_douglas", "conic", "basplc"}) {
    const auto rep = property_suite(family, 1000, 5);
    CAPTURE(family);
    CHECK(rep.checks > 0);
    CHECK(rep.violations == 0);
  }
  const auto broken = property_suite("ces_broken", 200, 5);
  CHECK(broken.violations > 0);
}
