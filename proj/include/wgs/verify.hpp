#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wgs/demand.hpp"
#include "wgs/market.hpp"

namespace wgs {

// Independent certification of solver reports. Nothing here looks at solver
// state: every quantity is recomputed from the instance and the report.
struct Certificate {
  std::vector<Bundle> witness;
  double price_slack = 0.0;       // worst violation of p <= p^(i) <= (1+ε)p, relative
  double domination_slack = 0.0;  // max_ij (c_ij - z_ij)^+
  double clearing_residual = 0.0;
  double leftover_value = 0.0;
  double leftover_limit = 0.0;
  bool pass = false;
  std::vector<std::string> failures;
  std::vector<std::string> notes;
};

inline constexpr double kVerifyTol = 1e-7;

// A bundle of D(p, b) that dominates c, or nothing if none exists.
std::optional<Bundle> dominating_demand(const DemandSpec& spec, std::span<const double> p, double b,
                                        const Bundle& c);

Certificate check_approx_equilibrium(const ExchangeInstance& inst, const EquilibriumReport& report, double eps);
Certificate check_approx_sr(const SRInstance& inst, const EquilibriumReport& report, double eps,
                            bool weak_clearing);

// Fisher market with unit supplies and no spending caps.
struct FisherInstance {
  std::vector<double> budgets;
  std::vector<DemandSpec> demands;
};
struct FisherEquilibrium {
  std::vector<double> prices;
  std::vector<Bundle> allocation;
  double excess = 0.0;  // max_j |Σ_i x_ij - 1|
};
// Minimizes the convex dual in log-prices by nested golden-section search.
// Accepts m <= 3 goods with linear, CES or Cobb-Douglas demands.
FisherEquilibrium brute_force_fisher_eq(const FisherInstance& inst);

struct PropertyReport {
  std::string family;
  int trials = 0;
  long checks = 0;
  long violations = 0;
  double worst = 0.0;
  std::vector<std::string> examples;
  // Spending monotonicity under price rises, kept out of `violations`.
  long spending_checks = 0;
  long spending_violations = 0;
  std::vector<std::string> spending_examples;
};
// Randomized WGS, scale-invariance, budget, elasticity and Gale optimality
// checks, plus a separate spending-monotonicity tally. Families: linear, ces,
// cobb_douglas, conic, basplc, and the negative control ces_broken (σ < 1).
PropertyReport property_suite(const std::string& family, int trials, std::uint64_t seed);

}  // namespace wgs
