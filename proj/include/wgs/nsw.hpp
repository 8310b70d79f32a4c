#pragma once

#include <optional>
#include <vector>

#include "wgs/auction.hpp"

namespace wgs {

using CopyAllocation = std::vector<std::vector<int>>;  // [agent][good] copy counts

// An SR equilibrium of the relaxed Fisher market with utilities rescaled so that
// every agent's bang-per-buck is one.
struct NormalizedEquilibrium {
  std::string status;
  double eps = 0.0;
  EquilibriumReport report;           // stripped of the auxiliary agent
  std::vector<double> prices;         // market prices
  std::vector<Basplc> utilities;      // clamped, then scaled by 1/bang_per_buck
  std::vector<double> bang_per_buck;  // before scaling
  std::vector<double> gamma;          // before scaling
  std::vector<std::uint8_t> capped;
  std::vector<std::uint8_t> expensive;
  double auxiliary_value = 0.0;       // value of the goods the auxiliary agent kept
};

struct NswOptions {
  double eps = 0.0;  // 0 selects the instance value, then 0.01/n
  double price_cap = 0.0;
  bool audit = false;
  FnpHook on_fnp;
};

struct NswResult {
  NormalizedEquilibrium equilibrium;
  CopyAllocation rounded;
  std::vector<double> utilities;  // realized, original units
  double nsw = 0.0;
  double upper_bound = 0.0;       // original units
  std::optional<double> optimum;  // brute force, when requested
};

// Budgets 1, caps and supply D_j, rates clamped to the utility cap.
SRInstance relax_to_fisher(const NSWInstance& inst);
Basplc clamp_rates(const Basplc& utility);

NormalizedEquilibrium solve_sr_with_dummy(const NSWInstance& inst, const NswOptions& opts = {});

// Upper bound on the optimum in normalized units (bang-per-buck one).
double nsw_upper_bound_normalized(const NormalizedEquilibrium& eq, const std::vector<int>& copies);
// The same bound in the units of the input utilities.
double nsw_upper_bound(const NormalizedEquilibrium& eq, const std::vector<int>& copies);

CopyAllocation round_allocation(const NormalizedEquilibrium& eq, const NSWInstance& inst);

double agent_utility(const Basplc& utility, const std::vector<int>& copies);
double nsw_value(const CopyAllocation& alloc, const NSWInstance& inst);

struct BruteForceNsw {
  double value = 0.0;
  CopyAllocation allocation;
};
// Exhaustive search; requires n <= 4 and Σ D_j <= 12.
BruteForceNsw brute_force_nsw(const NSWInstance& inst);

NswResult solve_nsw(const NSWInstance& inst, const NswOptions& opts = {}, bool brute_force = false);

}  // namespace wgs
