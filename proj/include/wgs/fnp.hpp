#pragma once

#include <functional>
#include <span>
#include <string>

#include "wgs/demand.hpp"

namespace wgs {

// One FindNewPrices query: the agent's current prices, the caps they may be
// raised to (the high market prices in both auctions), held goods and budget.
struct FnpInput {
  const IndividualPrice& start;
  std::span<const double> caps;
  const Bundle& held;
  double budget;
  double eps;  // accuracy parameter; caps are (1+ε)·market prices in the auctions
};

struct FnpResult {
  IndividualPrice prices;
  Bundle bundle;
  int steps = 0;             // price bumps / price-raise runs, per routine
  double residual = 0.0;     // KKT residual of the convex routine
  bool converged = true;
  double demand_tol = 0.0;   // > 0 when the bundle is only approximately in D(p̃, b)
  std::optional<GaleCertificate> gale;
};

enum class FnpChoice { Auto, Elasticity, Linear, CobbDouglas, Gale, Basplc };

FnpChoice parse_fnp_choice(const std::string& name);
std::string to_string(FnpChoice choice);

// Routine that `choice` resolves to for `spec`; throws if incompatible.
FnpChoice resolve_fnp(const DemandSpec& spec, FnpChoice choice);

// Raises each violating price by at least (1+ε)^{1/f}, and further when the
// elasticity bound allows, until every held good is still demanded.
FnpResult fnp_elasticity(const DemandSpec& spec, double f, const FnpInput& in);
FnpResult fnp_linear(const Linear& spec, const FnpInput& in);
FnpResult fnp_cobb_douglas(const CobbDouglas& spec, const FnpInput& in);

struct GaleConvexOptions {
  int max_iterations = 200000;
  double tolerance = 1e-10;
};
// Solves max b·ln u(y'+y'') - p·y' - q·y'' with y' <= c by a scaled projected
// gradient method. Only CES and Cobb-Douglas utilities are accepted.
FnpResult fnp_gale_convex(const DemandSpec& spec, const FnpInput& in, const GaleConvexOptions& opts = {});

// Two-stage price raising for capped piecewise-linear Gale demand. `cert` is
// the Gale certificate of a bundle x >= held at the start prices.
FnpResult fnp_basplc(const Basplc& utility, const FnpInput& in, const GaleCertificate& cert);

FnpResult find_new_prices(const DemandSpec& spec, FnpChoice choice, const FnpInput& in,
                          const GaleCertificate* cert = nullptr);

// Post-hoc check of the FindNewPrices contract. `strong` demands that every
// good bought beyond holdings be at its cap; otherwise the threshold is
// (1+ε)·held. Returns human-readable violations.
std::vector<std::string> check_fnp_contract(const DemandSpec& spec, const FnpInput& in,
                                            const FnpResult& out, bool strong,
                                            double tol = kTol);

// Whether `choice` promises the strong form of the contract.
bool fnp_is_strong(FnpChoice resolved);

// Σ_j k_j, the number of segments of a capped piecewise-linear utility.
std::size_t segment_count(const Basplc& utility);

}  // namespace wgs
