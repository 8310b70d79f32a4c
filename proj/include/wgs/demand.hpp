#pragma once

#include <optional>
#include <span>

#include "wgs/market.hpp"

namespace wgs {

// KKT data of a Gale demand answer for a capped piecewise-linear utility.
// bang_per_buck is (b/u(x) - gamma)^{-1}; gamma prices the utility cap.
struct GaleCertificate {
  double bang_per_buck = 0.0;
  double gamma = 0.0;
  double utility = 0.0;
  bool operator==(const GaleCertificate&) const = default;
};

struct DemandAnswer {
  Bundle bundle;
  double spend = 0.0;
  std::optional<GaleCertificate> gale;
};

DemandAnswer demand(const DemandSpec& spec, std::span<const double> p, double b);

// A bundle of D(p2, b2) that keeps at least x_j of every good whose price did
// not move. Requires (p2, b2) >= (p, b) and x in D(p, b).
DemandAnswer demand_monotone(const DemandSpec& spec, std::span<const double> p, double b,
                             std::span<const double> p2, double b2, const Bundle& x);

// Greedy optimum of  max b·log(u·x) - p·x  s.t. x_jt <= d_jt, u·x <= U.
// Segments with equal bang-per-buck are taken in favour of goods listed in
// `held` (up to the held amount), then by good index.
DemandAnswer gale_demand_basplc(const Basplc& utility, std::span<const double> p, double b,
                                const Bundle* held = nullptr);

std::optional<double> elasticity_bound(const DemandSpec& spec);

// Goods with positive marginal utility at zero consumption.
std::vector<std::uint8_t> interest_set(const DemandSpec& spec);

// Σ_t u_jt·x_jt for `amount` units of one good, filling segments in order.
double segment_utility(const std::vector<Segment>& segments, double amount);
// Uncapped utility of a per-good bundle.
double basplc_utility(const Basplc& utility, const Bundle& y);
// Capped utility min{U, Σ u·x}.
double basplc_capped_utility(const Basplc& utility, const Bundle& y);
// Largest relative violation of the Gale KKT system at (y, certificate).
double gale_kkt_residual(const Basplc& utility, std::span<const double> p, double b,
                         const Bundle& y, const GaleCertificate& cert);

// Utility of the homogeneous families (CES, Cobb-Douglas, linear).
double homogeneous_utility(const DemandSpec& spec, const Bundle& x);

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

}  // namespace wgs
