#include "wgs/fnp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace wgs {

namespace {

// Sets p̃_j to `value`, snapping to the cap (and flagging it) when within kCapTol.
void set_price(IndividualPrice& p, std::span<const double> caps, std::size_t j, double value) {
  if (value >= caps[j] * (1.0 - kCapTol)) {
    p.value[j] = caps[j];
    p.at_cap[j] = 1;
  } else {
    p.value[j] = value;
  }
}

bool exceeds(double y, double threshold) {
  return y > threshold * (1.0 + kCapTol) + 1e-15;
}

}  // namespace

FnpChoice parse_fnp_choice(const std::string& name) {
  if (name == "auto") return FnpChoice::Auto;
  if (name == "elasticity") return FnpChoice::Elasticity;
  if (name == "linear") return FnpChoice::Linear;
  if (name == "cobb-douglas") return FnpChoice::CobbDouglas;
  if (name == "gale") return FnpChoice::Gale;
  if (name == "basplc") return FnpChoice::Basplc;
  throw std::invalid_argument("unknown FNP routine: " + name);
}

std::string to_string(FnpChoice choice) {
  switch (choice) {
    case FnpChoice::Auto: return "auto";
    case FnpChoice::Elasticity: return "elasticity";
    case FnpChoice::Linear: return "linear";
    case FnpChoice::CobbDouglas: return "cobb-douglas";
    case FnpChoice::Gale: return "gale";
    case FnpChoice::Basplc: return "basplc";
  }
  return "auto";
}

FnpChoice resolve_fnp(const DemandSpec& spec, FnpChoice choice) {
  const bool linear = std::holds_alternative<Linear>(spec);
  const bool cd = std::holds_alternative<CobbDouglas>(spec);
  const bool ces = std::holds_alternative<Ces>(spec);
  const bool basplc = std::holds_alternative<Basplc>(spec);
  switch (choice) {
    case FnpChoice::Auto:
      if (linear) return FnpChoice::Linear;
      if (cd) return FnpChoice::CobbDouglas;
      if (basplc) return FnpChoice::Basplc;
      return FnpChoice::Elasticity;
    case FnpChoice::Elasticity:
      if (elasticity_bound(spec)) return choice;
      break;
    case FnpChoice::Linear:
      if (linear) return choice;
      break;
    case FnpChoice::CobbDouglas:
      if (cd) return choice;
      break;
    case FnpChoice::Gale:
      if (ces || cd) return choice;
      break;
    case FnpChoice::Basplc:
      if (basplc) return choice;
      break;
  }
  throw std::invalid_argument(fmt::format("FNP routine '{}' does not apply to {} demand", to_string(choice), family_name(spec)));
}

bool fnp_is_strong(FnpChoice resolved) { return resolved != FnpChoice::Elasticity; }

std::size_t segment_count(const Basplc& utility) {
  std::size_t k = 0;
  for (const auto& g : utility.goods) k += g.size();
  return k;
}

FnpResult fnp_elasticity(const DemandSpec& spec, double f, const FnpInput& in) {
  if (!(f > 0.0) || !std::isfinite(f)) throw std::invalid_argument("elasticity bound must be finite");
  const std::size_t m = in.start.size();
  const double min_factor = std::pow(1.0 + in.eps, 1.0 / f);
  FnpResult r;
  r.prices = in.start;
  r.bundle = demand(spec, r.prices.value, in.budget).bundle;
  for (;;) {
    std::size_t j = 0;
    for (; j < m; ++j)
      if (!r.prices.at_cap[j] && exceeds(r.bundle[j], (1.0 + in.eps) * in.held[j])) break;
    if (j == m) break;
    // Demand for j shrinks by at most the f-th power of its price factor, so
    // any factor up to (y_j/c_j)^{1/f} keeps y_j ≥ c_j; c_j = 0 goes to the cap.
    const double room = in.held[j] > 0.0 ? r.bundle[j] / (in.held[j] * (1.0 + 1e-9)) : kInf;
    const double factor = std::max(min_factor, std::pow(room, 1.0 / f));
    set_price(r.prices, in.caps, j, std::isfinite(factor) ? r.prices.value[j] * factor : in.caps[j]);
    r.bundle = demand(spec, r.prices.value, in.budget).bundle;
    ++r.steps;
  }
  return r;
}

FnpResult fnp_linear(const Linear& spec, const FnpInput& in) {
  const std::size_t m = in.start.size();
  FnpResult r;
  r.prices = in.start;
  r.bundle = in.held;
  if (in.budget <= 0.0) return r;
  auto& p = r.prices.value;
  const auto& c = in.held;

  double rho = 0.0;
  for (std::size_t j = 0; j < m; ++j) rho = std::max(rho, spec.v[j] / p[j]);
  if (!(rho > 0.0)) throw std::invalid_argument("linear valuations are all zero");
  std::vector<std::uint8_t> in_s(m, 0);
  for (std::size_t j = 0; j < m; ++j) {
    const double ratio = spec.v[j] / p[j];
    if (ratio >= rho * (1.0 - kCapTol)) in_s[j] = 1;
    else if (c[j] > 0.0) {
      if (ratio < rho * (1.0 - 1e-9))
        throw std::logic_error(fmt::format("held good {} is not a maximum bang-per-buck good", j));
      in_s[j] = 1;
    }
  }

  auto finish_at_cap = [&](std::size_t k) {
    double rest = in.budget;
    for (std::size_t j = 0; j < m; ++j)
      if (j != k) rest -= p[j] * c[j];
    r.bundle = c;
    r.bundle[k] = std::max(c[k], rest / p[k]);
    return r;
  };

  for (;;) {
    double spend = 0.0;
    for (std::size_t j = 0; j < m; ++j)
      if (in_s[j]) spend += p[j] * c[j];
    if (spend >= in.budget * (1.0 - kCapTol)) return r;  // budget exhausted at holdings
    for (std::size_t j = 0; j < m; ++j)
      if (in_s[j] && r.prices.at_cap[j]) return finish_at_cap(j);

    const double alpha_budget = spend > 0.0 ? in.budget / spend : kInf;
    double alpha_cap = kInf;
    for (std::size_t j = 0; j < m; ++j)
      if (in_s[j]) alpha_cap = std::min(alpha_cap, in.caps[j] / p[j]);
    double alpha_enter = kInf;
    for (std::size_t j = 0; j < m; ++j)
      if (!in_s[j] && spec.v[j] > 0.0) alpha_enter = std::min(alpha_enter, rho * p[j] / spec.v[j]);
    const double alpha = std::min({alpha_budget, alpha_cap, alpha_enter});

    ++r.steps;
    for (std::size_t j = 0; j < m; ++j)
      if (in_s[j]) set_price(r.prices, in.caps, j, p[j] * alpha);
    rho /= alpha;
    if (alpha_budget <= alpha) return r;
    for (std::size_t j = 0; j < m; ++j)
      if (in_s[j] && r.prices.at_cap[j]) return finish_at_cap(j);
    for (std::size_t j = 0; j < m; ++j)
      if (!in_s[j] && spec.v[j] > 0.0 && spec.v[j] / p[j] >= rho * (1.0 - kCapTol)) in_s[j] = 1;
  }
}

FnpResult fnp_cobb_douglas(const CobbDouglas& spec, const FnpInput& in) {
  const std::size_t m = in.start.size();
  FnpResult r;
  r.prices = in.start;
  r.bundle.assign(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    const double want = in.budget * spec.alpha[j];
    if (want <= 0.0) continue;
    const double target = in.held[j] > 0.0 ? want / in.held[j] : kInf;
    if (!r.prices.at_cap[j]) set_price(r.prices, in.caps, j, std::max(r.prices.value[j], std::min(target, in.caps[j])));
    r.bundle[j] = r.prices.at_cap[j] ? std::max(in.held[j], want / r.prices.value[j]) : in.held[j];
  }
  return r;
}

FnpResult find_new_prices(const DemandSpec& spec, FnpChoice choice, const FnpInput& in,
                          const GaleCertificate* cert) {
  switch (resolve_fnp(spec, choice)) {
    case FnpChoice::Linear: return fnp_linear(std::get<Linear>(spec), in);
    case FnpChoice::CobbDouglas: return fnp_cobb_douglas(std::get<CobbDouglas>(spec), in);
    case FnpChoice::Gale: return fnp_gale_convex(spec, in);
    case FnpChoice::Basplc: {
      const auto& u = std::get<Basplc>(spec);
      if (cert) return fnp_basplc(u, in, *cert);
      const auto x = gale_demand_basplc(u, in.start.value, in.budget, &in.held);
      return fnp_basplc(u, in, *x.gale);
    }
    default: return fnp_elasticity(spec, *elasticity_bound(spec), in);
  }
}

std::vector<std::string> check_fnp_contract(const DemandSpec& spec, const FnpInput& in,
                                            const FnpResult& out, bool strong, double tol) {
  std::vector<std::string> bad;
  const std::size_t m = in.start.size();
  if (out.prices.size() != m || out.bundle.size() != m) {
    bad.push_back("result has wrong dimension");
    return bad;
  }
  const auto& pt = out.prices.value;
  for (std::size_t j = 0; j < m; ++j) {
    if (pt[j] < in.start.value[j] * (1.0 - kCapTol))
      bad.push_back(fmt::format("good {}: price decreased", j));
    if (pt[j] > in.caps[j] * (1.0 + kCapTol)) bad.push_back(fmt::format("good {}: price above cap", j));
    if (out.prices.at_cap[j] && pt[j] != in.caps[j]) bad.push_back(fmt::format("good {}: flagged but not at cap", j));
    if (!out.prices.at_cap[j] && pt[j] >= in.caps[j] * (1.0 - kCapTol))
      bad.push_back(fmt::format("good {}: at cap without flag", j));
    if (in.start.at_cap[j] && !out.prices.at_cap[j]) bad.push_back(fmt::format("good {}: lost cap flag", j));
    const double y = out.bundle[j];
    const double c = in.held[j];
    if (y < c - tol * std::max(1.0, c)) bad.push_back(fmt::format("good {}: bundle {} below holdings {}", j, y, c));
    const double threshold = strong ? c : (1.0 + in.eps) * c;
    if (!out.prices.at_cap[j] && y > threshold + tol * std::max(1.0, threshold))
      bad.push_back(fmt::format("good {}: bought {} beyond {} below cap", j, y, threshold));
  }
  // Membership of the bundle in the demand set at the new prices.
  std::visit([&](const auto& d) {
    using T = std::decay_t<decltype(d)>;
    if constexpr (std::is_same_v<T, Linear>) {
      double rho = 0.0;
      for (std::size_t j = 0; j < m; ++j) rho = std::max(rho, d.v[j] / pt[j]);
      for (std::size_t j = 0; j < m; ++j)
        if (out.bundle[j] > tol && d.v[j] / pt[j] < rho * (1.0 - 1e-9))
          bad.push_back(fmt::format("good {}: bought but not maximum bang-per-buck", j));
      const double spend = dot(pt, out.bundle);
      if (std::abs(spend - in.budget) > tol * std::max(1.0, in.budget))
        bad.push_back(fmt::format("spend {} differs from budget {}", spend, in.budget));
    } else if constexpr (std::is_same_v<T, Basplc>) {
      if (!out.gale) {
        bad.push_back("missing Gale certificate");
      } else {
        const double res = gale_kkt_residual(d, pt, in.budget, out.bundle, *out.gale);
        if (res > 1e-8) bad.push_back(fmt::format("Gale KKT residual {}", res));
      }
    } else {
      const double qtol = out.demand_tol > 0.0 ? out.demand_tol : tol;
      const auto x = demand(spec, pt, in.budget).bundle;
      for (std::size_t j = 0; j < m; ++j)
        if (std::abs(x[j] - out.bundle[j]) > qtol * std::max(1.0, x[j]))
          bad.push_back(fmt::format("good {}: bundle {} is not the demand {}", j, out.bundle[j], x[j]));
    }
  }, spec);
  return bad;
}

}  // namespace wgs
