#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "wgs/auction.hpp"
#include "wgs/flow.hpp"

namespace wgs {

ExchangeInstance add_dummy_agent(const ExchangeInstance& inst, double eta) {
  const double m = static_cast<double>(inst.goods());
  const double load = inst.eps * (1.0 + inst.eps) * m;
  if (!(eta > 0.0) || eta > 1.0) throw std::invalid_argument(fmt::format("dummy η = {} must lie in (0, 1]", eta));
  if (load > 0.5)
    throw std::invalid_argument(fmt::format("ε(1+ε)m = {} exceeds 1/2; use a smaller ε", load));
  if (eta / (1.0 + eta) <= load)
    throw std::invalid_argument(fmt::format("η/(1+η) = {} must exceed ε(1+ε)m = {}", eta / (1.0 + eta), load));
  ExchangeInstance out = inst;
  Bundle share = inst.supply();
  for (double& s : share) s *= eta;
  out.endowments.push_back(std::move(share));
  out.demands.push_back(CobbDouglas{std::vector<double>(inst.goods(), 1.0 / m)});
  return out;
}

EquilibriumReport strip_dummy(const ExchangeInstance& augmented, const EquilibriumReport& report) {
  if (report.allocation.size() != augmented.agents() || augmented.agents() < 2)
    throw std::invalid_argument("report does not match the augmented instance");
  EquilibriumReport r = report;
  const Bundle dummy = r.allocation.back();
  r.individual.pop_back();
  r.allocation.pop_back();
  r.certificate.pop_back();
  r.budgets.pop_back();
  Bundle supply = augmented.supply();
  for (std::size_t j = 0; j < supply.size(); ++j) supply[j] = std::max(0.0, supply[j] - dummy[j]);
  const auto p = r.prices.values();
  double left = 0.0;
  for (std::size_t j = 0; j < supply.size(); ++j) {
    double sold = 0.0;
    for (const auto& c : r.allocation) sold += c[j];
    left += p[j] * std::max(0.0, supply[j] - sold);
  }
  r.leftover_value = left;
  r.supply_override = std::move(supply);
  return r;
}

HallResult check_hall_condition(const SRInstance& inst, bool strict) {
  const std::size_t n = inst.agents();
  const std::size_t m = inst.goods();
  const auto t = inst.effective_caps();
  std::vector<std::vector<std::uint8_t>> interest(n);
  for (std::size_t i = 0; i < n; ++i) interest[i] = interest_set(inst.demands[i]);
  auto violates = [&](double budget, double room) {
    const double slack = 1e-12 * std::max(1.0, budget);
    return strict ? budget >= room - slack : budget > room + slack;
  };

  HallResult res;
  if (n <= 20) {
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
      double budget = 0.0;
      std::vector<std::uint8_t> hit(m, 0);
      for (std::size_t i = 0; i < n; ++i) {
        if (!(mask >> i & 1u)) continue;
        budget += inst.budgets[i];
        for (std::size_t j = 0; j < m; ++j) hit[j] |= interest[i][j];
      }
      double room = 0.0;
      for (std::size_t j = 0; j < m; ++j)
        if (hit[j]) room += t[j];
      if (violates(budget, room)) {
        res.ok = false;
        for (std::size_t i = 0; i < n; ++i)
          if (mask >> i & 1u) res.violating.push_back(i);
        return res;
      }
    }
    return res;
  }

  // Hall holds iff the flow network saturates every budget edge.
  const double inflate = strict ? 1.0 + 1e-9 : 1.0;
  MaxFlow flow(n + m + 2);
  const std::size_t source = n + m, sink = n + m + 1;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    flow.add_edge(source, i, inst.budgets[i] * inflate);
    total += inst.budgets[i] * inflate;
    for (std::size_t j = 0; j < m; ++j)
      if (interest[i][j]) flow.add_edge(i, n + j, kInf);
  }
  for (std::size_t j = 0; j < m; ++j) flow.add_edge(n + j, sink, t[j]);
  if (flow.solve(source, sink) < total * (1.0 - 1e-12)) {
    res.ok = false;
    const auto side = flow.source_side();
    for (std::size_t i = 0; i < n; ++i)
      if (side[i]) res.violating.push_back(i);
  }
  return res;
}

namespace {

// Ratio of the largest marginal utility at zero to the smallest positive one
// over the reachable region; infinite when no finite bound exists.
double derivative_spread(const DemandSpec& spec, double reach) {
  if (const auto* lin = std::get_if<Linear>(&spec)) {
    double hi = 0.0, lo = kInf;
    for (double v : lin->v)
      if (v > 0.0) {
        hi = std::max(hi, v);
        lo = std::min(lo, v);
      }
    return hi > 0.0 ? hi / lo : kInf;
  }
  if (const auto* splc = std::get_if<Basplc>(&spec)) {
    if (std::isfinite(splc->cap)) return kInf;
    double hi = 0.0, lo = kInf;
    for (const auto& segs : splc->goods) {
      if (segs.empty() || segs.front().rate <= 0.0) continue;
      hi = std::max(hi, segs.front().rate);
      double left = reach, rate = 0.0;
      for (const auto& s : segs) {
        rate = s.rate;
        if (left < s.length) break;
        left -= s.length;
        rate = 0.0;
      }
      lo = std::min(lo, rate);
    }
    return hi > 0.0 && lo > 0.0 ? hi / lo : kInf;
  }
  return kInf;
}

}  // namespace

PriceCapBound price_cap_bound(const SRInstance& inst, double fallback) {
  PriceCapBound out;
  out.value = fallback;
  out.kind = "fallback";
  const auto t = inst.effective_caps();
  const double t_max = *std::max_element(t.begin(), t.end());
  const double b_max = *std::max_element(inst.budgets.begin(), inst.budgets.end());
  double p_min = kInf;
  if (inst.init == SrInit::Given) {
    for (double p : inst.initial_prices) p_min = std::min(p_min, p);
  } else {
    const double units = std::accumulate(inst.supply.begin(), inst.supply.end(), 0.0);
    for (double cap : t) p_min = std::min(p_min, std::min(inst.eps * inst.total_budget() / units, cap));
  }
  const double reach = b_max / p_min;

  double spread = 1.0;
  bool full = true;
  for (const auto& d : inst.demands) {
    spread = std::max(spread, derivative_spread(d, reach));
    const auto gamma = interest_set(d);
    full = full && std::all_of(gamma.begin(), gamma.end(), [](std::uint8_t g) { return g != 0; });
  }
  if (!std::isfinite(spread)) {
    out.warning = "marginal utilities are unbounded; using the configured price cap";
    return out;
  }
  const double eps = inst.eps;
  const double total_t = std::accumulate(t.begin(), t.end(), 0.0);
  double bound = kInf;
  if (full && inst.total_budget() <= total_t * (1.0 + 1e-12)) {
    bound = (1.0 + eps) * (1.0 + eps) * t_max * spread;
    out.kind = "full-interest";
  } else if (check_hall_condition(inst, true).ok) {
    const double n = static_cast<double>(inst.agents());
    bound = std::pow(1.0 + eps, n) * t_max * std::pow(spread, n - 1.0);
    out.kind = "strict-hall";
  } else {
    out.warning = "Hall's condition fails; using the configured price cap";
    return out;
  }
  out.value = std::min(bound, fallback);
  return out;
}

}  // namespace wgs
