#include "wgs/nsw.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace wgs {

namespace {

double default_eps(const NSWInstance& inst, double requested) {
  if (requested > 0.0) return requested;
  if (inst.eps > 0.0) return inst.eps;
  return 0.01 / static_cast<double>(std::max<std::size_t>(1, inst.agent_count()));
}

// Log of the capped utility; -inf at zero.
double log_utility(double u) { return u > 0.0 ? std::log(u) : -kInf; }

}  // namespace

Basplc clamp_rates(const Basplc& utility) {
  Basplc out;
  out.cap = utility.cap;
  out.goods.resize(utility.goods.size());
  for (std::size_t j = 0; j < utility.goods.size(); ++j) {
    for (const auto& s : utility.goods[j]) {
      const double rate = std::min(s.rate, utility.cap);
      auto& segs = out.goods[j];
      if (!segs.empty() && segs.back().rate == rate) segs.back().length += s.length;
      else segs.push_back({rate, s.length});
    }
  }
  return out;
}

SRInstance relax_to_fisher(const NSWInstance& inst) {
  if (auto bad = validate_instance(inst); !bad.empty()) {
    std::string msg;
    for (const auto& b : bad) msg += (msg.empty() ? "" : "; ") + b;
    throw std::invalid_argument(msg);
  }
  SRInstance sr;
  sr.eps = default_eps(inst, 0.0);
  sr.budgets.assign(inst.agent_count(), 1.0);
  for (int d : inst.copies) {
    sr.caps.push_back(d);
    sr.supply.push_back(d);
  }
  for (const auto& a : inst.agents) sr.demands.push_back(clamp_rates(a));
  return sr;
}

NormalizedEquilibrium solve_sr_with_dummy(const NSWInstance& inst, const NswOptions& opts) {
  const double eps = default_eps(inst, opts.eps);
  SRInstance sr = relax_to_fisher(inst);
  const std::size_t n = sr.agents();
  const std::size_t m = sr.goods();
  const double total_copies = std::accumulate(sr.supply.begin(), sr.supply.end(), 0.0);

  SRInstance aug = sr;
  aug.eps = 0.8 * eps;
  aug.budgets.push_back(eps);
  Basplc dummy;
  for (std::size_t j = 0; j < m; ++j) dummy.goods.push_back({Segment{1.0, sr.supply[j]}});
  aug.demands.push_back(dummy);
  aug.init = SrInit::Given;
  aug.initial_prices.assign(m, eps / total_copies);

  AuctionOptions ao;
  ao.audit = opts.audit;
  ao.on_fnp = opts.on_fnp;
  ao.price_cap = opts.price_cap > 0.0 ? opts.price_cap : 1e6 * aug.total_budget();
  // The starting market is worth ε in total, so the plain Σ b test would
  // accept it untouched.
  ao.market_value_threshold = true;
  auto full = run_sr_auction(aug, ao);

  NormalizedEquilibrium eq;
  eq.status = full.status;
  eq.eps = eps;
  eq.prices = full.prices.values();
  for (std::size_t j = 0; j < m; ++j) eq.auxiliary_value += eq.prices[j] * full.allocation[n][j];

  eq.report = full;
  eq.report.individual.pop_back();
  eq.report.allocation.pop_back();
  eq.report.certificate.pop_back();
  eq.report.budgets.pop_back();
  if (!eq.report.bang_per_buck.empty()) {
    eq.report.bang_per_buck.pop_back();
    eq.report.cap_multiplier.pop_back();
  }
  Bundle net = full.available;
  for (std::size_t j = 0; j < m; ++j) net[j] = std::max(0.0, net[j] - full.allocation[n][j]);
  eq.report.supply_override = net;

  eq.utilities.resize(n);
  eq.bang_per_buck.assign(n, 1.0);
  eq.gamma.assign(n, 0.0);
  eq.capped.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& u = std::get<Basplc>(sr.demands[i]);
    const double util = basplc_capped_utility(u, full.certificate[i]);
    const double gamma = full.cap_multiplier.empty() ? 0.0 : full.cap_multiplier[i];
    const double beta = util / (1.0 - gamma * util);  // budget one
    eq.bang_per_buck[i] = beta;
    eq.gamma[i] = gamma;
    eq.capped[i] = std::isfinite(u.cap) && util >= u.cap * (1.0 - 1e-9);
    Basplc scaled = u;
    if (beta > 0.0) {
      for (auto& segs : scaled.goods)
        for (auto& s : segs) s.rate /= beta;
      scaled.cap /= beta;
    }
    eq.utilities[i] = std::move(scaled);
  }
  eq.expensive.assign(m, 0);
  for (std::size_t j = 0; j < m; ++j) eq.expensive[j] = eq.prices[j] > 1.0;
  return eq;
}

double nsw_upper_bound_normalized(const NormalizedEquilibrium& eq, const std::vector<int>& copies) {
  double log_sum = 0.0;
  for (std::size_t i = 0; i < eq.utilities.size(); ++i)
    if (eq.capped[i]) log_sum += std::log(eq.utilities[i].cap);
  for (std::size_t j = 0; j < eq.prices.size(); ++j)
    if (eq.expensive[j]) log_sum += copies[j] * std::log(eq.prices[j]);
  return std::exp(log_sum / static_cast<double>(eq.utilities.size()));
}

double nsw_upper_bound(const NormalizedEquilibrium& eq, const std::vector<int>& copies) {
  double log_scale = 0.0;
  for (double b : eq.bang_per_buck) log_scale += std::log(b);
  return nsw_upper_bound_normalized(eq, copies) * std::exp(log_scale / static_cast<double>(eq.bang_per_buck.size()));
}

double agent_utility(const Basplc& utility, const std::vector<int>& copies) {
  double u = 0.0;
  for (std::size_t j = 0; j < copies.size(); ++j) u += segment_utility(utility.goods[j], copies[j]);
  return std::min(u, utility.cap);
}

double nsw_value(const CopyAllocation& alloc, const NSWInstance& inst) {
  double log_sum = 0.0;
  for (std::size_t i = 0; i < inst.agent_count(); ++i) {
    const double u = agent_utility(inst.agents[i], alloc[i]);
    if (!(u > 0.0)) return 0.0;
    log_sum += std::log(u);
  }
  return std::exp(log_sum / static_cast<double>(inst.agent_count()));
}

CopyAllocation round_allocation(const NormalizedEquilibrium& eq, const NSWInstance& inst) {
  const std::size_t n = inst.agent_count();
  const std::size_t m = inst.goods();
  const auto& c = eq.report.allocation;
  const auto& p = eq.prices;
  CopyAllocation k(n, std::vector<int>(m, 0));
  std::vector<int> left(inst.copies);

  auto give = [&](std::size_t i, std::size_t j, int count) {
    count = std::min(count, left[j]);
    k[i][j] += count;
    left[j] -= count;
  };

  // Forced segments: strictly better than their price even at the individual
  // price level, so every equilibrium bundle fills them.
  const double forced = (1.0 + eq.eps) * (1.0 + eq.eps);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double amount = 0.0;
      for (const auto& s : eq.utilities[i].goods[j]) {
        if (s.rate <= forced * p[j]) break;
        amount += s.length;
      }
      give(i, j, static_cast<int>(std::lround(amount)));
    }
  // Integral parts of the fractional holdings.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const int whole = static_cast<int>(std::floor(c[i][j] + 1e-6));
      if (whole > k[i][j]) give(i, j, whole - k[i][j]);
    }

  // Residual spending graph on the fractional remainders, reduced to a forest.
  std::vector<std::vector<double>> spend(n, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double r = c[i][j] - k[i][j];
      if (r > 1e-9) spend[i][j] = r * p[j];
    }
  const std::size_t nodes = n + m;  // agents first, then goods
  auto weight = [&](std::size_t a, std::size_t b) -> double& {
    return a < n ? spend[a][b - n] : spend[b][a - n];
  };
  auto edge = [&](std::size_t a, std::size_t b) { return weight(a, b) > 1e-12; };
  for (;;) {
    std::vector<int> parent(nodes, -1), depth(nodes, -1);
    std::vector<std::size_t> cycle;
    std::function<bool(std::size_t)> dfs = [&](std::size_t v) -> bool {
      for (std::size_t w = 0; w < nodes; ++w) {
        if ((v < n) == (w < n) || !edge(v, w) || static_cast<int>(w) == parent[v]) continue;
        if (depth[w] >= 0) {
          if (depth[w] < depth[v]) {
            for (std::size_t x = v; x != w; x = static_cast<std::size_t>(parent[x])) cycle.push_back(x);
            cycle.push_back(w);
            return true;
          }
          continue;
        }
        parent[w] = static_cast<int>(v);
        depth[w] = depth[v] + 1;
        if (dfs(w)) return true;
      }
      return false;
    };
    bool found = false;
    for (std::size_t s = 0; s < nodes && !found; ++s)
      if (depth[s] < 0) {
        depth[s] = 0;
        found = dfs(s);
      }
    if (!found) break;
    // Alternate +δ/−δ around the cycle; δ empties the smallest "−" edge.
    double delta = kInf;
    for (std::size_t e = 1; e < cycle.size(); e += 2)
      delta = std::min(delta, weight(cycle[e], cycle[(e + 1) % cycle.size()]));
    for (std::size_t e = 0; e < cycle.size(); ++e) {
      double& w = weight(cycle[e], cycle[(e + 1) % cycle.size()]);
      w += e % 2 == 0 ? delta : -delta;
      if (w < 1e-12) w = 0.0;
    }
  }

  std::vector<double> util(n);
  for (std::size_t i = 0; i < n; ++i) util[i] = agent_utility(inst.agents[i], k[i]);
  auto gain = [&](std::size_t i, std::size_t j) {
    ++k[i][j];
    const double after = agent_utility(inst.agents[i], k[i]);
    --k[i][j];
    if (after <= util[i]) return 0.0;
    if (util[i] <= 0.0) return 1e300 * 0.5 + after;
    return log_utility(after) - log_utility(util[i]);
  };
  auto assign = [&](std::size_t i, std::size_t j) {
    ++k[i][j];
    --left[j];
    util[i] = agent_utility(inst.agents[i], k[i]);
  };

  // Tree by tree, goods in breadth-first order from the lowest agent.
  std::vector<std::uint8_t> seen(nodes, 0);
  for (std::size_t root = 0; root < n; ++root) {
    if (seen[root]) continue;
    std::vector<std::size_t> order{root};
    seen[root] = 1;
    for (std::size_t q = 0; q < order.size(); ++q)
      for (std::size_t w = 0; w < nodes; ++w)
        if ((order[q] < n) != (w < n) && !seen[w] && edge(order[q], w)) {
          seen[w] = 1;
          order.push_back(w);
        }
    for (std::size_t v : order) {
      if (v < n) continue;
      const std::size_t j = v - n;
      std::vector<std::size_t> holders;
      std::vector<int> room(n, 0);
      for (std::size_t i = 0; i < n; ++i)
        if (spend[i][j] > 1e-12) {
          holders.push_back(i);
          room[i] = static_cast<int>(std::ceil(spend[i][j] / p[j] - 1e-9));
        }
      while (left[j] > 0) {
        std::size_t best = n;
        double best_gain = -1.0;
        for (std::size_t i : holders)
          if (room[i] > 0) {
            const double g = gain(i, j);
            if (g > best_gain) {
              best_gain = g;
              best = i;
            }
          }
        if (best == n) break;
        assign(best, j);
        --room[best];
      }
    }
  }
  // Copies not placed along the forest go to the agent gaining the most.
  for (std::size_t j = 0; j < m; ++j)
    while (left[j] > 0) {
      std::size_t best = 0;
      double best_gain = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double g = gain(i, j);
        if (g > best_gain) {
          best_gain = g;
          best = i;
        }
      }
      assign(best, j);
    }
  return k;
}

BruteForceNsw brute_force_nsw(const NSWInstance& inst) {
  const std::size_t n = inst.agent_count();
  const std::size_t m = inst.goods();
  const int total = std::accumulate(inst.copies.begin(), inst.copies.end(), 0);
  if (n > 4 || total > 12)
    throw std::invalid_argument(fmt::format("brute force needs n <= 4 and at most 12 copies (got n = {}, {} copies)", n, total));
  BruteForceNsw best;
  best.value = -1.0;
  CopyAllocation cur(n, std::vector<int>(m, 0));
  // Per good, every way of splitting its copies among the agents.
  std::function<void(std::size_t, std::size_t, int)> go = [&](std::size_t j, std::size_t i, int rest) {
    if (j == m) {
      const double v = nsw_value(cur, inst);
      if (v > best.value) {
        best.value = v;
        best.allocation = cur;
      }
      return;
    }
    if (i + 1 == n) {
      cur[i][j] = rest;
      go(j + 1, 0, j + 1 < m ? inst.copies[j + 1] : 0);
      cur[i][j] = 0;
      return;
    }
    for (int take = rest; take >= 0; --take) {
      cur[i][j] = take;
      go(j, i + 1, rest - take);
    }
    cur[i][j] = 0;
  };
  go(0, 0, m > 0 ? inst.copies[0] : 0);
  return best;
}

NswResult solve_nsw(const NSWInstance& inst, const NswOptions& opts, bool brute_force) {
  NswResult r;
  r.equilibrium = solve_sr_with_dummy(inst, opts);
  r.upper_bound = nsw_upper_bound(r.equilibrium, inst.copies);
  r.rounded = round_allocation(r.equilibrium, inst);
  for (std::size_t i = 0; i < inst.agent_count(); ++i) r.utilities.push_back(agent_utility(inst.agents[i], r.rounded[i]));
  r.nsw = nsw_value(r.rounded, inst);
  if (brute_force) r.optimum = brute_force_nsw(inst).value;
  return r;
}

}  // namespace wgs
