#include "wgs/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "wgs/flow.hpp"

namespace wgs {

namespace {

bool dominates(const Bundle& z, const Bundle& c) {
  for (std::size_t j = 0; j < c.size(); ++j)
    if (c[j] > z[j] + kVerifyTol * std::max(1.0, z[j])) return false;
  return true;
}

double domination_gap(const Bundle& z, const Bundle& c) {
  double gap = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) gap = std::max(gap, c[j] - z[j]);
  return gap;
}

// Shared per-agent checks: individual price window and the dominating witness.
void check_agents(Certificate& cert, const std::vector<DemandSpec>& demands, const EquilibriumReport& report,
                  std::span<const double> p, std::span<const double> budgets, double eps) {
  const std::size_t n = demands.size();
  cert.witness.assign(n, Bundle{});
  for (std::size_t i = 0; i < n; ++i) {
    const auto& q = report.individual[i].value;
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double below = (p[j] - q[j]) / p[j];
      const double above = (q[j] - (1.0 + eps) * p[j]) / p[j];
      cert.price_slack = std::max({cert.price_slack, below, above});
    }
    const auto& c = report.allocation[i];
    auto z = dominating_demand(demands[i], q, budgets[i], c);
    if (!z) {
      cert.failures.push_back(fmt::format("(i) agent {}: no demand bundle at its prices dominates its holdings", i));
      cert.domination_slack = kInf;
      continue;
    }
    cert.domination_slack = std::max(cert.domination_slack, domination_gap(*z, c));
    if (const auto* lin = std::get_if<Linear>(&demands[i])) {
      double best = 0.0;
      int ties = 0;
      for (std::size_t j = 0; j < p.size(); ++j) best = std::max(best, lin->v[j] / q[j]);
      for (std::size_t j = 0; j < p.size(); ++j) ties += lin->v[j] / q[j] >= best * (1.0 - 1e-9);
      if (ties > 1) cert.notes.push_back(fmt::format("agent {}: witness chosen among {} tied goods", i, ties));
    }
    cert.witness[i] = std::move(*z);
  }
  if (cert.price_slack > kVerifyTol)
    cert.failures.push_back(fmt::format("(i) individual prices leave [p, (1+ε)p] by {}", cert.price_slack));
}

void check_shapes(const EquilibriumReport& report, std::size_t n, std::size_t m) {
  if (report.prices.size() != m || report.individual.size() != n || report.allocation.size() != n)
    throw std::invalid_argument("report does not match the instance dimensions");
  for (std::size_t i = 0; i < n; ++i)
    if (report.individual[i].size() != m || report.allocation[i].size() != m)
      throw std::invalid_argument("report does not match the instance dimensions");
}

}  // namespace

std::optional<Bundle> dominating_demand(const DemandSpec& spec, std::span<const double> p, double b,
                                        const Bundle& c) {
  if (const auto* lin = std::get_if<Linear>(&spec)) {
    double best = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) best = std::max(best, lin->v[j] / p[j]);
    std::vector<std::uint8_t> mbb(p.size(), 0);
    for (std::size_t j = 0; j < p.size(); ++j) mbb[j] = lin->v[j] / p[j] >= best * (1.0 - 1e-9);
    double spent = 0.0;
    std::size_t sink = p.size();
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (c[j] > kVerifyTol && !mbb[j]) return std::nullopt;
      spent += p[j] * c[j];
      if (mbb[j] && sink == p.size() && c[j] > 0.0) sink = j;
    }
    if (spent > b * (1.0 + kVerifyTol) + kVerifyTol) return std::nullopt;
    if (sink == p.size())
      sink = static_cast<std::size_t>(std::find(mbb.begin(), mbb.end(), 1) - mbb.begin());
    Bundle z(p.size(), 0.0);
    for (std::size_t j = 0; j < p.size(); ++j) z[j] = mbb[j] ? std::max(0.0, c[j]) : 0.0;
    z[sink] += std::max(0.0, b - spent) / p[sink];
    return z;
  }
  Bundle z;
  if (const auto* gale = std::get_if<Basplc>(&spec)) z = gale_demand_basplc(*gale, p, b, &c).bundle;
  else z = demand(spec, p, b).bundle;
  if (!dominates(z, c)) return std::nullopt;
  return z;
}

Certificate check_approx_equilibrium(const ExchangeInstance& inst, const EquilibriumReport& report, double eps) {
  const std::size_t n = inst.agents();
  const std::size_t m = inst.goods();
  check_shapes(report, n, m);
  Certificate cert;
  const auto p = report.prices.values();
  std::vector<double> budgets(n);
  for (std::size_t i = 0; i < n; ++i) budgets[i] = dot(p, inst.endowments[i]);
  const double scale = std::accumulate(budgets.begin(), budgets.end(), 0.0);
  check_agents(cert, inst.demands, report, p, budgets, eps);

  const Bundle supply = report.supply_override ? *report.supply_override : inst.supply();
  for (std::size_t j = 0; j < m; ++j) {
    double sold = 0.0;
    for (std::size_t i = 0; i < n; ++i) sold += report.allocation[i][j];
    cert.clearing_residual = std::max(cert.clearing_residual, (sold - supply[j]) / std::max(1.0, supply[j]));
    cert.leftover_value += p[j] * std::max(0.0, supply[j] - sold);
  }
  if (cert.clearing_residual > kVerifyTol)
    cert.failures.push_back(fmt::format("(ii) goods oversold by {}", cert.clearing_residual));
  cert.leftover_limit = eps * scale;
  if (cert.leftover_value > cert.leftover_limit + kVerifyTol * scale)
    cert.failures.push_back(
        fmt::format("(iii) unsold value {} exceeds ε·p·e = {}", cert.leftover_value, cert.leftover_limit));
  cert.pass = cert.failures.empty();
  return cert;
}

Certificate check_approx_sr(const SRInstance& inst, const EquilibriumReport& report, double eps,
                            bool weak_clearing) {
  const std::size_t n = inst.agents();
  const std::size_t m = inst.goods();
  check_shapes(report, n, m);
  Certificate cert;
  const auto p = report.prices.values();
  const auto t = inst.effective_caps();
  const double scale = inst.total_budget();
  check_agents(cert, inst.demands, report, p, inst.budgets, eps);

  Bundle available(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double units = inst.supply.empty() ? 1.0 : inst.supply[j];
    available[j] = std::isfinite(t[j]) ? std::min(units, t[j] / p[j]) : units;
  }
  const Bundle target = report.supply_override ? *report.supply_override : available;
  double demanded_value = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double sold = 0.0, wanted = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sold += report.allocation[i][j];
      if (!cert.witness[i].empty()) wanted += cert.witness[i][j];
    }
    const double ref = std::max(1.0, target[j]);
    const double gap = weak_clearing ? (sold - target[j]) / ref : std::abs(sold - target[j]) / ref;
    cert.clearing_residual = std::max(cert.clearing_residual, gap);
    cert.leftover_value += p[j] * std::max(0.0, target[j] - sold);
    demanded_value += p[j] * (wanted - target[j]);
  }
  if (cert.clearing_residual > kVerifyTol)
    cert.failures.push_back(fmt::format("(ii) sold amounts miss the available amounts by {}", cert.clearing_residual));
  cert.leftover_limit = eps * scale;
  if (weak_clearing && cert.leftover_value > cert.leftover_limit + kVerifyTol * scale)
    cert.failures.push_back(
        fmt::format("(ii) unsold value {} exceeds ε·Σb = {}", cert.leftover_value, cert.leftover_limit));
  if (demanded_value > cert.leftover_limit + kVerifyTol * scale)
    cert.failures.push_back(
        fmt::format("(iii) excess witness value {} exceeds ε·Σb = {}", demanded_value, cert.leftover_limit));
  cert.pass = cert.failures.empty();
  return cert;
}

// ---- Fisher oracle ----

namespace {

double log_expenditure(const DemandSpec& spec, std::span<const double> q) {
  if (const auto* lin = std::get_if<Linear>(&spec)) {
    double best = kInf;
    for (std::size_t j = 0; j < q.size(); ++j)
      if (lin->v[j] > 0.0) best = std::min(best, q[j] - std::log(lin->v[j]));
    return best;
  }
  if (const auto* cd = std::get_if<CobbDouglas>(&spec)) {
    double s = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) s += cd->alpha[j] * q[j];
    return s;
  }
  const auto& ces = std::get<Ces>(spec);
  double top = -kInf;
  std::vector<double> w(q.size(), -kInf);
  for (std::size_t j = 0; j < q.size(); ++j)
    if (ces.beta[j] > 0.0) {
      w[j] = std::log(ces.beta[j]) + (1.0 - ces.sigma) * q[j];
      top = std::max(top, w[j]);
    }
  double sum = 0.0;
  for (double x : w)
    if (x > -kInf) sum += std::exp(x - top);
  return (top + std::log(sum)) / (1.0 - ces.sigma);
}

double golden_min(const std::function<double(double)>& f, double lo, double hi, int iterations, double& arg) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int k = 0; k < iterations; ++k) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = f(x2);
    }
  }
  arg = f1 <= f2 ? x1 : x2;
  return std::min(f1, f2);
}

}  // namespace

FisherEquilibrium brute_force_fisher_eq(const FisherInstance& inst) {
  if (inst.demands.empty()) throw std::invalid_argument("Fisher oracle needs at least one agent");
  const std::size_t m = goods_count(inst.demands.front());
  if (m == 0 || m > 3) throw std::invalid_argument(fmt::format("Fisher oracle handles 1 to 3 goods, got {}", m));
  for (const auto& d : inst.demands)
    if (!std::holds_alternative<Linear>(d) && !std::holds_alternative<Ces>(d) &&
        !std::holds_alternative<CobbDouglas>(d))
      throw std::invalid_argument("Fisher oracle accepts linear, CES and Cobb-Douglas agents only");
  const double total = std::accumulate(inst.budgets.begin(), inst.budgets.end(), 0.0);
  const double lo = std::log(total * 1e-9), hi = std::log(total * 1.01);
  constexpr int kIters = 70;

  std::vector<double> q(m, 0.0);
  auto dual = [&]() {
    double s = 0.0;
    for (double x : q) s += std::exp(x);
    for (std::size_t i = 0; i < inst.demands.size(); ++i)
      s -= inst.budgets[i] * log_expenditure(inst.demands[i], q);
    return s;
  };
  std::function<double(std::size_t)> level = [&](std::size_t d) -> double {
    if (d == m) return dual();
    double arg = 0.0;
    const double best = golden_min([&](double x) { q[d] = x; return level(d + 1); }, lo, hi, kIters, arg);
    q[d] = arg;
    level(d + 1);  // restore the inner minimizers for this coordinate
    return best;
  };
  level(0);

  FisherEquilibrium eq;
  eq.prices.resize(m);
  for (std::size_t j = 0; j < m; ++j) eq.prices[j] = std::exp(q[j]);
  const auto& p = eq.prices;
  const std::size_t n = inst.demands.size();
  eq.allocation.assign(n, Bundle(m, 0.0));

  // Non-linear agents have unique demands; linear agents share the rest by flow.
  std::vector<double> room(p);
  std::vector<std::size_t> linear;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::holds_alternative<Linear>(inst.demands[i])) {
      linear.push_back(i);
      continue;
    }
    eq.allocation[i] = demand(inst.demands[i], p, inst.budgets[i]).bundle;
    for (std::size_t j = 0; j < m; ++j) room[j] -= p[j] * eq.allocation[i][j];
  }
  if (!linear.empty()) {
    MaxFlow flow(linear.size() + m + 2);
    const std::size_t source = linear.size() + m, sink = source + 1;
    std::vector<std::vector<std::size_t>> edge(linear.size(), std::vector<std::size_t>(m, SIZE_MAX));
    for (std::size_t a = 0; a < linear.size(); ++a) {
      const auto& v = std::get<Linear>(inst.demands[linear[a]]).v;
      flow.add_edge(source, a, inst.budgets[linear[a]]);
      double best = 0.0;
      for (std::size_t j = 0; j < m; ++j) best = std::max(best, v[j] / p[j]);
      for (std::size_t j = 0; j < m; ++j)
        if (v[j] / p[j] >= best * (1.0 - 1e-6)) edge[a][j] = flow.add_edge(a, linear.size() + j, kInf);
    }
    for (std::size_t j = 0; j < m; ++j) flow.add_edge(linear.size() + j, sink, std::max(0.0, room[j]));
    flow.solve(source, sink);
    for (std::size_t a = 0; a < linear.size(); ++a)
      for (std::size_t j = 0; j < m; ++j)
        if (edge[a][j] != SIZE_MAX) eq.allocation[linear[a]][j] = flow.flow(edge[a][j]) / p[j];
  }
  for (std::size_t j = 0; j < m; ++j) {
    double sold = 0.0;
    for (std::size_t i = 0; i < n; ++i) sold += eq.allocation[i][j];
    eq.excess = std::max(eq.excess, std::abs(sold - 1.0));
  }
  return eq;
}

// ---- randomized properties ----

namespace {

struct Sampler {
  std::mt19937_64 rng;
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); }
  std::vector<double> simplex(std::size_t m) {
    std::vector<double> w(m);
    for (double& x : w) x = uniform(0.05, 1.0);
    const double s = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& x : w) x /= s;
    return w;
  }
};

DemandSpec sample_spec(const std::string& family, std::size_t m, Sampler& s) {
  if (family == "linear") {
    std::vector<double> v(m);
    for (double& x : v) x = s.integer(0, 4) == 0 ? 0.0 : s.uniform(0.1, 3.0);
    if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) v[0] = 1.0;
    return Linear{v};
  }
  if (family == "ces") return Ces{s.simplex(m), s.uniform(1.05, 5.0)};
  if (family == "ces_broken") return Ces{s.simplex(m), s.uniform(0.2, 0.8)};
  if (family == "cobb_douglas") return CobbDouglas{s.simplex(m)};
  if (family == "conic") {
    Conic c;
    const int parts = s.integer(2, 3);
    auto w = s.simplex(static_cast<std::size_t>(parts));
    for (int k = 0; k < parts; ++k) {
      if (s.integer(0, 1) == 0) c.parts.push_back({w[k], Ces{s.simplex(m), s.uniform(1.05, 4.0)}});
      else c.parts.push_back({w[k], CobbDouglas{s.simplex(m)}});
    }
    return c;
  }
  if (family == "basplc") {
    Basplc u;
    for (std::size_t j = 0; j < m; ++j) {
      std::vector<Segment> segs;
      double rate = s.uniform(0.5, 4.0);
      const int k = s.integer(1, 3);
      for (int t = 0; t < k; ++t) {
        segs.push_back({rate, static_cast<double>(s.integer(1, 3))});
        rate *= s.uniform(0.2, 0.9);
      }
      u.goods.push_back(std::move(segs));
    }
    u.cap = s.integer(0, 1) == 0 ? kInf : s.uniform(0.5, 10.0);
    return u;
  }
  throw std::invalid_argument(fmt::format("unknown demand family '{}'", family));
}

// Whether y is an optimal linear bundle: MBB support and full spending.
bool linear_optimal(const Linear& d, std::span<const double> p, double b, const Bundle& y, double tol) {
  double best = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) best = std::max(best, d.v[j] / p[j]);
  double spent = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (y[j] > tol && d.v[j] / p[j] < best * (1.0 - 1e-12)) return false;
    spent += p[j] * y[j];
  }
  return std::abs(spent - b) <= tol * std::max(1.0, b);
}

}  // namespace

PropertyReport property_suite(const std::string& family, int trials, std::uint64_t seed) {
  PropertyReport rep;
  rep.family = family;
  rep.trials = trials;
  Sampler s{std::mt19937_64(seed)};
  constexpr double tol = 1e-9;
  auto fail = [&](double amount, std::string what) {
    rep.worst = std::max(rep.worst, amount);
    ++rep.violations;
    if (rep.examples.size() < 10) rep.examples.push_back(std::move(what));
  };
  auto rel = [](double a, double b) { return (a - b) / std::max(1.0, std::abs(b)); };

  for (int trial = 0; trial < trials; ++trial) {
    const std::size_t m = static_cast<std::size_t>(s.integer(2, 5));
    const DemandSpec spec = sample_spec(family, m, s);
    std::vector<double> p(m);
    for (double& x : p) x = std::exp(s.uniform(std::log(0.2), std::log(5.0)));
    const double b = s.uniform(0.5, 5.0);
    const Bundle x = demand(spec, p, b).bundle;

    // Homogeneity of degree zero.
    {
      const double lambda = std::exp(s.uniform(std::log(0.1), std::log(10.0)));
      std::vector<double> lp(p);
      for (double& v : lp) v *= lambda;
      const Bundle y = demand(spec, lp, lambda * b).bundle;
      ++rep.checks;
      for (std::size_t j = 0; j < m; ++j)
        if (std::abs(rel(y[j], x[j])) > tol) {
          fail(std::abs(rel(y[j], x[j])), fmt::format("trial {}: scaling by {} moves x_{} from {} to {}", trial, lambda, j, x[j], y[j]));
          break;
        }
    }

    // Weak gross substitutes and spending monotonicity under a price rise.
    {
      std::vector<double> p2(p);
      std::vector<std::uint8_t> moved(m, 0);
      for (std::size_t j = 0; j < m; ++j)
        if (s.integer(0, 1) == 1) {
          p2[j] *= s.uniform(1.0, 3.0);
          moved[j] = 1;
        }
      const auto ans = demand_monotone(spec, p, b, p2, b, x);
      const Bundle& y = ans.bundle;
      ++rep.checks;
      if (const auto* lin = std::get_if<Linear>(&spec); lin && !linear_optimal(*lin, p2, b, y, tol))
        fail(1.0, fmt::format("trial {}: monotone linear bundle is not optimal", trial));
      if (const auto* gale = std::get_if<Basplc>(&spec)) {
        const double r = gale_kkt_residual(*gale, p2, b, y, *ans.gale);
        if (r > tol) fail(r, fmt::format("trial {}: Gale optimality residual {}", trial, r));
      }
      for (std::size_t j = 0; j < m; ++j)
        if (!moved[j] && rel(x[j], y[j]) > tol) {
          fail(rel(x[j], y[j]), fmt::format("trial {}: demand for unmoved good {} fell from {} to {}", trial, j, x[j], y[j]));
          break;
        }
      // Spending monotonicity is tallied on its own: Gale demands with
      // finite segments can spend less after a price rise.
      ++rep.spending_checks;
      const double before = dot(p, x), after = dot(p2, y);
      if (rel(before, after) > tol) {
        ++rep.spending_violations;
        if (rep.spending_examples.size() < 5)
          rep.spending_examples.push_back(fmt::format("trial {}: spending fell from {} to {}", trial, before, after));
      }
    }

    // Budget exhaustion; Gale demands may leave money unspent.
    {
      const double spent = dot(p, x);
      ++rep.checks;
      const bool gale = std::holds_alternative<Basplc>(spec);
      const double gap = gale ? rel(spent, b) : std::abs(rel(spent, b));
      if (gap > tol) fail(gap, fmt::format("trial {}: spends {} of budget {}", trial, spent, b));
    }

    // Own-price elasticity bound.
    if (const auto f = elasticity_bound(spec)) {
      const std::size_t j = static_cast<std::size_t>(s.integer(0, static_cast<int>(m) - 1));
      const double mu = s.uniform(1e-3, 1.0);
      std::vector<double> p2(p);
      p2[j] *= 1.0 + mu;
      const Bundle y = demand(spec, p2, b).bundle;
      const double floor = x[j] / std::pow(1.0 + mu, *f);
      ++rep.checks;
      if (rel(floor, y[j]) > tol)
        fail(rel(floor, y[j]), fmt::format("trial {}: raising p_{} by {} cut demand below the elasticity bound", trial, j, mu));
    }
  }
  return rep;
}

}  // namespace wgs
