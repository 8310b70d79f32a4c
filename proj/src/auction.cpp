#include "wgs/auction.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace wgs {

namespace {

constexpr std::size_t kMaxAuditMessages = 20;

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += "; ";
    out += p;
  }
  return out;
}

FnpChoice routine_for(const DemandSpec& spec, FnpChoice requested) {
  try {
    return resolve_fnp(spec, requested);
  } catch (const std::invalid_argument&) {
    // A global routine request only applies to the agents it covers.
    return resolve_fnp(spec, FnpChoice::Auto);
  }
}

}  // namespace

int default_max_exponent(double eps) {
  return static_cast<int>(std::ceil(std::log(1e6) / std::log1p(eps)));
}

int round_cap(double eps) { return static_cast<int>(std::ceil(2.0 / eps - 1e-12)); }

double available_amount(double price, double cap, double units) {
  if (!std::isfinite(cap)) return units;
  return std::min(units, cap / price);
}

void Auction::init_common(double eps, std::vector<DemandSpec> demands, AuctionOptions opts) {
  eps_ = eps;
  opts_ = std::move(opts);
  demands_ = std::move(demands);
  rng_.seed(opts_.seed);
  routine_.clear();
  for (const auto& d : demands_) routine_.push_back(routine_for(d, opts_.fnp));
  held_.assign(n_, Bundle(m_, 0.0));
  unsold_.assign(m_, 0.0);
  low_.assign(m_, 0.0);
  high_.assign(m_, 0.0);
  spend_.assign(n_, 0.0);
  value_.assign(n_, 0.0);
  budget_.assign(n_, 0.0);
  cert_bundle_.assign(n_, Bundle(m_, 0.0));
  cert_gale_.assign(n_, std::nullopt);
  rounds_.assign(1, 0);
  iteration_ = 1;
}

Auction Auction::exchange(const ExchangeInstance& inst, AuctionOptions opts) {
  if (auto bad = validate_instance(inst); !bad.empty()) throw std::invalid_argument(join(bad));
  Auction a;
  a.model_ = Model::Exchange;
  a.n_ = inst.agents();
  a.m_ = inst.goods();
  a.init_common(inst.eps, inst.demands, std::move(opts));
  a.endowments_ = inst.endowments;
  a.supply_ = inst.supply();
  a.prices_ = PriceVector(std::vector<double>(a.m_, 1.0), inst.eps);
  a.highs_ = a.prices_.highs();
  a.individual_.assign(a.n_, IndividualPrice(a.prices_.values()));
  a.unsold_ = a.supply_;
  a.last_unsold_ = a.unsold_;
  for (std::size_t i = 0; i < a.n_; ++i) {
    a.budget_[i] = dot(a.prices_.values(), a.endowments_[i]);
    a.value_[i] = a.budget_[i];
    const auto ans = demand(a.demands_[i], a.individual_[i].value, a.budget_[i]);
    a.cert_bundle_[i] = ans.bundle;
    a.cert_gale_[i] = ans.gale;
  }
  return a;
}

Auction Auction::spending_restricted(const SRInstance& inst, AuctionOptions opts) {
  if (auto bad = validate_instance(inst); !bad.empty()) throw std::invalid_argument(join(bad));
  Auction a;
  a.model_ = Model::SpendingRestricted;
  a.n_ = inst.agents();
  a.m_ = inst.goods();
  a.init_common(inst.eps, inst.demands, std::move(opts));
  a.caps_ = inst.effective_caps();
  a.units_ = inst.supply;
  a.budget_ = inst.budgets;
  const double total_budget = inst.total_budget();

  std::vector<double> base(a.m_);
  if (inst.init == SrInit::Given) {
    base = inst.initial_prices;
  } else {
    const double units = std::accumulate(a.units_.begin(), a.units_.end(), 0.0);
    for (std::size_t j = 0; j < a.m_; ++j) base[j] = std::min(inst.eps * total_budget / units, a.caps_[j]);
  }
  a.prices_ = PriceVector(base, inst.eps);
  a.highs_ = a.prices_.highs();
  a.individual_.assign(a.n_, IndividualPrice(a.prices_.values()));
  a.available_.resize(a.m_);
  for (std::size_t j = 0; j < a.m_; ++j) a.available_[j] = available_amount(base[j], a.caps_[j], a.units_[j]);

  for (std::size_t i = 0; i < a.n_; ++i) {
    const auto ans = demand(a.demands_[i], a.individual_[i].value, a.budget_[i]);
    a.cert_bundle_[i] = ans.bundle;
    a.cert_gale_[i] = ans.gale;
    a.value_[i] = dot(a.individual_[i].value, ans.bundle);
  }

  if (inst.init == SrInit::Given) {
    for (std::size_t j = 0; j < a.m_; ++j) {
      double rest = a.available_[j];
      std::size_t last = a.n_;
      for (std::size_t i = 0; i < a.n_ && rest > 0.0; ++i) {
        const double take = std::min(rest, a.cert_bundle_[i][j]);
        if (take <= 0.0) continue;
        a.held_[i][j] = take;
        rest -= take;
        last = i;
      }
      if (rest > 1e-9 * std::max(1.0, a.available_[j]) || last == a.n_)
        throw std::invalid_argument(fmt::format("given initialization: good {} is demanded only {} of {}", j,
                                                a.available_[j] - rest, a.available_[j]));
      a.held_[last][j] += std::max(0.0, rest);
      a.low_[j] = a.available_[j];
    }
    for (std::size_t i = 0; i < a.n_; ++i) a.spend_[i] = dot(a.prices_.values(), a.held_[i]);
  } else {
    a.unsold_ = a.available_;
  }
  a.last_unsold_ = a.unsold_;

  if (a.opts_.price_cap > 0.0) {
    a.price_cap_ = a.opts_.price_cap;
  } else {
    const auto bound = price_cap_bound(inst, 1e6 * std::max(1.0, total_budget));
    a.price_cap_ = bound.value;
  }
  return a;
}

double Auction::scale() const { return std::accumulate(budget_.begin(), budget_.end(), 0.0); }

double Auction::market_value() const {
  if (model_ == Model::Exchange) return scale();
  double v = 0.0;
  for (std::size_t j = 0; j < m_; ++j) v += prices_.value(j) * available_[j];
  return v;
}

double Auction::stop_threshold() const {
  const double base = opts_.market_value_threshold ? std::min(scale(), market_value()) : scale();
  return 3.0 * eps_ * base;
}

double Auction::total_surplus() const {
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i) s += surplus(i);
  return s;
}

double Auction::phi() const {
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < m_; ++j)
      if (individual_[i].at_cap[j]) s += held_[i][j] * highs_[j];
  return s;
}

Bundle Auction::target_supply() const { return model_ == Model::Exchange ? supply_ : available_; }

bool Auction::holds_low(std::size_t j) const {
  for (std::size_t k = 0; k < n_; ++k)
    if (!individual_[k].at_cap[j] && held_[k][j] > 0.0) return true;
  return false;
}

void Auction::note(std::string message) {
  ++audit_.violations;
  if (audit_.messages.size() < kMaxAuditMessages) audit_.messages.push_back(std::move(message));
}

void Auction::refresh_certificate(std::size_t i, const std::vector<double>& old_prices, double old_budget) {
  const auto ans = demand_monotone(demands_[i], old_prices, old_budget, individual_[i].value, budget_[i],
                                   cert_bundle_[i]);
  cert_bundle_[i] = ans.bundle;
  cert_gale_[i] = ans.gale;
  value_[i] = model_ == Model::Exchange ? budget_[i] : dot(individual_[i].value, ans.bundle);
}

void Auction::recompute_budgets() {
  if (model_ != Model::Exchange) return;
  const auto p = prices_.values();
  const double ref = std::max(1.0, dot(p, supply_));
  for (std::size_t i = 0; i < n_; ++i) {
    double spent = 0.0;
    for (std::size_t j = 0; j < m_; ++j) spent += held_[i][j] * (individual_[i].at_cap[j] ? highs_[j] : p[j]);
    const double drift = std::abs(spent - spend_[i]) / ref;
    audit_.max_drift = std::max(audit_.max_drift, drift);
    if (drift > kTol) note(fmt::format("agent {}: tracked spending drifted by {}", i, drift));
    spend_[i] = spent;
    const double old_budget = budget_[i];
    budget_[i] = dot(p, endowments_[i]);
    refresh_certificate(i, individual_[i].value, old_budget);
  }
}

void Auction::outbid(std::size_t i, std::size_t j, double t) {
  if (!individual_[i].at_cap[j]) throw std::logic_error("outbid requires the buyer to pay the high price");
  ++outbid_calls_;
  ++iter_calls_;
  const double hi = highs_[j];
  const double lo = prices_.value(j);
  const double ref = model_ == Model::Exchange ? supply_[j] : units_[j];
  const double tiny = 1e-12 * std::max(1.0, ref);
  if (t <= tiny) return;

  if (unsold_[j] > 0.0) {
    double take = std::min(unsold_[j], t);
    if (unsold_[j] - take <= tiny) take = unsold_[j];
    unsold_[j] = take == unsold_[j] ? 0.0 : unsold_[j] - take;
    held_[i][j] += take;
    high_[j] += take;
    spend_[i] += take * hi;
    t -= take;
  }
  while (t > tiny) {
    std::size_t victim = n_;
    if (opts_.shuffle_victims) {
      std::vector<std::size_t> pool;
      for (std::size_t k = 0; k < n_; ++k)
        if (!individual_[k].at_cap[j] && held_[k][j] > 0.0) pool.push_back(k);
      if (!pool.empty()) victim = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng_)];
    } else {
      for (std::size_t k = 0; k < n_ && victim == n_; ++k)
        if (!individual_[k].at_cap[j] && held_[k][j] > 0.0) victim = k;
    }
    if (victim == n_) break;
    ++outbid_passes_;
    ++iter_passes_;
    double& owned = held_[victim][j];
    double take = std::min(owned, t);
    if (owned - take <= tiny) take = owned;
    owned = take == owned ? 0.0 : owned - take;
    spend_[victim] -= take * lo;
    held_[i][j] += take;
    spend_[i] += take * hi;
    low_[j] -= take;
    high_[j] += take;
    t -= take;
  }
  if (!holds_low(j)) {
    const double drift = std::abs(low_[j]) / std::max(1.0, ref);
    audit_.max_drift = std::max(audit_.max_drift, drift);
    if (drift > kTol) note(fmt::format("good {}: low-price stock drifted by {}", j, drift));
    low_[j] = 0.0;
  }
}

void Auction::raise_price(std::size_t j) {
  prices_.raise(j);
  highs_[j] = prices_.high(j);
  const double low = prices_.value(j);
  std::vector<std::size_t> changed;
  std::vector<std::vector<double>> before;
  for (std::size_t k = 0; k < n_; ++k) {
    auto& ind = individual_[k];
    if (ind.at_cap[j]) {
      ind.at_cap[j] = 0;
      ind.value[j] = low;
    } else {
      changed.push_back(k);
      before.push_back(ind.value);
      ind.value[j] = low;
    }
  }
  low_[j] = high_[j];
  high_[j] = 0.0;
  if (model_ == Model::SpendingRestricted) {
    const double next = available_amount(low, caps_[j], units_[j]);
    double held = 0.0;
    for (std::size_t k = 0; k < n_; ++k) held += held_[k][j];
    double excess = held - next;
    const double tiny = 1e-15 * std::max(1.0, units_[j]);
    while (excess > tiny) {
      std::size_t victim = 0;
      for (std::size_t k = 1; k < n_; ++k)
        if (held_[k][j] > held_[victim][j]) victim = k;
      const double take = std::min(excess, held_[victim][j]);
      if (take <= 0.0) break;
      held_[victim][j] -= take;
      spend_[victim] -= take * low;
      excess -= take;
    }
    available_[j] = next;
    low_[j] = std::min(held, next);
  }
  for (std::size_t idx = 0; idx < changed.size(); ++idx) {
    const std::size_t k = changed[idx];
    refresh_certificate(k, before[idx], budget_[k]);
  }
}

bool Auction::step(std::size_t i) {
  ++steps_;
  ++fnp_calls_;
  const FnpInput in{individual_[i], highs_, held_[i], budget_[i], eps_};
  FnpResult res;
  if (opts_.fnp_override) {
    res = opts_.fnp_override(i, in);
  } else {
    const GaleCertificate* cert = cert_gale_[i] ? &*cert_gale_[i] : nullptr;
    res = find_new_prices(demands_[i], routine_[i], in, cert);
  }
  if (opts_.on_fnp) opts_.on_fnp(i, demands_[i], in, res, routine_[i]);

  StepTrace trace;
  trace.iteration = iteration_;
  trace.round = round_;
  trace.agent = i;
  trace.cases.assign(m_, 3);
  const auto was_capped = individual_[i].at_cap;
  individual_[i] = res.prices;
  for (std::size_t j = 0; j < m_; ++j) {
    const bool now = res.prices.at_cap[j];
    if (!now) continue;
    if (!was_capped[j]) {
      trace.cases[j] = 1;
      const double c = held_[i][j];
      if (c > 0.0) {
        spend_[i] += c * (highs_[j] - prices_.value(j));
        low_[j] -= c;
        high_[j] += c;
      }
    } else {
      trace.cases[j] = 2;
    }
    outbid(i, j, res.bundle[j] - held_[i][j]);
  }
  const double before = value_[i];
  cert_bundle_[i] = res.bundle;
  cert_gale_[i] = res.gale;
  if (model_ == Model::SpendingRestricted) {
    value_[i] = dot(individual_[i].value, res.bundle);
    if (value_[i] < before - kTol * std::max(1.0, scale())) ++audit_.spending_drops;
  }

  for (std::size_t j = 0; j < m_; ++j)
    if (unsold_[j] <= 0.0 && !holds_low(j)) {
      raise_price(j);
      trace.raised.push_back(j);
    }
  if (opts_.audit) audit();
  if (opts_.on_step) {
    trace.phi = phi();
    trace.surplus_sum = total_surplus();
    trace.min_exponent = prices_.min_exponent();
    trace.fnp = std::move(res);
    opts_.on_step(trace, *this);
  }
  return !trace.raised.empty();
}

void Auction::audit() {
  ++audit_.checks;
  const Bundle target = target_supply();
  const auto p = prices_.values();
  for (std::size_t j = 0; j < m_; ++j) {
    double lo = 0.0, hi = 0.0;
    for (std::size_t k = 0; k < n_; ++k) (individual_[k].at_cap[j] ? hi : lo) += held_[k][j];
    const double ref = std::max(1.0, target[j]);
    const double drift = std::max(std::abs(lo - low_[j]), std::abs(hi - high_[j])) / ref;
    audit_.max_drift = std::max(audit_.max_drift, drift);
    if (drift > kTol) note(fmt::format("good {}: sold-stock bookkeeping drifted by {}", j, drift));
    if (std::abs(unsold_[j] + lo + hi - target[j]) > kTol * ref)
      note(fmt::format("good {}: unsold + sold = {} but supply is {}", j, unsold_[j] + lo + hi, target[j]));
    if (!(unsold_[j] + lo > 0.0)) note(fmt::format("good {}: nothing left at the low price", j));
    if (unsold_[j] > last_unsold_[j]) note(fmt::format("good {}: unsold stock grew", j));
    if (unsold_[j] > 0.0 && prices_.exponent(j) != 0) note(fmt::format("good {}: unsold stock above the initial price", j));
  }
  for (std::size_t i = 0; i < n_; ++i) {
    double spent = 0.0;
    for (std::size_t j = 0; j < m_; ++j) {
      const double v = individual_[i].value[j];
      if (individual_[i].at_cap[j]) {
        if (v != highs_[j]) note(fmt::format("agent {} good {}: flagged price is not the cap", i, j));
        spent += held_[i][j] * highs_[j];
      } else {
        if (v < p[j] * (1.0 - kCapTol) || v >= highs_[j] * (1.0 - kCapTol))
          note(fmt::format("agent {} good {}: individual price {} outside [{}, {})", i, j, v, p[j], highs_[j]));
        spent += held_[i][j] * p[j];
      }
      if (held_[i][j] < 0.0) note(fmt::format("agent {} good {}: negative holding", i, j));
    }
    const double drift = std::abs(spent - spend_[i]) / std::max(1.0, scale());
    audit_.max_drift = std::max(audit_.max_drift, drift);
    if (drift > kTol) note(fmt::format("agent {}: spending bookkeeping drifted by {}", i, drift));
  }
  if (model_ == Model::Exchange) {
    audit_.max_min_exponent = std::max(audit_.max_min_exponent, prices_.min_exponent());
    if (prices_.min_exponent() > 1) note("minimum price exceeded (1+ε)");
  }
  last_unsold_ = unsold_;
}

EquilibriumReport Auction::run() {
  const auto start = std::chrono::steady_clock::now();
  const int max_rounds = round_cap(eps_);
  const int max_exp = opts_.max_exponent > 0 ? opts_.max_exponent : default_max_exponent(eps_);
  recompute_budgets();
  std::string status = "terminated";
  for (;;) {
    const double threshold = stop_threshold();
    if (total_surplus() <= threshold) break;
    if (steps_ >= opts_.max_steps) {
      status = "step-limit";
      break;
    }
    ++round_;
    ++rounds_.back();
    audit_.max_rounds = std::max(audit_.max_rounds, rounds_.back());
    if (rounds_.back() == max_rounds + 1)
      note(fmt::format("iteration {} exceeded {} rounds", iteration_, max_rounds));
    const double idle = 1e-12 * std::max(1.0, scale());
    const long passes_before = outbid_passes_ + outbid_calls_;
    bool raised = false;
    bool stepped = false;
    for (std::size_t i = 0; i < n_ && !raised; ++i) {
      if (surplus(i) <= idle) continue;
      stepped = true;
      raised = step(i);
    }
    if (raised) {
      if (iter_passes_ > static_cast<long>(n_ * m_) + iter_calls_)
        note(fmt::format("iteration {}: {} outbid passes for {} calls", iteration_, iter_passes_, iter_calls_));
      if (model_ == Model::Exchange && prices_.max_exponent() > max_exp) {
        status = "max-exponent";
        break;
      }
      bool breach = false;
      if (model_ == Model::SpendingRestricted)
        for (std::size_t j = 0; j < m_; ++j) breach = breach || prices_.value(j) > price_cap_;
      if (breach) {
        status = "price-cap";
        break;
      }
      ++iteration_;
      round_ = 0;
      iter_passes_ = iter_calls_ = 0;
      rounds_.push_back(0);
      recompute_budgets();
      continue;
    }
    if (!stepped || outbid_passes_ + outbid_calls_ == passes_before) {
      // A full round changed nothing: no further progress is possible.
      if (total_surplus() > threshold) status = "stalled";
      break;
    }
  }
  if (rounds_.back() == 0 && rounds_.size() > 1) rounds_.pop_back();
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return make_report(status, seconds);
}

EquilibriumReport Auction::make_report(std::string status, double seconds) const {
  EquilibriumReport r;
  r.status = std::move(status);
  r.prices = prices_;
  r.individual = individual_;
  r.allocation = held_;
  r.certificate = cert_bundle_;
  r.budgets = budget_;
  r.total_surplus = total_surplus();
  const auto p = prices_.values();
  const Bundle target = target_supply();
  double left = 0.0;
  for (std::size_t j = 0; j < m_; ++j) {
    double sold = 0.0;
    for (std::size_t i = 0; i < n_; ++i) sold += held_[i][j];
    left += p[j] * std::max(0.0, target[j] - sold);
  }
  r.leftover_value = left;
  r.iterations = iteration_;
  r.rounds_per_iteration = rounds_;
  r.steps = steps_;
  r.outbid_passes = outbid_passes_;
  r.fnp_calls = fnp_calls_;
  r.wall_seconds = seconds;
  r.audit = audit_;
  if (model_ == Model::SpendingRestricted) {
    r.available = available_;
    bool weak = false;
    for (double w : last_unsold_) weak = weak || w > 0.0;
    r.weak_clearing = weak || std::any_of(unsold_.begin(), unsold_.end(), [](double w) { return w > 0.0; });
    for (std::size_t i = 0; i < n_; ++i) {
      if (!cert_gale_[i]) continue;
      r.bang_per_buck.resize(n_, 0.0);
      r.cap_multiplier.resize(n_, 0.0);
      r.bang_per_buck[i] = cert_gale_[i]->bang_per_buck;
      r.cap_multiplier[i] = cert_gale_[i]->gamma;
    }
  }
  return r;
}

EquilibriumReport run_exchange_auction(const ExchangeInstance& inst, AuctionOptions opts) {
  return Auction::exchange(inst, std::move(opts)).run();
}

EquilibriumReport run_sr_auction(const SRInstance& inst, AuctionOptions opts) {
  const bool uniform = inst.init == SrInit::UniformEmpty;
  auto report = Auction::spending_restricted(inst, std::move(opts)).run();
  report.weak_clearing = report.weak_clearing || uniform;
  return report;
}

}  // namespace wgs
