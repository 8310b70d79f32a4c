#include "wgs/market.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace wgs {

PriceVector::PriceVector(std::vector<double> base, double eps)
    : base_(std::move(base)), exponent_(base_.size(), 0), eps_(eps) {}

PriceVector::PriceVector(std::vector<double> base, std::vector<int> exponent, double eps)
    : base_(std::move(base)), exponent_(std::move(exponent)), eps_(eps) {
  if (base_.size() != exponent_.size())
    throw std::invalid_argument("price base and exponent sizes differ");
}

double PriceVector::value(std::size_t j) const {
  return base_[j] * std::pow(1.0 + eps_, exponent_[j]);
}

double PriceVector::high(std::size_t j) const {
  return base_[j] * std::pow(1.0 + eps_, exponent_[j] + 1);
}

std::vector<double> PriceVector::values() const {
  std::vector<double> out(size());
  for (std::size_t j = 0; j < size(); ++j) out[j] = value(j);
  return out;
}

std::vector<double> PriceVector::highs() const {
  std::vector<double> out(size());
  for (std::size_t j = 0; j < size(); ++j) out[j] = high(j);
  return out;
}

int PriceVector::min_exponent() const {
  return exponent_.empty() ? 0 : *std::min_element(exponent_.begin(), exponent_.end());
}

int PriceVector::max_exponent() const {
  return exponent_.empty() ? 0 : *std::max_element(exponent_.begin(), exponent_.end());
}

double price_value(const PriceVector& pv, std::size_t j) { return pv.value(j); }

std::size_t goods_count(const DemandSpec& spec) {
  struct {
    std::size_t operator()(const Linear& d) const { return d.v.size(); }
    std::size_t operator()(const Ces& d) const { return d.beta.size(); }
    std::size_t operator()(const CobbDouglas& d) const { return d.alpha.size(); }
    std::size_t operator()(const Conic& d) const {
      if (d.parts.empty()) return 0;
      return std::visit([](const auto& p) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(p)>, Ces>) return p.beta.size();
        else return p.alpha.size();
      }, d.parts.front().demand);
    }
    std::size_t operator()(const Basplc& d) const { return d.goods.size(); }
  } visitor;
  return std::visit(visitor, spec);
}

std::string family_name(const DemandSpec& spec) {
  static const char* names[] = {"linear", "ces", "cobb_douglas", "conic", "basplc"};
  return names[spec.index()];
}

Bundle ExchangeInstance::supply() const {
  Bundle e(goods(), 0.0);
  for (const auto& row : endowments)
    for (std::size_t j = 0; j < e.size(); ++j) e[j] += row[j];
  return e;
}

double SRInstance::total_budget() const {
  return std::accumulate(budgets.begin(), budgets.end(), 0.0);
}

std::vector<double> SRInstance::effective_caps() const {
  const double total = total_budget();
  std::vector<double> out(caps.size());
  for (std::size_t j = 0; j < caps.size(); ++j) out[j] = std::min(caps[j], total);
  return out;
}

namespace {

bool near_one(double s) { return std::abs(s - 1.0) <= 1e-9; }

void check_simplex(const std::vector<double>& w, const char* what, std::vector<std::string>& out) {
  double sum = 0.0;
  for (double x : w) {
    if (!(x >= 0.0) || !std::isfinite(x)) out.push_back(fmt::format("{} entries must be finite and nonnegative", what));
    sum += x;
  }
  if (!near_one(sum)) out.push_back(fmt::format("{} must sum to 1 (got {})", what, sum));
}

void check_ces(const Ces& d, std::vector<std::string>& out) {
  if (!(d.sigma > 1.0)) out.push_back("CES requires σ > 1");
  check_simplex(d.beta, "CES weights", out);
}

}  // namespace

std::vector<std::string> validate_demand(const DemandSpec& spec, std::size_t goods) {
  std::vector<std::string> out;
  if (goods_count(spec) != goods)
    out.push_back(fmt::format("{} demand has {} goods, market has {}", family_name(spec), goods_count(spec), goods));
  std::visit([&](const auto& d) {
    using T = std::decay_t<decltype(d)>;
    if constexpr (std::is_same_v<T, Linear>) {
      bool any = false;
      for (double x : d.v) {
        if (!(x >= 0.0) || !std::isfinite(x)) out.push_back("linear valuations must be finite and nonnegative");
        any = any || x > 0.0;
      }
      if (!any) out.push_back("linear valuations are all zero");
    } else if constexpr (std::is_same_v<T, Ces>) {
      check_ces(d, out);
    } else if constexpr (std::is_same_v<T, CobbDouglas>) {
      check_simplex(d.alpha, "Cobb-Douglas exponents", out);
    } else if constexpr (std::is_same_v<T, Conic>) {
      if (d.parts.empty()) out.push_back("conic demand needs at least one part");
      double total = 0.0;
      for (const auto& part : d.parts) {
        if (!(part.lambda >= 0.0)) out.push_back("conic weights must be nonnegative");
        total += part.lambda;
        std::visit([&](const auto& p) {
          if constexpr (std::is_same_v<std::decay_t<decltype(p)>, Ces>) {
            check_ces(p, out);
            if (p.beta.size() != goods) out.push_back("conic part has wrong number of goods");
          } else {
            check_simplex(p.alpha, "Cobb-Douglas exponents", out);
            if (p.alpha.size() != goods) out.push_back("conic part has wrong number of goods");
          }
        }, part.demand);
      }
      if (!near_one(total)) out.push_back("conic weights must sum to 1");
    } else {
      if (!(d.cap > 0.0)) out.push_back("utility cap must be positive");
      for (std::size_t j = 0; j < d.goods.size(); ++j) {
        const auto& segs = d.goods[j];
        for (std::size_t t = 0; t < segs.size(); ++t) {
          if (!(segs[t].rate >= 0.0) || !std::isfinite(segs[t].rate))
            out.push_back(fmt::format("good {} segment {} has invalid rate", j, t));
          if (!(segs[t].length > 0.0) || !std::isfinite(segs[t].length))
            out.push_back(fmt::format("good {} segment {} has invalid length", j, t));
          if (t > 0 && !(segs[t].rate < segs[t - 1].rate))
            out.push_back(fmt::format("good {} rates must be strictly decreasing", j));
        }
      }
    }
  }, spec);
  return out;
}

std::vector<std::string> validate_instance(const ExchangeInstance& inst) {
  std::vector<std::string> out;
  if (!(inst.eps > 0.0 && inst.eps <= 0.25)) out.push_back("ε must lie in (0, 0.25]");
  if (inst.endowments.empty()) out.push_back("instance has no agents");
  if (inst.demands.size() != inst.endowments.size()) out.push_back("one demand per agent required");
  const std::size_t m = inst.goods();
  for (std::size_t i = 0; i < inst.endowments.size(); ++i) {
    if (inst.endowments[i].size() != m) out.push_back(fmt::format("agent {} endowment has wrong length", i));
    for (double x : inst.endowments[i])
      if (!(x >= 0.0) || !std::isfinite(x)) out.push_back(fmt::format("agent {} endowment must be nonnegative", i));
  }
  if (out.empty()) {
    const Bundle e = inst.supply();
    for (std::size_t j = 0; j < m; ++j)
      if (!(e[j] > 0.0)) out.push_back(fmt::format("good {} has zero supply", j));
  }
  for (std::size_t i = 0; i < inst.demands.size(); ++i) {
    if (std::holds_alternative<Basplc>(inst.demands[i]))
      out.push_back(fmt::format("agent {}: capped piecewise-linear demand is only supported in spending-restricted markets", i));
    for (auto& msg : validate_demand(inst.demands[i], m)) out.push_back(fmt::format("agent {}: {}", i, msg));
  }
  return out;
}

std::vector<std::string> validate_instance(const SRInstance& inst) {
  std::vector<std::string> out;
  if (!(inst.eps > 0.0 && inst.eps <= 0.25)) out.push_back("ε must lie in (0, 0.25]");
  const std::size_t m = inst.goods();
  if (inst.budgets.empty()) out.push_back("instance has no agents");
  if (inst.demands.size() != inst.budgets.size()) out.push_back("one demand per agent required");
  if (inst.supply.size() != m) out.push_back("supply vector has wrong length");
  for (std::size_t i = 0; i < inst.budgets.size(); ++i)
    if (!(inst.budgets[i] > 0.0) || !std::isfinite(inst.budgets[i])) out.push_back(fmt::format("agent {} budget must be positive", i));
  for (std::size_t j = 0; j < m; ++j) {
    if (!(inst.caps[j] > 0.0)) out.push_back(fmt::format("good {} cap must be positive", j));
    if (j < inst.supply.size() && !(inst.supply[j] > 0.0)) out.push_back(fmt::format("good {} has zero supply", j));
  }
  if (inst.init == SrInit::Given) {
    if (inst.initial_prices.size() != m) {
      out.push_back("given initialization needs one initial price per good");
    } else {
      for (std::size_t j = 0; j < m; ++j)
        if (!(inst.initial_prices[j] > 0.0) || !(inst.initial_prices[j] < inst.caps[j]))
          out.push_back(fmt::format("good {} initial price must lie in (0, cap)", j));
    }
  }
  for (std::size_t i = 0; i < inst.demands.size(); ++i) {
    if (std::holds_alternative<Conic>(inst.demands[i]))
      out.push_back(fmt::format("agent {}: conic demand has no Gale form", i));
    for (auto& msg : validate_demand(inst.demands[i], m)) out.push_back(fmt::format("agent {}: {}", i, msg));
  }
  return out;
}

std::vector<std::string> validate_instance(const NSWInstance& inst) {
  std::vector<std::string> out;
  if (inst.agents.empty()) out.push_back("instance has no agents");
  if (inst.eps < 0.0 || inst.eps > 0.25) out.push_back("ε must lie in (0, 0.25]");
  const std::size_t m = inst.goods();
  for (std::size_t j = 0; j < m; ++j)
    if (inst.copies[j] < 1) out.push_back(fmt::format("good {} needs at least one copy", j));
  for (std::size_t i = 0; i < inst.agents.size(); ++i) {
    const auto& a = inst.agents[i];
    for (auto& msg : validate_demand(a, m)) out.push_back(fmt::format("agent {}: {}", i, msg));
    if (a.goods.size() != m) continue;
    for (std::size_t j = 0; j < m; ++j) {
      double total = 0.0;
      for (const auto& s : a.goods[j]) {
        total += s.length;
        if (s.length != std::floor(s.length))
          out.push_back(fmt::format("agent {} good {}: segment lengths must be whole copies", i, j));
      }
      if (std::abs(total - inst.copies[j]) > 1e-9)
        out.push_back(fmt::format("agent {} good {}: segment lengths sum to {} instead of {}", i, j, total, inst.copies[j]));
    }
  }
  return out;
}

}  // namespace wgs
