#include "wgs/io.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

namespace wgs {

json real_to_json(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  return x;
}

double real_from_json(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "nan") return std::nan("");
    throw std::invalid_argument(fmt::format("expected a number, got \"{}\"", s));
  }
  if (!j.is_number()) throw std::invalid_argument(fmt::format("expected a number, got {}", j.dump()));
  return j.get<double>();
}

namespace {

json reals(std::span<const double> xs) {
  json out = json::array();
  for (double x : xs) out.push_back(real_to_json(x));
  return out;
}

std::vector<double> reals_from(const json& j) {
  if (!j.is_array()) throw std::invalid_argument(fmt::format("expected an array, got {}", j.dump()));
  std::vector<double> out;
  for (const auto& x : j) out.push_back(real_from_json(x));
  return out;
}

json matrix(const std::vector<Bundle>& rows) {
  json out = json::array();
  for (const auto& r : rows) out.push_back(reals(r));
  return out;
}

std::vector<Bundle> matrix_from(const json& j) {
  std::vector<Bundle> out;
  for (const auto& r : j) out.push_back(reals_from(r));
  return out;
}

const json& field(const json& j, const char* key) {
  if (!j.contains(key)) throw std::invalid_argument(fmt::format("missing field \"{}\"", key));
  return j.at(key);
}

json simple_part(const std::variant<Ces, CobbDouglas>& part) {
  return std::visit([](const auto& d) { return to_json(DemandSpec{d}); }, part);
}

}  // namespace

json to_json(const DemandSpec& spec) {
  return std::visit([](const auto& d) -> json {
    using T = std::decay_t<decltype(d)>;
    if constexpr (std::is_same_v<T, Linear>) {
      return {{"type", "linear"}, {"v", reals(d.v)}};
    } else if constexpr (std::is_same_v<T, Ces>) {
      return {{"type", "ces"}, {"beta", reals(d.beta)}, {"sigma", d.sigma}};
    } else if constexpr (std::is_same_v<T, CobbDouglas>) {
      return {{"type", "cobb_douglas"}, {"alpha", reals(d.alpha)}};
    } else if constexpr (std::is_same_v<T, Conic>) {
      json parts = json::array();
      for (const auto& p : d.parts) parts.push_back({{"lambda", p.lambda}, {"demand", simple_part(p.demand)}});
      return {{"type", "conic"}, {"parts", parts}};
    } else {
      json goods = json::array();
      for (const auto& segs : d.goods) {
        json g = json::array();
        for (const auto& s : segs) g.push_back({real_to_json(s.rate), real_to_json(s.length)});
        goods.push_back(g);
      }
      return {{"type", "basplc"}, {"segments", goods}, {"cap", real_to_json(d.cap)}};
    }
  }, spec);
}

DemandSpec demand_from_json(const json& j) {
  const auto type = field(j, "type").get<std::string>();
  if (type == "linear") return Linear{reals_from(field(j, "v"))};
  if (type == "ces") return Ces{reals_from(field(j, "beta")), real_from_json(field(j, "sigma"))};
  if (type == "cobb_douglas") return CobbDouglas{reals_from(field(j, "alpha"))};
  if (type == "conic") {
    Conic c;
    for (const auto& p : field(j, "parts")) {
      const DemandSpec inner = demand_from_json(field(p, "demand"));
      ConicPart part;
      part.lambda = real_from_json(field(p, "lambda"));
      if (const auto* ces = std::get_if<Ces>(&inner)) part.demand = *ces;
      else if (const auto* cd = std::get_if<CobbDouglas>(&inner)) part.demand = *cd;
      else throw std::invalid_argument("conic parts must be CES or Cobb-Douglas");
      c.parts.push_back(std::move(part));
    }
    return c;
  }
  if (type == "basplc") {
    Basplc u;
    for (const auto& g : field(j, "segments")) {
      std::vector<Segment> segs;
      for (const auto& s : g) {
        if (!s.is_array() || s.size() != 2) throw std::invalid_argument("segments are [rate, length] pairs");
        segs.push_back({real_from_json(s[0]), real_from_json(s[1])});
      }
      u.goods.push_back(std::move(segs));
    }
    u.cap = j.contains("cap") ? real_from_json(j.at("cap")) : kInf;
    return u;
  }
  throw std::invalid_argument(fmt::format("unknown demand type \"{}\"", type));
}

json to_json(const ExchangeInstance& inst) {
  json agents = json::array();
  for (std::size_t i = 0; i < inst.agents(); ++i)
    agents.push_back({{"endowment", reals(inst.endowments[i])}, {"demand", to_json(inst.demands[i])}});
  return {{"kind", "exchange"}, {"eps", inst.eps}, {"agents", agents}};
}

json to_json(const SRInstance& inst) {
  json agents = json::array();
  for (std::size_t i = 0; i < inst.agents(); ++i)
    agents.push_back({{"budget", real_to_json(inst.budgets[i])}, {"demand", to_json(inst.demands[i])}});
  json j = {{"kind", "sr"},
            {"eps", inst.eps},
            {"agents", agents},
            {"caps", reals(inst.caps)},
            {"supply", reals(inst.supply)},
            {"init", inst.init == SrInit::Given ? "given" : "uniform"}};
  if (inst.init == SrInit::Given) j["initial_prices"] = reals(inst.initial_prices);
  return j;
}

json to_json(const NSWInstance& inst) {
  json agents = json::array();
  for (const auto& a : inst.agents) agents.push_back({{"demand", to_json(DemandSpec{a})}});
  json j = {{"kind", "nsw"}, {"copies", inst.copies}, {"agents", agents}};
  if (inst.eps > 0.0) j["eps"] = inst.eps;
  return j;
}

json to_json(const Instance& inst) {
  return std::visit([](const auto& x) { return to_json(x); }, inst);
}

Instance instance_from_json(const json& j) {
  const auto kind = field(j, "kind").get<std::string>();
  const auto& agents = field(j, "agents");
  if (kind == "exchange") {
    ExchangeInstance inst;
    inst.eps = j.value("eps", inst.eps);
    for (const auto& a : agents) {
      inst.endowments.push_back(reals_from(field(a, "endowment")));
      inst.demands.push_back(demand_from_json(field(a, "demand")));
    }
    return inst;
  }
  if (kind == "sr") {
    SRInstance inst;
    inst.eps = j.value("eps", inst.eps);
    for (const auto& a : agents) {
      inst.budgets.push_back(real_from_json(field(a, "budget")));
      inst.demands.push_back(demand_from_json(field(a, "demand")));
    }
    inst.caps = reals_from(field(j, "caps"));
    inst.supply = j.contains("supply") ? reals_from(j.at("supply")) : std::vector<double>(inst.caps.size(), 1.0);
    const auto init = j.value("init", std::string("uniform"));
    if (init == "given") inst.init = SrInit::Given;
    else if (init == "uniform") inst.init = SrInit::UniformEmpty;
    else throw std::invalid_argument(fmt::format("unknown init mode \"{}\"", init));
    if (j.contains("initial_prices")) inst.initial_prices = reals_from(j.at("initial_prices"));
    return inst;
  }
  if (kind == "nsw") {
    NSWInstance inst;
    inst.eps = j.value("eps", 0.0);
    inst.copies = field(j, "copies").get<std::vector<int>>();
    for (const auto& a : agents) {
      const auto spec = demand_from_json(a.contains("demand") ? a.at("demand") : a);
      const auto* u = std::get_if<Basplc>(&spec);
      if (!u) throw std::invalid_argument("NSW agents need basplc utilities");
      inst.agents.push_back(*u);
    }
    return inst;
  }
  throw std::invalid_argument(fmt::format("unknown instance kind \"{}\"", kind));
}

json to_json(const PriceVector& p) {
  return {{"base", reals(p.bases())}, {"exponent", p.exponents()}, {"eps", p.eps()}, {"values", reals(p.values())}};
}

PriceVector prices_from_json(const json& j) {
  return PriceVector(reals_from(field(j, "base")), field(j, "exponent").get<std::vector<int>>(),
                     field(j, "eps").get<double>());
}

json to_json(const IndividualPrice& p) {
  json flags = json::array();
  for (auto f : p.at_cap) flags.push_back(f != 0);
  return {{"value", reals(p.value)}, {"at_cap", flags}};
}

IndividualPrice individual_from_json(const json& j) {
  IndividualPrice p(reals_from(field(j, "value")));
  const auto& flags = field(j, "at_cap");
  for (std::size_t k = 0; k < flags.size() && k < p.size(); ++k) p.at_cap[k] = flags[k].get<bool>();
  return p;
}

json to_json(const AuditLog& log) {
  return {{"checks", log.checks},
          {"violations", log.violations},
          {"max_drift", log.max_drift},
          {"max_rounds", log.max_rounds},
          {"max_min_exponent", log.max_min_exponent},
          {"spending_drops", log.spending_drops},
          {"messages", log.messages}};
}

AuditLog audit_from_json(const json& j) {
  AuditLog log;
  log.checks = j.value("checks", 0L);
  log.violations = j.value("violations", 0L);
  log.max_drift = j.value("max_drift", 0.0);
  log.max_rounds = j.value("max_rounds", 0);
  log.max_min_exponent = j.value("max_min_exponent", 0);
  log.spending_drops = j.value("spending_drops", 0L);
  log.messages = j.value("messages", std::vector<std::string>{});
  return log;
}

json to_json(const EquilibriumReport& r, bool timing) {
  json individual = json::array();
  for (const auto& p : r.individual) individual.push_back(to_json(p));
  json j = {{"status", r.status},
            {"prices", to_json(r.prices)},
            {"individual", individual},
            {"allocation", matrix(r.allocation)},
            {"certificate", matrix(r.certificate)},
            {"budgets", reals(r.budgets)},
            {"total_surplus", r.total_surplus},
            {"leftover_value", r.leftover_value},
            {"iterations", r.iterations},
            {"rounds_per_iteration", r.rounds_per_iteration},
            {"steps", r.steps},
            {"outbid_passes", r.outbid_passes},
            {"fnp_calls", r.fnp_calls},
            {"audit", to_json(r.audit)},
            {"weak_clearing", r.weak_clearing}};
  if (!r.available.empty()) j["available"] = reals(r.available);
  if (!r.bang_per_buck.empty()) {
    j["bang_per_buck"] = reals(r.bang_per_buck);
    j["cap_multiplier"] = reals(r.cap_multiplier);
  }
  if (r.supply_override) j["supply_override"] = reals(*r.supply_override);
  if (timing) j["wall_seconds"] = r.wall_seconds;
  return j;
}

EquilibriumReport report_from_json(const json& j) {
  EquilibriumReport r;
  r.status = field(j, "status").get<std::string>();
  r.prices = prices_from_json(field(j, "prices"));
  for (const auto& p : field(j, "individual")) r.individual.push_back(individual_from_json(p));
  r.allocation = matrix_from(field(j, "allocation"));
  r.certificate = j.contains("certificate") ? matrix_from(j.at("certificate")) : std::vector<Bundle>{};
  r.budgets = j.contains("budgets") ? reals_from(j.at("budgets")) : std::vector<double>{};
  r.total_surplus = j.value("total_surplus", 0.0);
  r.leftover_value = j.value("leftover_value", 0.0);
  r.iterations = j.value("iterations", 0);
  r.rounds_per_iteration = j.value("rounds_per_iteration", std::vector<int>{});
  r.steps = j.value("steps", 0L);
  r.outbid_passes = j.value("outbid_passes", 0L);
  r.fnp_calls = j.value("fnp_calls", 0L);
  r.wall_seconds = j.value("wall_seconds", 0.0);
  if (j.contains("audit")) r.audit = audit_from_json(j.at("audit"));
  r.weak_clearing = j.value("weak_clearing", false);
  if (j.contains("available")) r.available = reals_from(j.at("available"));
  if (j.contains("bang_per_buck")) {
    r.bang_per_buck = reals_from(j.at("bang_per_buck"));
    r.cap_multiplier = reals_from(field(j, "cap_multiplier"));
  }
  if (j.contains("supply_override")) r.supply_override = reals_from(j.at("supply_override"));
  return r;
}

json to_json(const Certificate& c) {
  return {{"pass", c.pass},
          {"price_slack", real_to_json(c.price_slack)},
          {"domination_slack", real_to_json(c.domination_slack)},
          {"clearing_residual", real_to_json(c.clearing_residual)},
          {"leftover_value", real_to_json(c.leftover_value)},
          {"leftover_limit", real_to_json(c.leftover_limit)},
          {"failures", c.failures},
          {"notes", c.notes},
          {"witness", matrix(c.witness)}};
}

json to_json(const NswResult& r) {
  const auto& eq = r.equilibrium;
  json j = {{"status", eq.status},
            {"eps", eq.eps},
            {"prices", reals(eq.prices)},
            {"fractional", matrix(eq.report.allocation)},
            {"bang_per_buck", reals(eq.bang_per_buck)},
            {"gamma", reals(eq.gamma)},
            {"capped", eq.capped},
            {"expensive", eq.expensive},
            {"auxiliary_value", eq.auxiliary_value},
            {"allocation", r.rounded},
            {"utilities", reals(r.utilities)},
            {"nsw", r.nsw},
            {"upper_bound", real_to_json(r.upper_bound)}};
  if (r.optimum) {
    j["optimum"] = *r.optimum;
    j["ratio"] = r.nsw > 0.0 ? real_to_json(*r.optimum / r.nsw) : json("inf");
  }
  return j;
}

json to_json(const PropertyReport& r) {
  return {{"family", r.family},
          {"trials", r.trials},
          {"checks", r.checks},
          {"violations", r.violations},
          {"worst", r.worst},
          {"examples", r.examples},
          {"spending_checks", r.spending_checks},
          {"spending_violations", r.spending_violations},
          {"spending_examples", r.spending_examples}};
}

json to_json(const FnpInput& in) {
  return {{"start", to_json(in.start)},
          {"caps", reals(in.caps)},
          {"held", reals(in.held)},
          {"budget", in.budget},
          {"eps", in.eps}};
}

json to_json(const FnpResult& r) {
  json j = {{"prices", to_json(r.prices)},
            {"bundle", reals(r.bundle)},
            {"steps", r.steps},
            {"residual", r.residual},
            {"converged", r.converged},
            {"demand_tol", r.demand_tol}};
  if (r.gale)
    j["gale"] = {{"bang_per_buck", r.gale->bang_per_buck}, {"gamma", r.gale->gamma}, {"utility", r.gale->utility}};
  return j;
}

FnpResult fnp_result_from_json(const json& j) {
  FnpResult r;
  r.prices = individual_from_json(field(j, "prices"));
  r.bundle = reals_from(field(j, "bundle"));
  r.steps = j.value("steps", 0);
  r.residual = j.value("residual", 0.0);
  r.converged = j.value("converged", true);
  r.demand_tol = j.value("demand_tol", 0.0);
  if (j.contains("gale")) {
    const auto& g = j.at("gale");
    r.gale = GaleCertificate{g.at("bang_per_buck").get<double>(), g.at("gamma").get<double>(),
                             g.at("utility").get<double>()};
  }
  return r;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  out << j.dump(2) << '\n';
}

}  // namespace wgs
