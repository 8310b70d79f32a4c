#include "wgs/runner.hpp"

#include <stdexcept>

#include <fmt/format.h>

namespace wgs {

double checked_eps(double eps) {
  if (!(eps > 0.0 && eps <= 0.25)) throw std::invalid_argument(fmt::format("ε = {} must lie in (0, 0.25]", eps));
  return eps;
}

namespace {

AuctionOptions options_from(const RunConfig& c) {
  AuctionOptions o;
  o.fnp = c.fnp;
  o.max_exponent = c.max_exponent;
  o.price_cap = c.price_cap;
  o.audit = c.audit;
  o.shuffle_victims = c.shuffle_victims;
  o.seed = c.seed;
  o.on_step = c.on_step;
  o.on_fnp = c.on_fnp;
  o.fnp_override = c.fnp_override;
  return o;
}

void require_valid(const std::vector<std::string>& problems) {
  if (problems.empty()) return;
  std::string msg = "invalid instance:";
  for (const auto& p : problems) msg += " " + p + ";";
  msg.pop_back();
  throw std::invalid_argument(msg);
}

}  // namespace

RunOutcome solve_exchange(ExchangeInstance inst, const RunConfig& config) {
  if (config.eps) inst.eps = *config.eps;
  checked_eps(inst.eps);
  require_valid(validate_instance(inst));
  RunOutcome out;
  if (config.dummy_eta > 0.0) {
    const auto augmented = add_dummy_agent(inst, config.dummy_eta);
    const auto full = run_exchange_auction(augmented, options_from(config));
    out.report = strip_dummy(augmented, full);
    out.certified_eps = 4.0 * inst.eps * (1.0 + config.dummy_eta);
  } else {
    out.report = run_exchange_auction(inst, options_from(config));
    out.certified_eps = 4.0 * inst.eps;
  }
  out.certificate = check_approx_equilibrium(inst, out.report, out.certified_eps);
  if (out.report.status != "terminated") {
    out.exit_code = kFailed;
    out.message = fmt::format("auction stopped early: {}", out.report.status);
  } else if (!out.certificate.pass) {
    out.exit_code = kFailed;
    out.message = fmt::format("certification at ε = {} failed", out.certified_eps);
  } else {
    out.exit_code = kCertified;
    out.message = fmt::format("{}-approximate equilibrium certified", out.certified_eps);
  }
  return out;
}

RunOutcome solve_sr(SRInstance inst, const RunConfig& config) {
  if (config.eps) inst.eps = *config.eps;
  if (config.init) inst.init = *config.init;
  checked_eps(inst.eps);
  require_valid(validate_instance(inst));
  RunOutcome out;
  out.certified_eps = 4.0 * inst.eps;
  if (const auto hall = check_hall_condition(inst); !hall.ok) {
    out.report.status = "hall-violation";
    out.exit_code = kNoEquilibrium;
    std::string set;
    for (auto i : hall.violating) set += (set.empty() ? "" : ", ") + std::to_string(i);
    out.message = fmt::format("no SR-equilibrium: agents {{{}}} have more budget than their goods can absorb", set);
    return out;
  }
  out.report = run_sr_auction(inst, options_from(config));
  if (out.report.status == "price-cap") {
    out.exit_code = kNoEquilibrium;
    out.message = "no SR-equilibrium within bound: a price exceeded the cap";
    return out;
  }
  out.certificate = check_approx_sr(inst, out.report, out.certified_eps, out.report.weak_clearing);
  if (out.report.status != "terminated") {
    out.exit_code = kFailed;
    out.message = fmt::format("auction stopped early: {}", out.report.status);
  } else if (!out.certificate.pass) {
    out.exit_code = kFailed;
    out.message = fmt::format("certification at ε = {} failed", out.certified_eps);
  } else {
    out.exit_code = kCertified;
    out.message = fmt::format("{}-approximate SR-equilibrium certified{}", out.certified_eps,
                              out.report.weak_clearing ? " (weak clearing)" : "");
  }
  return out;
}

json outcome_to_json(const RunOutcome& outcome, bool timing) {
  json j = to_json(outcome.report, timing);
  j["verification"] = to_json(outcome.certificate);
  j["certified_eps"] = outcome.certified_eps;
  j["message"] = outcome.message;
  j["exit_code"] = outcome.exit_code;
  return j;
}

}  // namespace wgs
