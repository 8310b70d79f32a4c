#pragma once

#include <optional>
#include <string>

#include "wgs/io.hpp"

namespace wgs {

// Exit codes shared by the CLI and the Python binding.
enum ExitCode : int { kCertified = 0, kFailed = 1, kUsage = 2, kNoEquilibrium = 3 };

struct RunConfig {
  std::optional<double> eps;  // overrides the instance value
  FnpChoice fnp = FnpChoice::Auto;
  double dummy_eta = 0.0;     // exchange: 0 disables the auxiliary agent
  int max_exponent = 0;
  std::optional<SrInit> init;
  double price_cap = 0.0;
  bool audit = false;
  bool shuffle_victims = false;
  std::uint64_t seed = 0;
  StepHook on_step;
  FnpHook on_fnp;
  FnpOverride fnp_override;
};

struct RunOutcome {
  EquilibriumReport report;
  Certificate certificate;
  double certified_eps = 0.0;
  int exit_code = kFailed;
  std::string message;
};

// Throws std::invalid_argument for usage errors (bad ε, invalid instance).
double checked_eps(double eps);

RunOutcome solve_exchange(ExchangeInstance inst, const RunConfig& config);
RunOutcome solve_sr(SRInstance inst, const RunConfig& config);

json outcome_to_json(const RunOutcome& outcome, bool timing = false);

}  // namespace wgs
