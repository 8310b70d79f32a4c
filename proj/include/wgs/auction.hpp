#pragma once

#include <functional>
#include <random>

#include "wgs/fnp.hpp"
#include "wgs/market.hpp"

namespace wgs {

class Auction;

struct StepTrace {
  int iteration = 0;
  int round = 0;
  std::size_t agent = 0;
  std::vector<int> cases;       // per good: 1 (moved to high price), 2 (already high), 3 (skipped)
  double phi = 0.0;             // (1+ε)·Σ_i Σ_{H_i} c_ij p_j
  double surplus_sum = 0.0;
  int min_exponent = 0;
  std::vector<std::size_t> raised;  // goods whose price increased after this step
  FnpResult fnp;
};

using StepHook = std::function<void(const StepTrace&, const Auction&)>;
using FnpHook = std::function<void(std::size_t agent, const DemandSpec&, const FnpInput&, const FnpResult&, FnpChoice)>;
using FnpOverride = std::function<FnpResult(std::size_t agent, const FnpInput&)>;

struct AuctionOptions {
  FnpChoice fnp = FnpChoice::Auto;
  int max_exponent = 0;      // exchange: 0 selects ⌈log_{1+ε} 10⁶⌉
  double price_cap = 0.0;    // spending-restricted: 0 selects the instance bound
  bool audit = false;        // check the state invariants after every step
  bool shuffle_victims = false;
  std::uint64_t seed = 0;
  long max_steps = 20'000'000;
  // Stop when Σ surplus ≤ 3ε·min(Σ b, Σ_j p_j a_j) instead of 3ε·Σ b. Only
  // meaningful for spending-restricted markets whose goods are worth far less
  // than the budgets, where the plain test can accept the starting state.
  bool market_value_threshold = false;
  StepHook on_step;
  FnpHook on_fnp;
  FnpOverride fnp_override;
};

// The ascending-price auction. One engine serves both market models: exchange
// markets recompute budgets from endowments at every iteration, spending-
// restricted Fisher markets keep budgets fixed and sell only a_j = min{s_j, t_j/p_j}.
class Auction {
 public:
  enum class Model { Exchange, SpendingRestricted };

  static Auction exchange(const ExchangeInstance& inst, AuctionOptions opts = {});
  static Auction spending_restricted(const SRInstance& inst, AuctionOptions opts = {});

  EquilibriumReport run();

  // Individual operations, exposed for tests and tooling.
  void recompute_budgets();
  void outbid(std::size_t agent, std::size_t good, double amount);
  bool step(std::size_t agent);
  void raise_price(std::size_t good);
  void audit();

  Model model() const { return model_; }
  std::size_t agents() const { return n_; }
  std::size_t goods() const { return m_; }
  double eps() const { return eps_; }
  const PriceVector& prices() const { return prices_; }
  const std::vector<double>& high_prices() const { return highs_; }
  const std::vector<IndividualPrice>& individual() const { return individual_; }
  const std::vector<Bundle>& allocation() const { return held_; }
  const std::vector<Bundle>& certificates() const { return cert_bundle_; }
  const std::vector<double>& budgets() const { return budget_; }
  const DemandSpec& demand_of(std::size_t i) const { return demands_[i]; }
  double surplus(std::size_t i) const { return value_[i] - spend_[i]; }
  double spend(std::size_t i) const { return spend_[i]; }
  double total_surplus() const;
  double scale() const;  // p·e for exchange, Σ b for spending-restricted
  double market_value() const;  // Σ_j p_j a_j; p·e for exchange
  double stop_threshold() const;
  const Bundle& unsold() const { return unsold_; }
  const Bundle& low_sold() const { return low_; }
  const Bundle& high_sold() const { return high_; }
  const Bundle& available() const { return available_; }
  double phi() const;
  const AuditLog& audit_log() const { return audit_; }
  int iteration() const { return iteration_; }
  long outbid_passes() const { return outbid_passes_; }

 private:
  Auction() = default;
  void init_common(double eps, std::vector<DemandSpec> demands, AuctionOptions opts);
  void refresh_certificate(std::size_t i, const std::vector<double>& old_prices, double old_budget);
  void note(std::string message);
  bool holds_low(std::size_t good) const;
  Bundle target_supply() const;
  EquilibriumReport make_report(std::string status, double seconds) const;

  Model model_ = Model::Exchange;
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  double eps_ = 0.0;
  AuctionOptions opts_;
  std::vector<DemandSpec> demands_;
  std::vector<FnpChoice> routine_;

  PriceVector prices_;
  std::vector<double> highs_;
  std::vector<IndividualPrice> individual_;
  std::vector<Bundle> held_;
  Bundle unsold_, low_, high_;
  std::vector<double> budget_, spend_, value_;
  std::vector<Bundle> cert_bundle_;
  std::vector<std::optional<GaleCertificate>> cert_gale_;

  // Exchange data.
  std::vector<Bundle> endowments_;
  Bundle supply_;
  // Spending-restricted data.
  std::vector<double> caps_;
  std::vector<double> units_;
  Bundle available_;
  double price_cap_ = kInf;

  int iteration_ = 0;
  int round_ = 0;
  long steps_ = 0;
  long outbid_passes_ = 0;
  long outbid_calls_ = 0;
  long iter_passes_ = 0;
  long iter_calls_ = 0;
  long fnp_calls_ = 0;
  std::vector<int> rounds_;
  Bundle last_unsold_;
  AuditLog audit_;
  std::mt19937_64 rng_;
};

EquilibriumReport run_exchange_auction(const ExchangeInstance& inst, AuctionOptions opts = {});
EquilibriumReport run_sr_auction(const SRInstance& inst, AuctionOptions opts = {});

int default_max_exponent(double eps);
int round_cap(double eps);  // ⌈2/ε⌉

// Augments the market with an agent owning η·e and uniform Cobb-Douglas demand.
ExchangeInstance add_dummy_agent(const ExchangeInstance& inst, double eta);
// Removes the last agent. The remaining agents clear against the supply net
// of the removed agent's holdings, recorded as the report's supply override.
EquilibriumReport strip_dummy(const ExchangeInstance& augmented, const EquilibriumReport& report);

// min{s_j, t_j/p_j}; with unit supply this is min{1, t_j/p_j}.
double available_amount(double price, double cap, double units = 1.0);

struct HallResult {
  bool ok = true;
  std::vector<std::size_t> violating;  // agent set S with Σ_S b > Σ_{Γ(S)} t
};
HallResult check_hall_condition(const SRInstance& inst, bool strict = false);

struct PriceCapBound {
  double value = kInf;
  std::string kind;     // "full-interest", "strict-hall", "fallback"
  std::string warning;
};
PriceCapBound price_cap_bound(const SRInstance& inst, double fallback);

}  // namespace wgs
