#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace wgs {

using Bundle = std::vector<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Absolute tolerance for quantities and money on Θ(1)-normalized markets.
inline constexpr double kTol = 1e-9;
// Relative tolerance used to decide float equality with a price cap.
inline constexpr double kCapTol = 1e-12;

// Market prices stored as base·(1+ε)^k. Prices only move through raise(),
// so two vectors with equal exponents produce bit-equal values.
class PriceVector {
 public:
  PriceVector() = default;
  PriceVector(std::vector<double> base, double eps);
  PriceVector(std::vector<double> base, std::vector<int> exponent, double eps);

  std::size_t size() const { return base_.size(); }
  double eps() const { return eps_; }
  double base(std::size_t j) const { return base_[j]; }
  int exponent(std::size_t j) const { return exponent_[j]; }
  const std::vector<double>& bases() const { return base_; }
  const std::vector<int>& exponents() const { return exponent_; }

  double value(std::size_t j) const;
  // The next price level, (1+ε)·value(j), computed from exponent k+1.
  double high(std::size_t j) const;
  std::vector<double> values() const;
  std::vector<double> highs() const;

  void raise(std::size_t j) { ++exponent_[j]; }
  int min_exponent() const;
  int max_exponent() const;

  bool operator==(const PriceVector&) const = default;

 private:
  std::vector<double> base_;
  std::vector<int> exponent_;
  double eps_ = 0.0;
};

double price_value(const PriceVector& pv, std::size_t j);

// An agent's personal price for every good. The flag is authoritative:
// at_cap[j] means value[j] is bit-equal to the cap the price was raised against.
struct IndividualPrice {
  std::vector<double> value;
  std::vector<std::uint8_t> at_cap;

  IndividualPrice() = default;
  explicit IndividualPrice(std::vector<double> v)
      : value(std::move(v)), at_cap(value.size(), 0) {}

  std::size_t size() const { return value.size(); }
  bool operator==(const IndividualPrice&) const = default;
};

// ---- demand specifications ----

struct Linear {
  std::vector<double> v;
  bool operator==(const Linear&) const = default;
};

struct Ces {
  std::vector<double> beta;
  double sigma = 2.0;
  bool operator==(const Ces&) const = default;
};

struct CobbDouglas {
  std::vector<double> alpha;
  bool operator==(const CobbDouglas&) const = default;
};

struct ConicPart {
  double lambda = 0.0;
  std::variant<Ces, CobbDouglas> demand;
  bool operator==(const ConicPart&) const = default;
};

struct Conic {
  std::vector<ConicPart> parts;
  bool operator==(const Conic&) const = default;
};

struct Segment {
  double rate = 0.0;
  double length = 0.0;
  bool operator==(const Segment&) const = default;
};

// Separable piecewise-linear concave utility with a global utility cap.
struct Basplc {
  std::vector<std::vector<Segment>> goods;  // per good, rates strictly decreasing
  double cap = kInf;
  bool operator==(const Basplc&) const = default;
};

using DemandSpec = std::variant<Linear, Ces, CobbDouglas, Conic, Basplc>;

std::size_t goods_count(const DemandSpec& spec);
std::string family_name(const DemandSpec& spec);

// ---- instances ----

struct ExchangeInstance {
  double eps = 0.05;
  std::vector<Bundle> endowments;
  std::vector<DemandSpec> demands;

  std::size_t agents() const { return endowments.size(); }
  std::size_t goods() const { return endowments.empty() ? 0 : endowments.front().size(); }
  Bundle supply() const;
  bool operator==(const ExchangeInstance&) const = default;
};

enum class SrInit { Given, UniformEmpty };

struct SRInstance {
  double eps = 0.05;
  std::vector<double> budgets;
  std::vector<double> caps;    // may hold kInf
  std::vector<double> supply;  // units per good; 1 in the plain Fisher model
  std::vector<DemandSpec> demands;
  SrInit init = SrInit::UniformEmpty;
  std::vector<double> initial_prices;  // Given mode only

  std::size_t agents() const { return budgets.size(); }
  std::size_t goods() const { return caps.size(); }
  double total_budget() const;
  // min{t_j, Σ b_i}
  std::vector<double> effective_caps() const;
  bool operator==(const SRInstance&) const = default;
};

struct NSWInstance {
  double eps = 0.0;  // 0 selects the default 0.01/n
  std::vector<int> copies;
  std::vector<Basplc> agents;

  std::size_t agent_count() const { return agents.size(); }
  std::size_t goods() const { return copies.size(); }
  bool operator==(const NSWInstance&) const = default;
};

// ---- reports ----

struct AuditLog {
  long checks = 0;
  long violations = 0;
  double max_drift = 0.0;
  int max_rounds = 0;
  int max_min_exponent = 0;
  // Steps where an agent's spending fell after its prices rose. Not a state
  // invariant: Gale demands with finite segments can do this.
  long spending_drops = 0;
  std::vector<std::string> messages;  // first few violations
  bool operator==(const AuditLog&) const = default;
};

struct EquilibriumReport {
  std::string status;  // "terminated", "max-exponent", "price-cap", "step-limit", "stalled"
  PriceVector prices;
  std::vector<IndividualPrice> individual;
  std::vector<Bundle> allocation;
  std::vector<Bundle> certificate;
  std::vector<double> budgets;
  double total_surplus = 0.0;
  double leftover_value = 0.0;
  int iterations = 0;
  std::vector<int> rounds_per_iteration;
  long steps = 0;
  long outbid_passes = 0;
  long fnp_calls = 0;
  double wall_seconds = 0.0;
  AuditLog audit;

  // Spending-restricted runs.
  Bundle available;
  bool weak_clearing = false;
  std::vector<double> bang_per_buck;
  std::vector<double> cap_multiplier;

  // Set when a report was stripped of an auxiliary agent: the supply that
  // the remaining agents clear against.
  std::optional<Bundle> supply_override;

  bool operator==(const EquilibriumReport&) const = default;
};

std::vector<std::string> validate_instance(const ExchangeInstance& inst);
std::vector<std::string> validate_instance(const SRInstance& inst);
std::vector<std::string> validate_instance(const NSWInstance& inst);
std::vector<std::string> validate_demand(const DemandSpec& spec, std::size_t goods);

}  // namespace wgs
