#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include <json.hpp>

#include "wgs/auction.hpp"
#include "wgs/nsw.hpp"
#include "wgs/verify.hpp"

namespace wgs {

using json = nlohmann::json;
using Instance = std::variant<ExchangeInstance, SRInstance, NSWInstance>;

// Infinite reals travel as the string "inf".
json real_to_json(double x);
double real_from_json(const json& j);

json to_json(const DemandSpec& spec);
DemandSpec demand_from_json(const json& j);

json to_json(const ExchangeInstance& inst);
json to_json(const SRInstance& inst);
json to_json(const NSWInstance& inst);
json to_json(const Instance& inst);
Instance instance_from_json(const json& j);

json to_json(const PriceVector& p);
PriceVector prices_from_json(const json& j);
json to_json(const IndividualPrice& p);
IndividualPrice individual_from_json(const json& j);
json to_json(const AuditLog& log);
AuditLog audit_from_json(const json& j);

// Wall time is left out unless asked for, so reruns produce identical bytes.
json to_json(const EquilibriumReport& r, bool timing = false);
EquilibriumReport report_from_json(const json& j);

json to_json(const Certificate& c);
json to_json(const NswResult& r);
json to_json(const PropertyReport& r);
json to_json(const FnpInput& in);
json to_json(const FnpResult& r);
FnpResult fnp_result_from_json(const json& j);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);

}  // namespace wgs
