#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wgs/runner.hpp"

namespace py = pybind11;
using namespace wgs;

namespace {

// Instances and reports cross the boundary as JSON text; the Python package
// turns them into dicts.
Instance parse_instance(const std::string& text) { return instance_from_json(json::parse(text)); }

template <typename T>
T expect(const Instance& inst, const char* what) {
  if (const auto* p = std::get_if<T>(&inst)) return *p;
  throw std::invalid_argument(std::string("expected ") + what + " instance");
}

RunConfig make_config(std::optional<double> eps, const std::string& fnp, bool audit) {
  RunConfig cfg;
  cfg.eps = eps;
  cfg.fnp = parse_fnp_choice(fnp);
  cfg.audit = audit;
  return cfg;
}

std::string solve_exchange_json(const std::string& text, std::optional<double> eps, const std::string& fnp,
                                double dummy_eta, int max_exponent, bool audit) {
  auto inst = expect<ExchangeInstance>(parse_instance(text), "an exchange");
  auto cfg = make_config(eps, fnp, audit);
  cfg.dummy_eta = dummy_eta;
  cfg.max_exponent = max_exponent;
  py::gil_scoped_release release;
  return outcome_to_json(solve_exchange(std::move(inst), cfg)).dump();
}

std::string solve_sr_json(const std::string& text, std::optional<double> eps, const std::string& fnp,
                          std::optional<std::string> init, double price_cap, bool audit) {
  auto inst = expect<SRInstance>(parse_instance(text), "an sr");
  auto cfg = make_config(eps, fnp, audit);
  if (init) {
    if (*init == "given") cfg.init = SrInit::Given;
    else if (*init == "uniform") cfg.init = SrInit::UniformEmpty;
    else throw std::invalid_argument("init must be 'given' or 'uniform'");
  }
  cfg.price_cap = price_cap;
  py::gil_scoped_release release;
  return outcome_to_json(solve_sr(std::move(inst), cfg)).dump();
}

std::string solve_nsw_json(const std::string& text, std::optional<double> eps, bool brute_force, bool audit) {
  const auto inst = expect<NSWInstance>(parse_instance(text), "an nsw");
  NswOptions opts;
  if (eps) opts.eps = checked_eps(*eps);
  opts.audit = audit;
  py::gil_scoped_release release;
  return to_json(solve_nsw(inst, opts, brute_force)).dump();
}

std::string verify_json(const std::string& inst_text, const std::string& report_text, double eps,
                        bool weak_clearing) {
  const auto inst = parse_instance(inst_text);
  const auto report = report_from_json(json::parse(report_text));
  if (const auto* ex = std::get_if<ExchangeInstance>(&inst))
    return to_json(check_approx_equilibrium(*ex, report, eps)).dump();
  if (const auto* sr = std::get_if<SRInstance>(&inst))
    return to_json(check_approx_sr(*sr, report, eps, weak_clearing)).dump();
  throw std::invalid_argument("verify accepts exchange and sr instances");
}

std::vector<double> demand_of(const std::string& spec_text, const std::vector<double>& prices, double budget) {
  const auto spec = demand_from_json(json::parse(spec_text));
  if (goods_count(spec) != prices.size()) throw std::invalid_argument("price vector does not match the demand");
  return demand(spec, prices, budget).bundle;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Ascending-price auctions for WGS exchange markets and Nash social welfare";

  m.def("solve_exchange", &solve_exchange_json, py::arg("instance"), py::arg("eps") = py::none(),
        py::arg("fnp") = "auto", py::arg("dummy_eta") = 0.0, py::arg("max_exponent") = 0, py::arg("audit") = false);
  m.def("solve_sr", &solve_sr_json, py::arg("instance"), py::arg("eps") = py::none(), py::arg("fnp") = "auto",
        py::arg("init") = py::none(), py::arg("price_cap") = 0.0, py::arg("audit") = false);
  m.def("solve_nsw", &solve_nsw_json, py::arg("instance"), py::arg("eps") = py::none(),
        py::arg("brute_force") = false, py::arg("audit") = false);
  m.def("verify", &verify_json, py::arg("instance"), py::arg("report"), py::arg("eps"),
        py::arg("weak_clearing") = false);
  m.def("demand", &demand_of, py::arg("spec"), py::arg("prices"), py::arg("budget"));
  m.def("property_suite", [](const std::string& family, int trials, std::uint64_t seed) {
    return to_json(property_suite(family, trials, seed)).dump();
  }, py::arg("family"), py::arg("trials") = 1000, py::arg("seed") = 1);
  m.def("price_value", [](double base, int exponent, double eps) {
    return price_value(PriceVector({base}, {exponent}, eps), 0);
  }, py::arg("base"), py::arg("exponent"), py::arg("eps"));

  m.attr("EXIT_CERTIFIED") = static_cast<int>(kCertified);
  m.attr("EXIT_FAILED") = static_cast<int>(kFailed);
  m.attr("EXIT_USAGE") = static_cast<int>(kUsage);
  m.attr("EXIT_NO_EQUILIBRIUM") = static_cast<int>(kNoEquilibrium);
}
