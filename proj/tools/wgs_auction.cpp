#include <cstdlib>
#include <deque>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "wgs/bench.hpp"
#include "wgs/runner.hpp"

namespace {

using namespace wgs;

// WGS_AUCTION_LOG: "quiet", "info" (default) or "debug".
int log_level() {
  const char* env = std::getenv("WGS_AUCTION_LOG");
  if (!env) return 1;
  const std::string v = env;
  if (v == "quiet" || v == "0" || v == "off") return 0;
  if (v == "debug" || v == "2" || v == "trace") return 2;
  return 1;
}

void info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << msg << '\n';
}

void emit(const json& j, const std::string& out) {
  if (out.empty()) std::cout << j.dump(2) << '\n';
  else write_json_file(out, j);
}

struct SolveArgs {
  std::string instance;
  std::optional<double> eps;
  std::string fnp = "auto";
  double dummy_eta = 0.0;
  int max_exponent = 0;
  std::string init;
  double price_cap = 0.0;
  bool audit = false;
  bool shuffle = false;
  std::uint64_t seed = 0;
  bool timing = false;
  std::string out;
  std::string trace;
};

json header_of(const std::string& command, const SolveArgs& a) {
  json h = {{"kind", "header"},  {"command", command},          {"fnp", a.fnp},
            {"dummy_eta", a.dummy_eta}, {"max_exponent", a.max_exponent}, {"init", a.init},
            {"price_cap", a.price_cap}, {"shuffle", a.shuffle},       {"seed", a.seed}};
  if (a.eps) h["eps"] = *a.eps;
  return h;
}

RunConfig config_of(const SolveArgs& a) {
  RunConfig c;
  c.eps = a.eps;
  c.fnp = parse_fnp_choice(a.fnp);
  c.dummy_eta = a.dummy_eta;
  c.max_exponent = a.max_exponent;
  if (a.init == "given") c.init = SrInit::Given;
  else if (a.init == "uniform") c.init = SrInit::UniformEmpty;
  else if (!a.init.empty()) throw std::invalid_argument(fmt::format("unknown init mode \"{}\"", a.init));
  c.price_cap = a.price_cap;
  c.audit = a.audit;
  c.shuffle_victims = a.shuffle;
  c.seed = a.seed;
  return c;
}

// Attaches trace output and debug logging.
void attach_hooks(RunConfig& c, const std::string& command, const SolveArgs& a, std::shared_ptr<std::ofstream>& trace) {
  if (!a.trace.empty()) {
    trace = std::make_shared<std::ofstream>(a.trace);
    if (!*trace) throw std::runtime_error(fmt::format("cannot write {}", a.trace));
    *trace << header_of(command, a).dump() << '\n';
  }
  const bool debug = log_level() >= 2;
  if (!trace && !debug) return;
  c.on_step = [trace, debug](const StepTrace& t, const Auction&) {
    if (trace) {
      json line = {{"iteration", t.iteration}, {"round", t.round},           {"agent", t.agent},
                   {"cases", t.cases},         {"phi", t.phi},               {"surplus_sum", t.surplus_sum},
                   {"min_exponent", t.min_exponent}, {"raised", t.raised},   {"fnp", to_json(t.fnp)}};
      *trace << line.dump() << '\n';
    }
    if (debug)
      std::cerr << fmt::format("iter {} round {} agent {}: Σs = {:.6g}, φ = {:.6g}{}\n", t.iteration, t.round, t.agent,
                               t.surplus_sum, t.phi, t.raised.empty() ? "" : " (price increase)");
  };
}

int finish(const RunOutcome& o, const SolveArgs& a) {
  emit(outcome_to_json(o, a.timing), a.out);
  info(fmt::format("{} [{} iterations, {} steps, {} outbid passes, {:.3f} s]", o.message, o.report.iterations,
                   o.report.steps, o.report.outbid_passes, o.report.wall_seconds));
  for (const auto& f : o.certificate.failures) info("  " + f);
  return o.exit_code;
}

template <class T>
T load_as(const std::string& path, const char* what) {
  auto inst = instance_from_json(read_json_file(path));
  if (auto* x = std::get_if<T>(&inst)) return std::move(*x);
  throw std::invalid_argument(fmt::format("{} is not {} instance", path, what));
}

int cmd_solve_exchange(const SolveArgs& a) {
  auto inst = load_as<ExchangeInstance>(a.instance, "an exchange");
  auto cfg = config_of(a);
  std::shared_ptr<std::ofstream> trace;
  attach_hooks(cfg, "solve-exchange", a, trace);
  return finish(solve_exchange(std::move(inst), cfg), a);
}

int cmd_solve_sr(const SolveArgs& a) {
  auto inst = load_as<SRInstance>(a.instance, "an sr");
  auto cfg = config_of(a);
  std::shared_ptr<std::ofstream> trace;
  attach_hooks(cfg, "solve-sr", a, trace);
  return finish(solve_sr(std::move(inst), cfg), a);
}

int cmd_solve_nsw(const std::string& path, std::optional<double> eps, bool brute, bool audit, const std::string& out) {
  auto inst = load_as<NSWInstance>(path, "an nsw");
  NswOptions opts;
  if (eps) opts.eps = checked_eps(*eps);
  opts.audit = audit;
  const auto r = solve_nsw(inst, opts, brute);
  emit(to_json(r), out);
  if (r.equilibrium.status == "price-cap") {
    info("no SR-equilibrium within bound for the relaxation");
    return kNoEquilibrium;
  }
  if (r.equilibrium.status != "terminated") {
    info(fmt::format("relaxation auction stopped early: {}", r.equilibrium.status));
    return kFailed;
  }
  info(fmt::format("NSW {:.6g}, upper bound {:.6g}", r.nsw, r.upper_bound));
  if (r.optimum) {
    const bool ok = r.nsw * 2.404 >= *r.optimum * (1.0 - 1e-12) && *r.optimum <= r.upper_bound + 1e-6;
    info(fmt::format("optimum {:.6g}; ratio {:.4f}{}", *r.optimum, r.nsw > 0 ? *r.optimum / r.nsw : kInf,
                     ok ? "" : " (outside the guarantee)"));
    return ok ? kCertified : kFailed;
  }
  return kCertified;
}

int cmd_verify(const std::string& inst_path, const std::string& report_path, double eps, bool weak) {
  const auto inst = instance_from_json(read_json_file(inst_path));
  const auto report = report_from_json(read_json_file(report_path));
  Certificate cert;
  if (const auto* ex = std::get_if<ExchangeInstance>(&inst)) cert = check_approx_equilibrium(*ex, report, eps);
  else if (const auto* sr = std::get_if<SRInstance>(&inst)) cert = check_approx_sr(*sr, report, eps, weak);
  else throw std::invalid_argument("verify accepts exchange and sr instances");
  std::cout << to_json(cert).dump(2) << '\n';
  info(cert.pass ? fmt::format("certified at ε = {}", eps) : fmt::format("not certified at ε = {}", eps));
  for (const auto& f : cert.failures) info("  " + f);
  return cert.pass ? kCertified : kFailed;
}

int cmd_properties(const std::string& family, int trials, std::uint64_t seed) {
  const auto rep = property_suite(family, trials, seed);
  std::cout << to_json(rep).dump(2) << '\n';
  info(fmt::format("{}: {} checks, {} violations", family, rep.checks, rep.violations));
  return rep.violations == 0 ? kCertified : kFailed;
}

int cmd_oracle_nsw(const std::string& path) {
  const auto inst = load_as<NSWInstance>(path, "an nsw");
  const auto best = brute_force_nsw(inst);
  std::cout << json{{"optimum", best.value}, {"allocation", best.allocation}}.dump(2) << '\n';
  return kCertified;
}

int cmd_oracle_fisher(const std::string& path) {
  const auto inst = load_as<SRInstance>(path, "an sr");
  for (double t : inst.caps)
    if (std::isfinite(t)) throw std::invalid_argument("the Fisher oracle needs infinite caps");
  const auto eq = brute_force_fisher_eq({inst.budgets, inst.demands});
  json alloc = json::array();
  for (const auto& x : eq.allocation) alloc.push_back(x);
  std::cout << json{{"prices", eq.prices}, {"allocation", alloc}, {"excess", eq.excess}}.dump(2) << '\n';
  return kCertified;
}

int cmd_bench(const std::string& dir, const std::vector<double>& eps_values, const std::string& out) {
  for (double e : eps_values) checked_eps(e);
  const auto rows = run_bench(load_instance_dir(dir), eps_values);
  const auto csv = bench_csv(rows);
  if (out.empty()) {
    std::cout << csv;
  } else {
    std::ofstream f(out);
    if (!f) throw std::runtime_error(fmt::format("cannot write {}", out));
    f << csv;
  }
  int over = 0;
  for (const auto& r : rows) over += r.max_rounds > r.round_cap;
  info(fmt::format("{} runs, {} above the round cap", rows.size(), over));
  return kCertified;
}

int cmd_fnp_debug(const std::string& path) {
  const auto q = read_json_file(path);
  const auto spec = demand_from_json(q.at("demand"));
  IndividualPrice start = q.at("start").is_object() ? individual_from_json(q.at("start"))
                                                    : IndividualPrice(q.at("start").get<std::vector<double>>());
  std::vector<double> caps;
  for (const auto& c : q.at("caps")) caps.push_back(real_from_json(c));
  const Bundle held = q.at("held").get<Bundle>();
  const double budget = q.at("budget").get<double>();
  const double eps = q.value("eps", 0.05);
  const auto choice = resolve_fnp(spec, parse_fnp_choice(q.value("fnp", std::string("auto"))));
  const FnpInput in{start, caps, held, budget, eps};
  std::optional<GaleCertificate> cert;
  if (const auto* u = std::get_if<Basplc>(&spec)) cert = gale_demand_basplc(*u, start.value, budget, &held).gale;
  const auto res = find_new_prices(spec, choice, in, cert ? &*cert : nullptr);
  const auto problems = check_fnp_contract(spec, in, res, fnp_is_strong(choice));
  std::cout << json{{"routine", to_string(choice)}, {"result", to_json(res)}, {"contract_violations", problems}}.dump(2)
            << '\n';
  return problems.empty() ? kCertified : kFailed;
}

int cmd_replay(const std::string& inst_path, const std::string& trace_path, const std::string& expect,
               const std::string& out) {
  std::ifstream in(trace_path);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", trace_path));
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty trace");
  const auto header = json::parse(line);
  auto results = std::make_shared<std::deque<FnpResult>>();
  while (std::getline(in, line))
    if (!line.empty()) results->push_back(fnp_result_from_json(json::parse(line).at("fnp")));

  SolveArgs a;
  a.instance = inst_path;
  if (header.contains("eps")) a.eps = header.at("eps").get<double>();
  a.fnp = header.value("fnp", std::string("auto"));
  a.dummy_eta = header.value("dummy_eta", 0.0);
  a.max_exponent = header.value("max_exponent", 0);
  a.init = header.value("init", std::string());
  a.price_cap = header.value("price_cap", 0.0);
  a.shuffle = header.value("shuffle", false);
  a.seed = header.value("seed", std::uint64_t{0});
  auto cfg = config_of(a);
  cfg.fnp_override = [results](std::size_t, const FnpInput&) {
    if (results->empty()) throw std::runtime_error("trace ran out of recorded steps");
    auto r = std::move(results->front());
    results->pop_front();
    return r;
  };
  const auto command = header.value("command", std::string());
  RunOutcome o;
  if (command == "solve-exchange") o = solve_exchange(load_as<ExchangeInstance>(inst_path, "an exchange"), cfg);
  else if (command == "solve-sr") o = solve_sr(load_as<SRInstance>(inst_path, "an sr"), cfg);
  else throw std::invalid_argument(fmt::format("trace header names unknown command \"{}\"", command));
  emit(outcome_to_json(o), out);
  if (!results->empty()) info(fmt::format("{} recorded steps were not replayed", results->size()));
  if (expect.empty()) return o.exit_code;
  auto want = report_from_json(read_json_file(expect));
  auto got = o.report;
  want.wall_seconds = got.wall_seconds = 0.0;
  const bool same = want == got && results->empty();
  info(same ? "replay reproduces the recorded report" : "replay diverges from the recorded report");
  return same ? kCertified : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ascending-price auctions for market equilibria and Nash social welfare"};
  app.require_subcommand(1);
  int code = kCertified;

  auto add_solve_flags = [](CLI::App* sub, SolveArgs& a) {
    sub->add_option("instance", a.instance, "instance JSON")->required()->check(CLI::ExistingFile);
    sub->add_option("--eps", a.eps, "accuracy parameter in (0, 0.25]");
    sub->add_option("--fnp", a.fnp, "auto|elasticity|linear|cobb-douglas|gale|basplc");
    sub->add_flag("--audit", a.audit, "check invariants after every step");
    sub->add_flag("--shuffle-victims", a.shuffle, "seeded random outbid victim order");
    sub->add_option("--seed", a.seed, "seed for --shuffle-victims");
    sub->add_flag("--timing", a.timing, "include wall time in the report");
    sub->add_option("--out", a.out, "report path (stdout if omitted)");
    sub->add_option("--trace", a.trace, "JSON-lines step trace");
  };

  SolveArgs ex;
  auto* solve_ex = app.add_subcommand("solve-exchange", "approximate exchange-market equilibrium");
  add_solve_flags(solve_ex, ex);
  solve_ex->add_option("--dummy-eta", ex.dummy_eta, "add an auxiliary Cobb-Douglas agent owning η·e");
  solve_ex->add_option("--max-exponent", ex.max_exponent, "price exponent safety limit");
  solve_ex->callback([&] { code = cmd_solve_exchange(ex); });

  SolveArgs sr;
  auto* solve_sr_cmd = app.add_subcommand("solve-sr", "approximate spending-restricted Fisher equilibrium");
  add_solve_flags(solve_sr_cmd, sr);
  solve_sr_cmd->add_option("--init", sr.init, "given|uniform")->check(CLI::IsMember({"given", "uniform"}));
  solve_sr_cmd->add_option("--price-cap", sr.price_cap, "report nonexistence above this price");
  solve_sr_cmd->callback([&] { code = cmd_solve_sr(sr); });

  std::string nsw_path, nsw_out;
  std::optional<double> nsw_eps;
  bool nsw_brute = false, nsw_audit = false;
  auto* solve_nsw_cmd = app.add_subcommand("solve-nsw", "Nash social welfare allocation");
  solve_nsw_cmd->add_option("instance", nsw_path, "instance JSON")->required()->check(CLI::ExistingFile);
  solve_nsw_cmd->add_option("--eps", nsw_eps, "accuracy parameter (default 0.01/n)");
  solve_nsw_cmd->add_flag("--certify-bruteforce", nsw_brute, "compare with the exhaustive optimum");
  solve_nsw_cmd->add_flag("--audit", nsw_audit, "check auction invariants after every step");
  solve_nsw_cmd->add_option("--out", nsw_out, "report path (stdout if omitted)");
  solve_nsw_cmd->callback([&] { code = cmd_solve_nsw(nsw_path, nsw_eps, nsw_brute, nsw_audit, nsw_out); });

  std::string v_inst, v_report;
  double v_eps = 0.0;
  bool v_weak = false;
  auto* verify = app.add_subcommand("verify", "certify a report against an instance");
  verify->add_option("instance", v_inst)->required()->check(CLI::ExistingFile);
  verify->add_option("report", v_report)->required()->check(CLI::ExistingFile);
  verify->add_option("--eps", v_eps, "accuracy to certify at")->required()->check(CLI::PositiveNumber);
  verify->add_flag("--weak-clearing", v_weak, "accept unsold value up to ε·Σb");
  verify->callback([&] { code = cmd_verify(v_inst, v_report, v_eps, v_weak); });

  std::string family = "ces";
  int trials = 1000;
  std::uint64_t seed = 1;
  auto* props = app.add_subcommand("properties", "randomized demand-system property checks");
  props->add_option("--family", family, "linear|ces|cobb_douglas|conic|basplc|ces_broken");
  props->add_option("--trials", trials)->check(CLI::PositiveNumber);
  props->add_option("--seed", seed);
  props->callback([&] { code = cmd_properties(family, trials, seed); });

  auto* oracle = app.add_subcommand("oracle", "exhaustive reference solvers");
  oracle->require_subcommand(1);
  std::string o_path;
  auto* o_nsw = oracle->add_subcommand("nsw-bruteforce", "exact NSW optimum by enumeration");
  o_nsw->add_option("instance", o_path)->required()->check(CLI::ExistingFile);
  o_nsw->callback([&] { code = cmd_oracle_nsw(o_path); });
  auto* o_fisher = oracle->add_subcommand("fisher", "Fisher equilibrium by dual search (m <= 3)");
  o_fisher->add_option("instance", o_path)->required()->check(CLI::ExistingFile);
  o_fisher->callback([&] { code = cmd_oracle_fisher(o_path); });

  std::string b_dir, b_out;
  std::vector<double> b_eps{0.25, 0.1};
  auto* bench = app.add_subcommand("bench", "run a directory of instances and write CSV");
  bench->add_option("dir", b_dir)->required()->check(CLI::ExistingDirectory);
  bench->add_option("--eps", b_eps, "accuracy values")->delimiter(',');
  bench->add_option("--out", b_out, "CSV path (stdout if omitted)");
  bench->callback([&] { code = cmd_bench(b_dir, b_eps, b_out); });

  std::string f_query;
  auto* fnp_debug = app.add_subcommand("fnp-debug", "run one FindNewPrices query from JSON");
  fnp_debug->add_option("query", f_query)->required()->check(CLI::ExistingFile);
  fnp_debug->callback([&] { code = cmd_fnp_debug(f_query); });

  std::string r_inst, r_trace, r_expect, r_out;
  auto* replay = app.add_subcommand("replay", "rerun an auction from a step trace");
  replay->add_option("instance", r_inst)->required()->check(CLI::ExistingFile);
  replay->add_option("trace", r_trace)->required()->check(CLI::ExistingFile);
  replay->add_option("--expect", r_expect, "report to compare against")->check(CLI::ExistingFile);
  replay->add_option("--out", r_out, "report path (stdout if omitted)");
  replay->callback([&] { code = cmd_replay(r_inst, r_trace, r_expect, r_out); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  }
  return code;
}
