#include "wgs/bench.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "wgs/auction.hpp"

namespace wgs {

std::vector<BenchRow> run_bench(const std::vector<std::pair<std::string, Instance>>& instances,
                                const std::vector<double>& eps_values) {
  std::vector<BenchRow> rows;
  for (const auto& [name, inst] : instances)
    for (double eps : eps_values) {
      BenchRow row;
      row.instance = name;
      row.eps = eps;
      row.round_cap = round_cap(eps);
      try {
        EquilibriumReport r;
        if (const auto* ex = std::get_if<ExchangeInstance>(&inst)) {
          auto copy = *ex;
          copy.eps = eps;
          row.kind = "exchange";
          row.agents = copy.agents();
          row.goods = copy.goods();
          r = run_exchange_auction(copy);
        } else if (const auto* sr = std::get_if<SRInstance>(&inst)) {
          auto copy = *sr;
          copy.eps = eps;
          row.kind = "sr";
          row.agents = copy.agents();
          row.goods = copy.goods();
          r = run_sr_auction(copy);
        } else {
          row.kind = "nsw";
          row.error = "bench runs exchange and sr instances only";
          rows.push_back(row);
          continue;
        }
        row.status = r.status;
        row.iterations = r.iterations;
        row.max_rounds = r.rounds_per_iteration.empty()
                             ? 0
                             : *std::max_element(r.rounds_per_iteration.begin(), r.rounds_per_iteration.end());
        row.steps = r.steps;
        row.outbid_passes = r.outbid_passes;
        row.fnp_calls = r.fnp_calls;
        row.wall_seconds = r.wall_seconds;
      } catch (const std::exception& e) {
        row.status = "error";
        row.error = e.what();
      }
      rows.push_back(std::move(row));
    }
  return rows;
}

std::vector<std::pair<std::string, Instance>> load_instance_dir(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<std::pair<std::string, Instance>> out;
  for (const auto& f : files) out.emplace_back(f.filename().string(), instance_from_json(read_json_file(f)));
  return out;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out =
      "instance,kind,n,m,eps,status,iterations,max_rounds,round_cap,steps,outbid_passes,fnp_calls,wall_seconds,error\n";
  for (const auto& r : rows) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{:.6f},{}\n", r.instance, r.kind, r.agents, r.goods, r.eps,
                       r.status, r.iterations, r.max_rounds, r.round_cap, r.steps, r.outbid_passes, r.fnp_calls,
                       r.wall_seconds, err);
  }
  return out;
}

}  // namespace wgs
