#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wgs/io.hpp"

namespace wgs {

struct BenchRow {
  std::string instance;
  std::string kind;
  std::size_t agents = 0;
  std::size_t goods = 0;
  double eps = 0.0;
  std::string status;
  int iterations = 0;
  int max_rounds = 0;
  int round_cap = 0;
  long steps = 0;
  long outbid_passes = 0;
  long fnp_calls = 0;
  double wall_seconds = 0.0;
  std::string error;
};

// Runs every exchange or SR instance at every ε; failures become rows with an error.
std::vector<BenchRow> run_bench(const std::vector<std::pair<std::string, Instance>>& instances,
                                const std::vector<double>& eps_values);
// Loads *.json instances of a directory in name order.
std::vector<std::pair<std::string, Instance>> load_instance_dir(const std::filesystem::path& dir);

std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace wgs
