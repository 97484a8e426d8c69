#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "report.hpp"

namespace coinflip::cli {

// Resolved experiment parameters (flags merged over the config file).
struct Config {
  std::string subcommand;
  std::string experiment;
  std::string function;
  std::vector<std::string> measures;
  std::size_t n = 16;
  std::string mode = "exact";
  std::size_t mc_samples = 10000;
  std::optional<double> epsilon;
  std::optional<std::uint64_t> seed;
  std::size_t t = 1;
  std::string coalition;
  std::int32_t b = 1;
  std::size_t ell = 1;
  std::size_t rounds = 1;
  std::optional<std::size_t> k;
  std::size_t supports = 400;
  std::size_t trials = 64;
  std::size_t restrictions = 200;
  std::size_t subset_trials = 200;
  std::size_t candidates = 5;
  std::size_t base_trials = 32;
  std::size_t retries = 0;  // 0: the procedure's default
  std::size_t pool_size = 40;
  std::size_t rollout_samples = 10000;
  double range_constant = 1.0;
  double delta_constant = 1.0;
  bool with_strategy = false;
  bool expect_failed = false;
  bool allow_mc_fallback = false;
  std::size_t threads = 0;
  std::string out;
  std::string json;

  nlohmann::json to_json() const;
};

struct Result {
  std::vector<Row> rows;
  nlohmann::json details = nlohmann::json::array();
  bool negative = false;  // a search failed or a verification did not hold
};

Result run_command(const Config& config);

}  // namespace coinflip::cli
