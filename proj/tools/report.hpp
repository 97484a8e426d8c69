#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "coinflip/influence.hpp"

namespace coinflip::cli {

inline constexpr int kSchemaVersion = 1;

struct Row {
  std::string function;
  std::string measure;
  std::string mode;
  std::optional<std::size_t> mc_samples;
  std::optional<double> epsilon;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> t;
  std::optional<Coalition> coalition;
  std::optional<std::int32_t> b;
  std::optional<double> value;
  std::optional<double> radius;
  std::string method;
  std::optional<double> reference;
  std::string status;
  double runtime_ms = 0.0;
};

// Column order of every CSV this tool writes.
const std::vector<std::string>& csv_columns();

void write_csv(std::ostream& out, const std::string& experiment, const std::string& subcommand,
               const std::vector<Row>& rows);

// Same as the CSV row, minus the timing column.
nlohmann::json row_json(const Row& row);

// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace coinflip::cli
