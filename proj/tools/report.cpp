#include "report.hpp"

#include <charconv>

namespace coinflip::cli {
namespace {

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

template <class T>
std::string opt(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_floating_point_v<T>) {
    return format_double(*v);
  } else {
    return std::to_string(*v);
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> columns = {
      "experiment", "subcommand", "function", "measure", "mode",   "mc_samples", "epsilon",  "seed",      "t",
      "s",          "coalition",  "b",        "value",   "radius", "method",     "reference", "status", "runtime_ms"};
  return columns;
}

void write_csv(std::ostream& out, const std::string& experiment, const std::string& subcommand,
               const std::vector<Row>& rows) {
  const auto& columns = csv_columns();
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << "\n";
  for (const auto& r : rows) {
    const std::vector<std::string> fields = {
        experiment,
        subcommand,
        r.function,
        r.measure,
        r.mode,
        opt(r.mc_samples),
        opt(r.epsilon),
        opt(r.seed),
        opt(r.t),
        r.coalition ? std::to_string(r.coalition->size()) : "",
        r.coalition ? r.coalition->to_string() : "",
        opt(r.b),
        opt(r.value),
        opt(r.radius),
        r.method,
        opt(r.reference),
        r.status,
        format_double(static_cast<double>(static_cast<long long>(r.runtime_ms * 1000.0)) / 1000.0)};
    for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << quote(fields[i]);
    out << "\n";
  }
}

nlohmann::json row_json(const Row& r) {
  nlohmann::json j = {{"function", r.function}, {"measure", r.measure}, {"mode", r.mode},
                      {"method", r.method},     {"status", r.status}};
  auto put = [&](const char* key, const auto& v) {
    if (v) j[key] = *v;
  };
  put("mc_samples", r.mc_samples);
  put("epsilon", r.epsilon);
  put("seed", r.seed);
  put("t", r.t);
  put("b", r.b);
  put("value", r.value);
  put("radius", r.radius);
  put("reference", r.reference);
  if (r.coalition) {
    j["coalition"] = r.coalition->to_json();
    j["s"] = r.coalition->size();
  }
  return j;
}

}  // namespace coinflip::cli
