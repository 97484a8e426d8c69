#include "coinflip/specs.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "coinflip/errors.hpp"

namespace coinflip {
namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string part;
  std::istringstream in(text);
  while (std::getline(in, part, sep)) out.push_back(part);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

std::size_t to_size(const std::string& text, const std::string& what) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &pos);
  } catch (const std::exception&) {
    throw DomainError(what + ": expected a non-negative integer, got \"" + text + "\"");
  }
  if (pos != text.size()) throw DomainError(what + ": expected a non-negative integer, got \"" + text + "\"");
  return static_cast<std::size_t>(v);
}

double to_double(const std::string& text, const std::string& what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw DomainError(what + ": expected a number, got \"" + text + "\"");
  }
  if (pos != text.size()) throw DomainError(what + ": expected a number, got \"" + text + "\"");
  return v;
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open \"" + path + "\"");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError("\"" + path + "\" is not valid JSON: " + e.what());
  }
}

// f on the first a coordinates, the rest ignored.
RangedFunction prefix(const RangedFunction& f, std::size_t n) {
  if (f.arity() > n) throw DomainError("function needs " + std::to_string(f.arity()) + " coordinates, have " +
                                       std::to_string(n));
  if (f.arity() == n) return f;
  return xor_juxtapose(f, RangedFunction::constant(n - f.arity(), 0));
}

std::size_t split_point(const std::vector<std::string>& parts, std::size_t n, const std::string& name) {
  const std::size_t a = parts.size() > 1 ? to_size(parts[1], name) : n / 2;
  if (a == 0 || a >= n) throw DomainError(name + ": split point must lie in [1, n-1]");
  return a;
}

}  // namespace

RangedFunction parse_function(const std::string& spec, std::size_t n) {
  if (spec.empty()) throw DomainError("function spec is empty");
  if (spec[0] == '@') {
    auto f = RangedFunction::from_json(read_json(spec.substr(1)));
    if (f.arity() != n) throw ArityMismatch("function file has arity " + std::to_string(f.arity()) + ", expected " +
                                            std::to_string(n));
    return f;
  }
  const auto parts = split(spec, ':');
  const std::string& kind = parts[0];
  auto need = [&](std::size_t count) {
    if (parts.size() < count) throw DomainError("function spec \"" + spec + "\" is missing a parameter");
  };
  if (kind == "or") return RangedFunction::or_function(n);
  if (kind == "and") return RangedFunction::and_function(n);
  if (kind == "parity") return RangedFunction::parity(n);
  if (kind == "majority") {
    const std::size_t k = parts.size() > 1 ? to_size(parts[1], "majority") : n;
    if (k == 0) throw DomainError("majority: prefix must be positive");
    return prefix(RangedFunction::majority(k), n);
  }
  if (kind == "itmaj") {
    std::size_t depth = 0;
    for (std::size_t w = 3; w <= n && depth < 3; w *= 3) ++depth;
    if (depth == 0) throw DomainError("itmaj: needs at least 3 coordinates");
    return prefix(RangedFunction::iterated_majority(depth), n);
  }
  if (kind == "dictator") {
    need(2);
    const std::size_t i = to_size(parts[1], "dictator");
    if (i == 0 || i > n) throw DomainError("dictator: index must lie in [1, n]");
    return RangedFunction::dictator(n, i - 1);
  }
  if (kind == "tribes") {
    need(2);
    return RangedFunction::tribes(n, to_size(parts[1], "tribes"));
  }
  if (kind == "constant") {
    need(2);
    const auto c = static_cast<std::uint32_t>(to_size(parts[1], "constant"));
    return RangedFunction::constant(n, static_cast<std::int32_t>(c), std::max<std::uint32_t>(2, c + 1));
  }
  if (kind == "random") {
    need(2);
    const std::uint64_t seed = to_size(parts[1], "random seed");
    std::vector<double> probs = {0.5, 0.5};
    double dagger = 0.0;
    if (parts.size() > 2) {
      probs.clear();
      for (const auto& p : split(parts[2], ',')) probs.push_back(to_double(p, "random probabilities"));
    }
    if (parts.size() > 3) dagger = to_double(parts[3], "random dagger probability");
    return RangedFunction::random(n, seed, probs, dagger);
  }
  if (kind == "majxoror") {
    const std::size_t a = split_point(parts, n, "majxoror");
    return xor_juxtapose(RangedFunction::majority(a), RangedFunction::or_function(n - a));
  }
  if (kind == "orxormaj") {
    const std::size_t a = split_point(parts, n, "orxormaj");
    return xor_juxtapose(RangedFunction::or_function(a), RangedFunction::majority(n - a));
  }
  if (kind == "pair-or") return pair_values(RangedFunction::or_function(n), RangedFunction::or_function(n));
  throw DomainError("unknown function spec \"" + spec + "\"");
}

ProductMeasure parse_measure(const std::string& spec) {
  if (spec.empty()) throw DomainError("measure spec is empty");
  if (spec[0] == '@') return ProductMeasure::from_json(read_json(spec.substr(1)));
  const auto parts = split(spec, ':');
  const std::string& kind = parts[0];
  if (kind == "uniform" && parts.size() == 2) return ProductMeasure::uniform(to_size(parts[1], "uniform"));
  if (kind == "bias" && parts.size() == 3) {
    const std::size_t n = to_size(parts[1], "bias");
    const std::string& p = parts[2];
    const auto slash = p.find('/');
    double bias = 0.0;
    if (slash == std::string::npos) {
      bias = to_double(p, "bias");
    } else {
      bias = to_double(p.substr(0, slash), "bias") / to_double(p.substr(slash + 1), "bias");
    }
    return ProductMeasure::constant_bias(n, bias);
  }
  if (kind == "biases" && parts.size() == 2) {
    std::vector<double> biases;
    for (const auto& p : split(parts[1], ',')) biases.push_back(to_double(p, "biases"));
    return ProductMeasure(std::move(biases));
  }
  throw DomainError("unknown measure spec \"" + spec + "\"");
}

std::vector<ZooEntry> zoo(std::size_t n) {
  std::vector<std::pair<std::string, std::string>> specs = {
      {"or", "or"},
      {"and", "and"},
      {"majority", "majority"},
      {"majority-prefix-" + std::to_string(n - 1), "majority:" + std::to_string(n - 1)},
      {"majority-prefix-" + std::to_string(n / 2 + 1), "majority:" + std::to_string(n / 2 + 1)},
      {"iterated-majority", "itmaj"},
      {"parity", "parity"},
      {"dictator", "dictator:1"},
  };
  if (n % 2 == 0) specs.push_back({"tribes-2", "tribes:2"});
  if (n % 4 == 0) specs.push_back({"tribes-4", "tribes:4"});
  specs.push_back({"maj-xor-or", "majxoror:" + std::to_string(n / 2 + 1)});
  const char* skews[] = {"0.5,0.5", "0.5,0.5", "0.5,0.5", "0.5,0.5", "0.5,0.5",
                         "0.5,0.5", "0.8,0.2", "0.2,0.8", "0.95,0.05", "0.05,0.95"};
  for (std::size_t i = 0; i < 10; ++i) {
    specs.push_back({"random-" + std::to_string(i + 1), "random:" + std::to_string(i + 1) + ":" + skews[i]});
  }
  std::vector<ZooEntry> out;
  for (const auto& [name, spec] : specs) out.push_back({name, spec, parse_function(spec, n)});
  return out;
}

}  // namespace coinflip
