#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "coinflip/adversary.hpp"
#include "coinflip/errors.hpp"
#include "coinflip/search.hpp"
#include "coinflip/specs.hpp"

namespace coinflip::cli {
namespace {

class Stopwatch {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

double need_epsilon(const Config& c) {
  if (!c.epsilon) throw DomainError("--epsilon is required for " + c.subcommand);
  return *c.epsilon;
}

std::uint64_t need_seed(const Config& c) {
  if (!c.seed) throw DomainError("--seed is required for " + c.subcommand);
  return *c.seed;
}

std::string measure_label(const Config& c) {
  if (c.measures.empty()) return "uniform:" + std::to_string(c.n);
  std::string out;
  for (std::size_t i = 0; i < c.measures.size(); ++i) out += (i ? "|" : "") + c.measures[i];
  return out;
}

// Single-round function and measure; without --measure the measure is uniform on --n coordinates.
std::pair<RangedFunction, ProductMeasure> single_round(const Config& c) {
  if (c.measures.size() > 1) throw DomainError("--measure: " + c.subcommand + " takes one measure");
  const ProductMeasure mu = c.measures.empty() ? ProductMeasure::uniform(c.n) : parse_measure(c.measures[0]);
  if (c.function.empty()) throw DomainError("--function is required for " + c.subcommand);
  return {parse_function(c.function, mu.size()), mu};
}

MultiRoundProtocol protocol_of(const Config& c) {
  if (c.rounds == 0) throw DomainError("--rounds must be positive");
  if (c.measures.empty()) throw DomainError("--measure is required for " + c.subcommand);
  if (c.measures.size() != 1 && c.measures.size() != c.rounds) {
    throw DomainError("--measure: give one measure or one per round");
  }
  std::vector<ProductMeasure> measures;
  for (std::size_t i = 0; i < c.rounds; ++i) measures.push_back(parse_measure(c.measures[c.measures.size() == 1 ? 0 : i]));
  const std::size_t n = measures[0].size();
  if (c.function.empty()) throw DomainError("--function is required for " + c.subcommand);
  return MultiRoundProtocol(c.rounds, n, parse_function(c.function, c.rounds * n), measures);
}

// Flips every coordinate with bias above 1/2.
std::pair<RangedFunction, ProductMeasure> normalized(const RangedFunction& f, const ProductMeasure& mu,
                                                     std::uint64_t& flipped) {
  flipped = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu.bias(i) > 0.5) flipped |= std::uint64_t{1} << i;
  }
  if (flipped == 0) return {f, mu};
  auto pair = negate_coordinates(f, mu, flipped);
  return {pair.function, pair.measure};
}

Row base_row(const Config& c) {
  Row r;
  r.function = c.function;
  r.measure = measure_label(c);
  r.mode = c.mode;
  return r;
}

EvalOptions eval_options(const Config& c, std::size_t outside, Row& row) {
  EvalOptions opts;
  if (c.mode == "mc") {
    opts.mode = Mode::monte_carlo;
  } else if (c.mode != "exact") {
    throw DomainError("--mode must be exact or mc");
  }
  if (opts.mode == Mode::exact && outside > kMaxExactOutside) {
    if (!c.allow_mc_fallback) {
      throw BudgetExceeded("exact evaluation needs " + std::to_string(outside) +
                           " free coordinates (limit 24); pass --allow-mc-fallback to use Monte-Carlo");
    }
    opts.mode = Mode::monte_carlo;
  }
  if (opts.mode == Mode::monte_carlo) {
    opts.seed = need_seed(c);
    opts.mc_samples = c.mc_samples;
    row.mc_samples = c.mc_samples;
    row.seed = opts.seed;
  }
  return opts;
}

void fill_outcome(Row& row, const SearchOutcome& out) {
  row.coalition = out.coalition;
  row.b = out.target;
  row.value = out.certificate.value;
  row.radius = out.certificate.radius;
  row.method = to_string(out.certificate.method);
  row.reference = out.threshold;
  row.status = out.certified() ? "certified" : "failed";
}

Result influence(const Config& c, bool boosted) {
  Stopwatch clock;
  const auto [f, mu] = single_round(c);
  const Coalition S = Coalition::parse(c.coalition);
  S.check_within(f.arity());
  Row row = base_row(c);
  const auto opts = eval_options(c, f.arity() - S.size(), row);
  const auto est = boosted ? boosted_influence(f, mu, S, c.b, c.t, opts) : coalition_influence(f, mu, S, c.b, opts);
  if (boosted) row.t = c.t;
  row.coalition = S;
  row.b = c.b;
  row.value = est.value;
  row.radius = est.radius;
  row.method = to_string(est.method);
  row.status = "ok";
  row.runtime_ms = clock.ms();
  Result res;
  res.rows.push_back(row);
  res.details.push_back(est.to_json());
  return res;
}

Result resilience(const Config& c) {
  Stopwatch clock;
  const auto [f, mu] = single_round(c);
  const double eps = need_epsilon(c);
  const auto verdict = certify_resilience(f, mu, eps, c.ell);
  Row row = base_row(c);
  row.epsilon = eps;
  row.t = c.ell;
  if (!verdict.resilient) {
    row.coalition = verdict.witness;
    row.b = verdict.b;
    row.value = verdict.value;
    row.method = "exact";
  }
  row.reference = 1.0 - eps;
  row.status = verdict.resilient ? "resilient" : "not-resilient";
  row.runtime_ms = clock.ms();
  Result res;
  res.rows.push_back(row);
  res.details.push_back(verdict.to_json());
  return res;
}

Result search_single(const Config& c) {
  Stopwatch clock;
  const auto [f0, mu0] = single_round(c);
  const double eps = need_epsilon(c);
  const std::uint64_t seed = need_seed(c);
  std::uint64_t flipped = 0;
  const auto [f, mu] = normalized(f0, mu0, flipped);
  SingleRoundOptions opts;
  opts.restrictions = c.restrictions;
  opts.support_trials = c.trials;
  opts.subset_trials = c.subset_trials;
  opts.candidates = c.candidates;
  opts.range_constant = c.range_constant;
  const auto out = find_single_round(f, mu, eps, seed, opts);
  Row row = base_row(c);
  row.epsilon = eps;
  row.seed = seed;
  fill_outcome(row, out);
  row.runtime_ms = clock.ms();
  Result res;
  res.rows.push_back(row);
  auto j = out.to_json();
  j["flipped"] = bits_to_hex(flipped, f.arity());
  res.details.push_back(j);
  res.negative = !out.certified();
  return res;
}

Result search_range(const Config& c) {
  Stopwatch clock;
  const auto [f, mu] = single_round(c);
  const double eps = need_epsilon(c);
  const std::uint64_t seed = need_seed(c);
  RangeOptions opts;
  opts.constant = c.range_constant;
  opts.base_trials = c.base_trials;
  if (c.retries) opts.retries = c.retries;
  const auto out = large_range_coalition(f, mu, c.t, eps, seed, opts);
  const double elapsed = clock.ms();
  Result res;
  for (std::size_t l = 0; l < out.level_certificates.size(); ++l) {
    Row row = base_row(c);
    row.epsilon = eps;
    row.seed = seed;
    fill_outcome(row, out);
    row.t = l + 1;
    row.value = out.level_certificates[l].value;
    row.radius = out.level_certificates[l].radius;
    row.runtime_ms = elapsed;
    res.rows.push_back(row);
  }
  if (res.rows.empty()) {
    Row row = base_row(c);
    row.epsilon = eps;
    row.seed = seed;
    fill_outcome(row, out);
    row.runtime_ms = elapsed;
    res.rows.push_back(row);
  }
  res.details.push_back(out.to_json());
  res.negative = !out.certified();
  return res;
}

Result search_multi(const Config& c) {
  Stopwatch clock;
  const auto protocol = protocol_of(c);
  const double eps = need_epsilon(c);
  const std::uint64_t seed = need_seed(c);
  MultiRoundOptions opts;
  opts.delta_constant = c.delta_constant;
  opts.range_constant = c.range_constant;
  opts.pool_size = c.pool_size;
  opts.rollout_samples = c.rollout_samples;
  if (c.retries) opts.retries = c.retries;
  opts.single.restrictions = c.restrictions;
  opts.single.support_trials = c.trials;
  opts.single.subset_trials = c.subset_trials;
  opts.single.candidates = c.candidates;
  opts.single.range_constant = c.range_constant;
  const auto out = multi_round_coalition(protocol, eps, seed, opts);
  Row row = base_row(c);
  row.epsilon = eps;
  row.seed = seed;
  row.t = c.rounds;
  fill_outcome(row, out);
  row.runtime_ms = clock.ms();
  Result res;
  res.rows.push_back(row);
  res.details.push_back(out.to_json());
  res.negative = !out.certified();
  return res;
}

Result adversary_dp(const Config& c) {
  Stopwatch clock;
  const auto protocol = protocol_of(c);
  const Coalition B = Coalition::parse(c.coalition);
  B.check_within(protocol.players());
  const auto game = optimal_influence(protocol, B, c.b);
  nlohmann::json detail = game.to_json();
  if (c.with_strategy) detail["strategy"] = extract_optimal_strategy(protocol, B, c.b).to_json();
  Row row = base_row(c);
  row.t = c.rounds;
  row.coalition = B;
  row.b = c.b;
  row.value = game.value;
  row.radius = 0.0;
  row.method = "exact";
  row.status = "ok";
  row.runtime_ms = clock.ms();
  Result res;
  res.rows.push_back(row);
  res.details.push_back(detail);
  return res;
}

double survey_reference(double eps, std::size_t supports) {
  return (1.0 - eps) - 3.0 * std::sqrt(eps * (1.0 - eps) / static_cast<double>(supports));
}

Row survey_row(const Config& c, const std::string& spec, const RangedFunction& f, const ProductMeasure& mu,
               double eps, std::uint64_t seed, nlohmann::json& detail) {
  Stopwatch clock;
  const auto survey = survey_supports(f, mu, eps, c.supports, seed, c.k);
  Row row = base_row(c);
  row.function = spec;
  row.epsilon = eps;
  row.seed = seed;
  row.b = survey.best;
  row.value = survey.fraction;
  row.method = "exact";
  row.reference = survey_reference(eps, c.supports);
  row.status = survey.fraction > *row.reference ? "pass" : "fail";
  row.runtime_ms = clock.ms();
  detail = survey.to_json();
  detail["function"] = spec;
  return row;
}

Result verify_supports(const Config& c) {
  const auto [f, mu] = single_round(c);
  const double eps = need_epsilon(c);
  const std::uint64_t seed = need_seed(c);
  Result res;
  nlohmann::json detail;
  res.rows.push_back(survey_row(c, c.function, f, mu, eps, seed, detail));
  res.details.push_back(detail);
  res.negative = res.rows.back().status != "pass";
  return res;
}

Result zoo_command(const Config& c) {
  if (c.measures.size() > 1) throw DomainError("--measure: zoo takes one measure");
  const ProductMeasure mu = c.measures.empty()
                                ? ProductMeasure::constant_bias(c.n, 1.0 / static_cast<double>(c.n))
                                : parse_measure(c.measures[0]);
  const double eps = need_epsilon(c);
  const std::uint64_t seed = need_seed(c);
  Config local = c;
  if (local.measures.empty()) local.measures = {"bias:" + std::to_string(c.n) + ":1/" + std::to_string(c.n)};
  Result res;
  for (const auto& entry : zoo(mu.size())) {
    nlohmann::json detail;
    res.rows.push_back(survey_row(local, entry.spec, entry.function, mu, eps, seed, detail));
    detail["name"] = entry.name;
    res.details.push_back(detail);
    if (res.rows.back().status != "pass") res.negative = true;
  }
  return res;
}

Result verify_or(const Config& c) {
  const std::size_t n = c.n;
  if (n < 1 || n > 26) throw DomainError("--n must lie in [1, 26]");
  const double p = 1.0 / static_cast<double>(n);
  const auto f = RangedFunction::or_function(n).tabulated();
  const auto mu = ProductMeasure::constant_bias(n, p);
  Config local = c;
  local.function = "or";
  local.measures = {"bias:" + std::to_string(n) + ":1/" + std::to_string(n)};
  Result res;
  for (std::int32_t b = 0; b < 2; ++b) {
    for (std::size_t s = 0; s < n; ++s) {
      Stopwatch clock;
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < s; ++i) members.push_back(i);
      const Coalition S(members);
      const double value = coalition_influence(f, mu, S, b).value;
      const double rest = std::pow(1.0 - p, static_cast<double>(n - s));
      // OR is 0 only when every coordinate outside S is 0.
      const double reference = b == 0 ? rest : (s == 0 ? 1.0 - rest : 1.0);
      Row row = base_row(local);
      row.coalition = S;
      row.b = b;
      row.value = value;
      row.radius = 0.0;
      row.method = "exact";
      row.reference = reference;
      row.status = std::abs(value - reference) <= 1e-12 ? "match" : "mismatch";
      row.runtime_ms = clock.ms();
      if (row.status != "match") res.negative = true;
      res.rows.push_back(row);
      res.details.push_back({{"s", s}, {"b", b}, {"value", value}, {"reference", reference},
                             {"one_minus_rest", 1.0 - rest}});
    }
  }
  return res;
}

}  // namespace

nlohmann::json Config::to_json() const {
  nlohmann::json j = {{"subcommand", subcommand},
                      {"experiment", experiment},
                      {"function", function},
                      {"measure", measures},
                      {"n", n},
                      {"mode", mode},
                      {"mc-samples", mc_samples},
                      {"t", t},
                      {"coalition", coalition},
                      {"b", b},
                      {"ell", ell},
                      {"rounds", rounds},
                      {"supports", supports},
                      {"trials", trials},
                      {"restrictions", restrictions},
                      {"subset-trials", subset_trials},
                      {"candidates", candidates},
                      {"base-trials", base_trials},
                      {"retries", retries},
                      {"pool-size", pool_size},
                      {"rollout-samples", rollout_samples},
                      {"range-constant", range_constant},
                      {"delta-constant", delta_constant},
                      {"with-strategy", with_strategy},
                      {"expect-failed", expect_failed},
                      {"allow-mc-fallback", allow_mc_fallback}};
  if (epsilon) j["epsilon"] = *epsilon;
  if (seed) j["seed"] = *seed;
  if (k) j["k"] = *k;
  return j;
}

Result run_command(const Config& c) {
  const std::string& s = c.subcommand;
  if (s == "influence") return influence(c, false);
  if (s == "boosted-influence") return influence(c, true);
  if (s == "resilience") return resilience(c);
  if (s == "search-single") return search_single(c);
  if (s == "search-range") return search_range(c);
  if (s == "search-multi") return search_multi(c);
  if (s == "adversary-dp") return adversary_dp(c);
  if (s == "verify-prop22") return verify_supports(c);
  if (s == "verify-or-example") return verify_or(c);
  if (s == "zoo") return zoo_command(c);
  throw DomainError("unknown subcommand " + s);
}

}  // namespace coinflip::cli
