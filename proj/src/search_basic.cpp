#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "coinflip/search.hpp"

namespace coinflip {
namespace {

std::uint64_t next_submask(std::uint64_t z, std::uint64_t mask) { return ((z | ~mask) + 1) & mask; }

RangedFunction fast(const RangedFunction& f) { return f.arity() <= 22 ? f.tabulated() : f; }

void check_epsilon(double epsilon, double upper, const char* op) {
  if (!(epsilon > 0.0 && epsilon <= upper)) {
    throw DomainError(std::string(op) + ": epsilon must lie in (0, " + std::to_string(upper) + "]");
  }
}

// Range values ordered by decreasing Pr_μ[f = b], ties by value.
std::vector<std::int32_t> values_by_mass(const RangedFunction& f, const ProductMeasure& measure, std::uint64_t seed,
                                         std::vector<double>& masses) {
  if (f.arity() <= kMaxExactOutside) {
    masses = value_distribution(f, measure).values;
  } else {
    masses.assign(f.range_size(), 0.0);
    Rng rng = make_rng(seed);
    const std::size_t draws = 10000;
    for (std::size_t i = 0; i < draws; ++i) {
      const auto v = f(measure.sample_bits(rng));
      if (v != kDagger) masses[static_cast<std::size_t>(v)] += 1.0 / draws;
    }
  }
  std::vector<std::int32_t> order(f.range_size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
    return masses[static_cast<std::size_t>(a)] > masses[static_cast<std::size_t>(b)];
  });
  return order;
}

// I_S^b for every b under μ, exact or (if allowed) Monte-Carlo.
std::vector<InfluenceEstimate> all_value_influences(const RangedFunction& f, const ProductMeasure& measure,
                                                    const Coalition& S, const CertifyOptions& options,
                                                    std::uint64_t seed) {
  std::vector<InfluenceEstimate> out;
  const std::size_t outside = f.arity() - S.size();
  if (outside <= kMaxExactOutside && f.range_size() <= 64) {
    const ProductMeasure one[] = {measure};
    const auto profile = block_influence_profile(f, one, S);
    for (double v : profile[0]) out.push_back(InfluenceEstimate::exact(v));
    return out;
  }
  for (std::uint32_t b = 0; b < f.range_size(); ++b) {
    out.push_back(certify_influence(f, measure, S, static_cast<std::int32_t>(b), options, seed));
  }
  return out;
}

}  // namespace

nlohmann::json SearchOutcome::to_json() const {
  nlohmann::json j = {{"status", certified() ? "certified" : "failed"},
                      {"coalition", coalition.to_json()},
                      {"size", coalition.size()},
                      {"b", target},
                      {"threshold", threshold},
                      {"certificate", certificate.to_json()},
                      {"trace", trace}};
  if (!level_certificates.empty()) {
    auto levels = nlohmann::json::array();
    for (const auto& c : level_certificates) levels.push_back(c.to_json());
    j["level_certificates"] = levels;
  }
  return j;
}

InfluenceEstimate certify_influence(const RangedFunction& f, const ProductMeasure& measure, const Coalition& S,
                                    std::int32_t b, const CertifyOptions& options, std::uint64_t seed) {
  if (f.arity() - S.size() <= kMaxExactOutside) return coalition_influence(f, measure, S, b);
  if (!options.allow_mc) {
    throw BudgetExceeded("certificate needs more than 24 free coordinates; Monte-Carlo fallback not enabled");
  }
  return coalition_influence(f, measure, S, b, {Mode::monte_carlo, options.mc_samples, seed});
}

Coalition sample_support(const ProductMeasure& measure, std::size_t k, Rng& rng) {
  return Coalition::from_mask(measure.boost(k).sample_bits(rng));
}

std::size_t boosted_support_size(double epsilon) {
  check_epsilon(epsilon, 0.5, "boosted_support_size");
  return static_cast<std::size_t>(std::ceil(10.0 * std::log(1.0 / epsilon) / epsilon));
}

SearchOutcome boosted_coalition(const RangedFunction& f_in, const ProductMeasure& measure, double epsilon,
                                std::size_t trials, std::uint64_t seed, const BoostedOptions& options) {
  check_epsilon(epsilon, 0.5, "boosted_coalition");
  if (f_in.arity() != measure.size()) throw ArityMismatch("boosted_coalition: function and measure arity differ");
  const RangedFunction f = fast(f_in);
  const std::size_t k = options.k.value_or(boosted_support_size(epsilon));
  std::vector<double> masses;
  const auto order = values_by_mass(f, measure, seed, masses);
  const ProductMeasure boosted = measure.boost(k);

  SearchOutcome out;
  out.threshold = 1.0 - epsilon;
  out.trace = {{"procedure", "boosted"}, {"k", k}, {"epsilon", epsilon}, {"value_order", order},
               {"value_masses", masses}};
  std::size_t attempts = 0;
  bool have_best = false;
  for (std::size_t i = 0; i < trials; ++i) {
    ++attempts;
    Rng rng = make_rng(derive_seed(seed, i));
    const Coalition S = Coalition::from_mask(boosted.sample_bits(rng));
    const auto values = all_value_influences(f, measure, S, options.certify, derive_seed(seed, i));
    for (auto b : order) {
      const auto& est = values[static_cast<std::size_t>(b)];
      if (!have_best || est.upper() > out.certificate.upper()) {
        have_best = true;
        out.coalition = S;
        out.target = b;
        out.certificate = est;
      }
      if (est.upper() >= out.threshold - kCertifyTolerance) {
        out.status = SearchStatus::certified;
        out.coalition = S;
        out.target = b;
        out.certificate = est;
        out.trace["attempts"] = attempts;
        return out;
      }
    }
  }
  out.trace["attempts"] = attempts;
  out.trace["failure"] = "no sampled support certified at 1 - epsilon";
  return out;
}

nlohmann::json SupportSurvey::to_json() const {
  return {{"k", k}, {"supports", supports}, {"successes", successes}, {"best_b", best}, {"fraction", fraction}};
}

SupportSurvey survey_supports(const RangedFunction& f_in, const ProductMeasure& measure, double epsilon,
                              std::size_t supports, std::uint64_t seed, std::optional<std::size_t> k) {
  check_epsilon(epsilon, 0.5, "survey_supports");
  if (f_in.arity() != measure.size()) throw ArityMismatch("survey_supports: function and measure arity differ");
  if (f_in.range_size() > 64) throw DomainError("survey_supports: range size above 64");
  const RangedFunction f = fast(f_in);
  SupportSurvey survey;
  survey.k = k.value_or(boosted_support_size(epsilon));
  survey.supports = supports;
  survey.successes.assign(f.range_size(), 0);
  const ProductMeasure boosted = measure.boost(survey.k);
  const ProductMeasure one[] = {measure};
  for (std::size_t i = 0; i < supports; ++i) {
    Rng rng = make_rng(derive_seed(seed, i));
    const Coalition S = Coalition::from_mask(boosted.sample_bits(rng));
    const auto profile = block_influence_profile(f, one, S)[0];
    for (std::size_t b = 0; b < profile.size(); ++b) {
      if (profile[b] >= 1.0 - epsilon - kCertifyTolerance) ++survey.successes[b];
    }
  }
  const auto best = std::max_element(survey.successes.begin(), survey.successes.end());
  survey.best = static_cast<std::int32_t>(best - survey.successes.begin());
  survey.fraction = supports == 0 ? 0.0 : static_cast<double>(*best) / static_cast<double>(supports);
  return survey;
}

nlohmann::json ConditionReport::to_json() const {
  const char* names[] = {"condition-one", "condition-two", "neither"};
  return {{"condition_one", condition_one},
          {"condition_two", condition_two},
          {"fraction_one", fraction_one},
          {"fraction_two", fraction_two},
          {"outer_radius", outer_radius},
          {"inner_radius", inner_radius},
          {"verdict", names[static_cast<int>(verdict)]}};
}

ConditionReport classify_conditions(const RangedFunction& f, const ProductMeasure& measure, double epsilon,
                                    std::int32_t b, std::size_t outer_samples, std::size_t inner_samples,
                                    std::uint64_t seed) {
  if (f.arity() != measure.size()) throw ArityMismatch("classify_conditions: function and measure arity differ");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("classify_conditions: epsilon must lie in (0,1)");
  if (outer_samples == 0 || inner_samples == 0) throw DomainError("classify_conditions: sample counts must be positive");
  ConditionReport report;
  report.outer_radius = hoeffding_radius(outer_samples);
  report.inner_radius = hoeffding_radius(inner_samples);
  Rng outer = make_rng(derive_seed(seed, 0));
  Rng inner = make_rng(derive_seed(seed, 1));
  std::size_t one = 0;
  std::size_t two = 0;
  for (std::size_t i = 0; i < outer_samples; ++i) {
    const auto x = measure.sample_bits(outer);
    std::size_t hits = 0;
    for (std::size_t j = 0; j < inner_samples; ++j) {
      if (f(x | measure.sample_bits(inner)) == b) ++hits;
    }
    const double q = static_cast<double>(hits) / static_cast<double>(inner_samples) - report.inner_radius;
    if (q >= 1.0 - epsilon) ++one;
    if (q >= epsilon) ++two;
  }
  report.fraction_one = static_cast<double>(one) / static_cast<double>(outer_samples);
  report.fraction_two = static_cast<double>(two) / static_cast<double>(outer_samples);
  report.condition_one = report.fraction_one - report.outer_radius > epsilon / 2.0;
  report.condition_two = report.fraction_two - report.outer_radius >= 1.0 - epsilon / 2.0;
  if (report.condition_one) {
    report.verdict = ConditionReport::Verdict::condition_one;
  } else if (report.condition_two) {
    report.verdict = ConditionReport::Verdict::condition_two;
  }
  return report;
}

std::size_t decompose_bias_limit(double alpha) {
  return static_cast<std::size_t>(std::ceil(std::log(1.0 / alpha) / std::log(4.0) - 1e-12));
}

BiasSplit decompose_bias(double p, double alpha) {
  if (!(alpha > 0.0 && alpha < 0.5)) throw DomainError("decompose_bias: alpha must lie in (0, 1/2)");
  if (!(p > alpha && p <= 0.5)) throw DomainError("decompose_bias: p must lie in (alpha, 1/2]");
  std::size_t t = 1;
  while (!(std::pow(0.25, static_cast<double>(t)) < p && p < std::pow(0.75, static_cast<double>(t)))) ++t;
  return {std::exp(std::log(p) / static_cast<double>(t)), t};
}

std::size_t small_bias_subset_size(std::size_t n, double alpha, double gamma) {
  if (n < 2) throw DomainError("small_bias_subset_size: n must be at least 2");
  const double bound = static_cast<double>(n) * std::log2(1.0 / alpha) / (2.0 * gamma * std::log2(static_cast<double>(n)));
  return static_cast<std::size_t>(std::ceil(bound - 1e-12));
}

SearchOutcome random_small_bias(const RangedFunction& h_in, const ProductMeasure& measure, double alpha, double gamma,
                                std::size_t m, std::size_t trials, std::uint64_t seed) {
  if (h_in.arity() != measure.size()) throw ArityMismatch("random_small_bias: function and measure arity differ");
  if (h_in.range_size() != 2) throw DomainError("random_small_bias: h must be Boolean");
  if (!(alpha > 0.0 && alpha < 0.5)) throw DomainError("random_small_bias: alpha must lie in (0, 1/2)");
  if (!(gamma > 0.0 && gamma < 0.5)) throw DomainError("random_small_bias: gamma must lie in (0, 1/2)");
  const std::size_t n = h_in.arity();
  for (std::size_t i = 0; i < n; ++i) {
    const double p = measure.bias(i);
    if (!(p > alpha && p <= 0.5)) {
      throw PreconditionViolated("random_small_bias: bias of coordinate " + std::to_string(i + 1) +
                                 " outside (alpha, 1/2]");
    }
  }
  const std::size_t m_min = small_bias_subset_size(n, alpha, gamma);
  if (m > n || m < m_min) {
    throw PreconditionViolated("random_small_bias: m = " + std::to_string(m) + " outside [" + std::to_string(m_min) +
                               ", " + std::to_string(n) + "]");
  }
  const RangedFunction h = fast(h_in);
  const double mean = value_distribution(h, measure).values[1];
  if (mean < gamma) {
    throw PreconditionViolated("random_small_bias: E[h] = " + std::to_string(mean) + " below gamma");
  }

  SearchOutcome out;
  out.target = 1;
  out.threshold = 1.0 - gamma;
  out.trace = {{"procedure", "random-small-bias"}, {"alpha", alpha}, {"gamma", gamma}, {"m", m},
               {"m_min", m_min}, {"mean", mean}};
  for (std::size_t i = 0; i < trials; ++i) {
    Rng rng = make_rng(derive_seed(seed, i));
    const auto members = sample_subset(rng, n, m);
    const Coalition S(members);
    const auto cert = certify_influence(h, measure, S, 1, {}, 0);
    if (i == 0 || cert.value > out.certificate.value) {
      out.coalition = S;
      out.certificate = cert;
    }
    if (cert.value >= out.threshold - kCertifyTolerance) {
      out.status = SearchStatus::certified;
      out.coalition = S;
      out.certificate = cert;
      out.trace["attempts"] = i + 1;
      return out;
    }
  }
  out.trace["attempts"] = trials;
  out.trace["failure"] = "no sampled subset certified at 1 - gamma";
  return out;
}

SearchOutcome greedy_small_bias(const RangedFunction& f_in, const ProductMeasure& measure, double epsilon,
                                std::int32_t b, std::size_t budget) {
  if (f_in.arity() != measure.size()) throw ArityMismatch("greedy_small_bias: function and measure arity differ");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("greedy_small_bias: epsilon must lie in (0,1)");
  const RangedFunction f = fast(f_in);
  const std::size_t n = f.arity();
  if (n > 22) throw BudgetExceeded("greedy_small_bias: n above 22");
  const auto dist = value_distribution(f, measure);
  if (b < 0 || static_cast<std::uint32_t>(b) >= f.range_size()) throw DomainError("greedy_small_bias: b outside range");
  double current = dist.values[static_cast<std::size_t>(b)];
  if (current < epsilon) {
    throw PreconditionViolated("greedy_small_bias: Pr[f = b] = " + std::to_string(current) + " below epsilon");
  }

  std::uint64_t fixed = 0;
  std::uint64_t values = 0;
  auto steps = nlohmann::json::array();
  const double target = 1.0 - epsilon - kCertifyTolerance;
  while (current < target && static_cast<std::size_t>(popcount(fixed)) < budget && popcount(fixed) < static_cast<int>(n)) {
    const std::uint64_t free = low_mask(n) & ~fixed;
    double best_influence = -1.0;
    std::size_t best_k = 0;
    double best_p0 = 0.0;
    double best_p1 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (!((free >> k) & 1U)) continue;
      const std::uint64_t bit = std::uint64_t{1} << k;
      const std::uint64_t others = free & ~bit;
      const CompactMass mass(measure, others);
      const std::uint64_t total = std::uint64_t{1} << popcount(others);
      double influence = 0.0;
      double p0 = 0.0;
      double p1 = 0.0;
      std::uint64_t z = 0;
      for (std::uint64_t i = 0; i < total; ++i, z = next_submask(z, others)) {
        const double w = mass(i);
        const bool v0 = f(values | z) == b;
        const bool v1 = f(values | z | bit) == b;
        if (v0 || v1) influence += w;
        if (v0) p0 += w;
        if (v1) p1 += w;
      }
      if (influence > best_influence) {
        best_influence = influence;
        best_k = k;
        best_p0 = p0;
        best_p1 = p1;
      }
    }
    const bool one = best_p1 > best_p0;
    fixed |= std::uint64_t{1} << best_k;
    if (one) values |= std::uint64_t{1} << best_k;
    current = one ? best_p1 : best_p0;
    steps.push_back({{"coordinate", best_k + 1}, {"value", one ? 1 : 0}, {"influence", best_influence},
                     {"probability", current}});
  }

  SearchOutcome out;
  out.coalition = Coalition::from_mask(fixed);
  out.target = b;
  out.threshold = 1.0 - epsilon;
  out.certificate = coalition_influence(f, measure, out.coalition, b);
  out.status = out.certificate.value >= out.threshold - kCertifyTolerance ? SearchStatus::certified : SearchStatus::failed;
  out.trace = {{"procedure", "greedy-small-bias"},
               {"budget", budget},
               {"initial_probability", dist.values[static_cast<std::size_t>(b)]},
               {"steps", steps},
               {"assignment", bits_to_hex(values, n)},
               {"stop", current >= target ? "target-reached" : "budget-exhausted"}};
  return out;
}

}  // namespace coinflip
