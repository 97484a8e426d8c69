#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "coinflip/adversary.hpp"
#include "coinflip/functions.hpp"
#include "coinflip/influence.hpp"
#include "coinflip/measures.hpp"

namespace coinflip {

enum class SearchStatus { certified, failed };

// A coalition with its target value and an independently recomputed certificate.
struct SearchOutcome {
  SearchStatus status = SearchStatus::failed;
  Coalition coalition;
  std::int32_t target = 0;
  InfluenceEstimate certificate;
  double threshold = 1.0;
  // Boosted certificates for levels 1..t (range searches only).
  std::vector<InfluenceEstimate> level_certificates;
  nlohmann::json trace = nlohmann::json::object();

  bool certified() const noexcept { return status == SearchStatus::certified; }
  nlohmann::json to_json() const;
};

// How certificates are computed when exact enumeration is out of budget.
struct CertifyOptions {
  bool allow_mc = false;
  std::size_t mc_samples = 10000;
};

// Exact I_S^b when n - |S| <= 24; otherwise Monte-Carlo if allowed, else BudgetExceeded.
InfluenceEstimate certify_influence(const RangedFunction& f, const ProductMeasure& measure, const Coalition& S,
                                    std::int32_t b, const CertifyOptions& options, std::uint64_t seed);

// Support of one draw from boost(μ, k).
Coalition sample_support(const ProductMeasure& measure, std::size_t k, Rng& rng);

// k = ceil(10 ln(1/ε) / ε).
std::size_t boosted_support_size(double epsilon);

struct BoostedOptions {
  std::optional<std::size_t> k;
  CertifyOptions certify;
};

// Draws supports S ~ boost(μ, k) and returns the first (S, b) with I_S^b >= 1 - ε.
// Values b are tried in decreasing order of Pr[f = b].
SearchOutcome boosted_coalition(const RangedFunction& f, const ProductMeasure& measure, double epsilon,
                                std::size_t trials, std::uint64_t seed, const BoostedOptions& options = {});

struct SupportSurvey {
  std::size_t k = 0;
  std::size_t supports = 0;
  std::vector<std::size_t> successes;  // per value b
  std::int32_t best = 0;
  double fraction = 0.0;  // successes[best] / supports
  nlohmann::json to_json() const;
};

// Fraction of supports S ~ boost(μ, k) with exact I_S^b >= 1 - ε, for every b.
SupportSurvey survey_supports(const RangedFunction& f, const ProductMeasure& measure, double epsilon,
                              std::size_t supports, std::uint64_t seed, std::optional<std::size_t> k = std::nullopt);

struct ConditionReport {
  bool condition_one = false;
  bool condition_two = false;
  double fraction_one = 0.0;  // Pr_x[inner >= 1 - ε] with inner radius removed
  double fraction_two = 0.0;  // Pr_x[inner >= ε] with inner radius removed
  double outer_radius = 0.0;
  double inner_radius = 0.0;
  enum class Verdict { condition_one, condition_two, neither } verdict = Verdict::neither;
  nlohmann::json to_json() const;
};

// Nested Monte-Carlo test of the two alternatives for value b:
// I: Pr_x[Pr_y[f(x|y) = b] >= 1 - ε] > ε/2;  II: Pr_x[Pr_y[f(x|y) = b] >= ε] >= 1 - ε/2.
ConditionReport classify_conditions(const RangedFunction& f, const ProductMeasure& measure, double epsilon,
                                    std::int32_t b, std::size_t outer_samples, std::size_t inner_samples,
                                    std::uint64_t seed);

struct BiasSplit {
  double c = 0.0;
  std::size_t t = 0;
};

// p = c^t with c in (1/4, 3/4) and t minimal with (1/4)^t < p < (3/4)^t.
BiasSplit decompose_bias(double p, double alpha);
std::size_t decompose_bias_limit(double alpha);

// Smallest size m allowed for a uniform random coalition: ceil(n log2(1/α) / (2γ log2 n)).
std::size_t small_bias_subset_size(std::size_t n, double alpha, double gamma);

// Samples uniform size-m subsets and returns the first with I_S^1[h] >= 1 - γ.
SearchOutcome random_small_bias(const RangedFunction& h, const ProductMeasure& measure, double alpha, double gamma,
                                std::size_t m, std::size_t trials, std::uint64_t seed);

// Fixes the most influential remaining coordinate to its better value until
// Pr[f = b] >= 1 - ε or `budget` coordinates are fixed.
SearchOutcome greedy_small_bias(const RangedFunction& f, const ProductMeasure& measure, double epsilon,
                                std::int32_t b, std::size_t budget);

struct SingleRoundOptions {
  std::size_t restrictions = 200;   // sampled y values for the election
  std::size_t support_trials = 64;  // supports per y in the biased-part search
  std::size_t subset_trials = 200;  // random_small_bias draws
  std::size_t candidates = 5;       // elected pairs tried before giving up
  double range_constant = 1.0;      // constant in the range-search support size
};

// Combined single-round search: biased coordinates handled by a support search on
// each restriction, small-bias coordinates by a search on the indicator h.
SearchOutcome find_single_round(const RangedFunction& f, const ProductMeasure& measure, double epsilon,
                                std::uint64_t seed, const SingleRoundOptions& options = {});

struct RangeOptions {
  double constant = 1.0;        // C in k(m,t,ε) = ceil(C t m^3 ε^-2 ln(tm/ε))
  std::size_t base_trials = 32; // supports drawn in each one-bit search
  std::size_t retries = 8;      // full restarts before reporting failure
};

std::size_t range_support_size(std::size_t m, std::size_t t, double epsilon, double constant = 1.0);
// ε^4 / 2^16.
double dagger_threshold(double epsilon);

// Exact †-mass under boost(μ, ℓ) for ℓ = 1..levels.
std::vector<double> dagger_masses(const RangedFunction& f, const ProductMeasure& measure, std::size_t levels);

// Bit-by-bit search for (S, b) with I_S^{b,ℓ}(f) >= 1 - ε for every ℓ <= t.
// Throws PreconditionViolated if the †-mass bound fails at some ℓ <= 2t.
SearchOutcome large_range_coalition(const RangedFunction& f, const ProductMeasure& measure, std::size_t t,
                                    double epsilon, std::uint64_t seed, const RangeOptions& options = {});

struct MultiRoundOptions {
  double delta_constant = 1.0;
  double range_constant = 1.0;
  std::size_t pool_size = 40;
  std::size_t rollout_samples = 10000;
  std::size_t retries = 4;
  SingleRoundOptions single;
};

struct RoundSchedule {
  std::size_t rounds = 0;  // after splitting
  std::vector<double> delta;  // delta[0..rounds]
  std::vector<double> eta;    // eta[1..rounds], eta[0] unused
  std::vector<std::size_t> k;        // k[1..rounds], support scale of the biased-round pools
  std::vector<std::size_t> m;        // m[1..rounds], size cap 2*k*eta*n on pool sets
  std::vector<std::size_t> clamped;  // levels whose iterated log was clamped to 2
  std::vector<std::size_t> capped;   // levels whose delta exceeded 1 and was capped
  nlohmann::json to_json() const;
};

// Schedule for `rounds` rounds at (n, ε); throws OutOfRegime on a non-positive parameter.
RoundSchedule round_schedule(std::size_t rounds, std::size_t n, double epsilon, double delta_constant);

// log2 applied `times` times; values below 1 stop the iteration.
double iterated_log2(double n, std::size_t times);

SearchOutcome multi_round_coalition(const MultiRoundProtocol& protocol, double epsilon, std::uint64_t seed,
                                    const MultiRoundOptions& options = {});

}  // namespace coinflip
