#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "coinflip/functions.hpp"
#include "coinflip/measures.hpp"

namespace coinflip {

// A set of player indices (0-based), kept sorted.
class Coalition {
 public:
  Coalition() = default;
  explicit Coalition(std::vector<std::size_t> members);
  static Coalition from_mask(std::uint64_t mask);

  const std::vector<std::size_t>& members() const noexcept { return members_; }
  std::uint64_t mask() const noexcept { return mask_; }
  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }
  bool contains(std::size_t i) const noexcept { return i < 64 && ((mask_ >> i) & 1U); }
  // Throws DomainError if some member is not below n.
  void check_within(std::size_t n) const;

  // "1;4;7" (1-based); "" for the empty coalition.
  std::string to_string() const;
  static Coalition parse(const std::string& text);
  nlohmann::json to_json() const;

  friend bool operator==(const Coalition&, const Coalition&) = default;

 private:
  std::vector<std::size_t> members_;
  std::uint64_t mask_ = 0;
};

enum class Method { exact, monte_carlo };
std::string to_string(Method m);

struct InfluenceEstimate {
  double value = 0.0;
  Method method = Method::exact;
  std::size_t samples = 0;
  double radius = 0.0;

  double upper() const noexcept { return value + radius; }
  double lower() const noexcept { return value - radius; }
  nlohmann::json to_json() const;
  static InfluenceEstimate exact(double v) { return {v, Method::exact, 0, 0.0}; }
};

// Two-sided 95% Hoeffding half-width: sqrt(ln(2/0.05) / (2N)).
double hoeffding_radius(std::size_t samples);
InfluenceEstimate monte_carlo_estimate(std::size_t hits, std::size_t samples);

enum class Mode { exact, monte_carlo };

struct EvalOptions {
  Mode mode = Mode::exact;
  std::size_t mc_samples = 10000;
  std::uint64_t seed = 0;
};

// Exact enumeration limits.
inline constexpr std::size_t kMaxExactOutside = 24;
inline constexpr std::size_t kMaxBlockWidth = 26;
// Slack for summation error when comparing exact values against 1 - ε.
inline constexpr double kCertifyTolerance = 1e-12;
// Monte-Carlo runs are split into this many independent streams (stream i uses seed ^ i).
inline constexpr std::size_t kSampleStreams = 16;

// True iff some y agreeing with x outside S has f(y) = b.
bool block_contains(const RangedFunction& f, const BitVector& x, const Coalition& S, std::int32_t b);
bool block_contains_bits(const RangedFunction& f, std::uint64_t x, std::uint64_t coalition, std::int32_t b);

// Pr_{x~μ}[b ∈ f(B_S(x))].
InfluenceEstimate coalition_influence(const RangedFunction& f, const ProductMeasure& measure, const Coalition& S,
                                      std::int32_t b, const EvalOptions& options = {});

// As coalition_influence with x drawn from boost(μ, t).
InfluenceEstimate boosted_influence(const RangedFunction& f, const ProductMeasure& measure, const Coalition& S,
                                    std::int32_t b, std::size_t t, const EvalOptions& options = {});

// Exact influence toward every range value at once, under each of several measures:
// result[j][v] = Pr_{x~measures[j]}[v ∈ f(B_S(x))]. Range size at most 64.
std::vector<std::vector<double>> block_influence_profile(const RangedFunction& f,
                                                          std::span<const ProductMeasure> measures,
                                                          const Coalition& S);

// Pr_{x~μ}[f(x with x_k = 0) != f(x with x_k = 1)].
InfluenceEstimate variable_influence(const RangedFunction& f, const ProductMeasure& measure, std::size_t k,
                                     const EvalOptions& options = {});

struct ValueDistribution {
  std::vector<double> values;  // Pr[f = v]
  double dagger = 0.0;         // Pr[f = †]
};
// Exact law of f(x) for x ~ μ (n <= 26).
ValueDistribution value_distribution(const RangedFunction& f, const ProductMeasure& measure);

struct ResilienceVerdict {
  bool resilient = true;
  Coalition witness;
  std::int32_t b = 0;
  double value = 0.0;
  std::size_t coalitions_checked = 0;
  nlohmann::json to_json() const;
};

// Work bound for certify_resilience: sum over s <= ell of C(n,s) * 2^(n-s).
constexpr double resilience_work(std::size_t n, std::size_t ell) {
  double total = 0.0;
  double choose = 1.0;
  for (std::size_t s = 0; s <= ell && s <= n; ++s) {
    double cube = 1.0;
    for (std::size_t i = s; i < n; ++i) cube *= 2.0;
    total += choose * cube;
    choose = choose * static_cast<double>(n - s) / static_cast<double>(s + 1);
  }
  return total;
}
inline constexpr double kDefaultResilienceBudget = resilience_work(18, 4);

// Exhaustive search over |S| <= ell (largest sizes first, lexicographic within a
// size, b ascending) for a coalition with I_S^b >= 1 - ε.
ResilienceVerdict certify_resilience(const RangedFunction& f, const ProductMeasure& measure, double epsilon,
                                     std::size_t ell, double budget = kDefaultResilienceBudget);

}  // namespace coinflip
