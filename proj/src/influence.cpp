#include "coinflip/influence.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "coinflip/parallel.hpp"
#include "coinflip/rng.hpp"

namespace coinflip {

Coalition::Coalition(std::vector<std::size_t> members) : members_(std::move(members)) {
  std::sort(members_.begin(), members_.end());
  if (std::adjacent_find(members_.begin(), members_.end()) != members_.end()) {
    throw DomainError("coalition: duplicate member");
  }
  for (auto i : members_) {
    if (i >= kMaxArity) throw DomainError("coalition: member index above 64");
    mask_ |= std::uint64_t{1} << i;
  }
}

Coalition Coalition::from_mask(std::uint64_t mask) {
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < 64; ++i) {
    if ((mask >> i) & 1U) members.push_back(i);
  }
  return Coalition(std::move(members));
}

void Coalition::check_within(std::size_t n) const {
  if (!members_.empty() && members_.back() >= n) {
    throw DomainError("coalition member " + std::to_string(members_.back() + 1) + " exceeds n = " + std::to_string(n));
  }
}

std::string Coalition::to_string() const {
  std::string out;
  for (std::size_t j = 0; j < members_.size(); ++j) {
    if (j > 0) out += ';';
    out += std::to_string(members_[j] + 1);
  }
  return out;
}

Coalition Coalition::parse(const std::string& text) {
  std::vector<std::size_t> members;
  std::string token;
  std::istringstream in(text);
  const char separator = text.find(',') != std::string::npos ? ',' : ';';
  while (std::getline(in, token, separator)) {
    token.erase(0, token.find_first_not_of(" \t"));
    token.erase(token.find_last_not_of(" \t") + 1);
    if (token.empty()) continue;
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(token, &pos);
    } catch (const std::exception&) {
      throw DomainError("coalition: cannot parse member \"" + token + "\"");
    }
    if (pos != token.size() || v < 1) throw DomainError("coalition: members are 1-based positive integers");
    members.push_back(static_cast<std::size_t>(v - 1));
  }
  return Coalition(std::move(members));
}

nlohmann::json Coalition::to_json() const {
  auto out = nlohmann::json::array();
  for (auto i : members_) out.push_back(i + 1);
  return out;
}

std::string to_string(Method m) { return m == Method::exact ? "exact" : "monte-carlo"; }

nlohmann::json InfluenceEstimate::to_json() const {
  return {{"value", value}, {"method", coinflip::to_string(method)}, {"samples", samples}, {"radius", radius}};
}

double hoeffding_radius(std::size_t samples) {
  if (samples == 0) return 1.0;
  return std::sqrt(std::log(2.0 / 0.05) / (2.0 * static_cast<double>(samples)));
}

InfluenceEstimate monte_carlo_estimate(std::size_t hits, std::size_t samples) {
  const double v = samples == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(samples);
  return {v, Method::monte_carlo, samples, hoeffding_radius(samples)};
}

namespace {

using ValueSums = std::array<double, 64>;

std::uint64_t next_submask(std::uint64_t z, std::uint64_t mask) { return ((z | ~mask) + 1) & mask; }

void check_pair(const RangedFunction& f, const ProductMeasure& measure) {
  if (f.arity() != measure.size()) throw ArityMismatch("function and measure arity differ");
}

// Values of f seen on the block of `base` over `coalition`, as a bit set over 0..63,
// stopping once every value in `target` has been seen.
std::uint64_t block_values(const RangedFunction& f, std::uint64_t base, std::uint64_t coalition, std::uint64_t target) {
  std::uint64_t seen = 0;
  std::uint64_t w = 0;
  do {
    const auto v = f(base | w);
    if (v >= 0 && v < 64) {
      seen |= std::uint64_t{1} << v;
      if ((seen & target) == target) break;
    }
    w = next_submask(w, coalition);
  } while (w != 0);
  return seen;
}

// For every measure j and every value v in `target`: Pr_{measures[j]}[v ∈ f(B_S(x))].
std::vector<ValueSums> exact_scan(const RangedFunction& f, std::uint64_t coalition, std::uint64_t target,
                                  std::span<const ProductMeasure> measures) {
  const std::size_t n = f.arity();
  const std::uint64_t outside = low_mask(n) & ~coalition;
  const auto out_width = static_cast<std::size_t>(popcount(outside));
  if (out_width > kMaxExactOutside) throw BudgetExceeded("exact influence: more than 24 coordinates outside S");
  if (n - out_width > kMaxBlockWidth) throw BudgetExceeded("exact influence: coalition wider than 26");

  std::vector<CompactMass> masses;
  masses.reserve(measures.size());
  for (const auto& m : measures) masses.emplace_back(m, outside);

  const std::uint64_t total = std::uint64_t{1} << out_width;
  const std::size_t chunks = static_cast<std::size_t>(std::min<std::uint64_t>(total, 64));
  const BitScatter scatter(outside);
  std::vector<std::vector<ValueSums>> partial(chunks, std::vector<ValueSums>(measures.size(), ValueSums{}));

  parallel_for(chunks, [&](std::size_t c) {
    const std::uint64_t lo = total * c / chunks;
    const std::uint64_t hi = total * (c + 1) / chunks;
    std::uint64_t z = scatter.deposit(lo);
    auto& sums = partial[c];
    for (std::uint64_t i = lo; i < hi; ++i, z = next_submask(z, outside)) {
      std::uint64_t seen = block_values(f, z, coalition, target) & target;
      if (seen == 0) continue;
      for (std::size_t j = 0; j < masses.size(); ++j) {
        const double w = masses[j](i);
        for (std::uint64_t s = seen; s != 0; s &= s - 1) sums[j][static_cast<std::size_t>(std::countr_zero(s))] += w;
      }
    }
  });

  std::vector<ValueSums> out(measures.size(), ValueSums{});
  for (const auto& chunk : partial) {
    for (std::size_t j = 0; j < measures.size(); ++j) {
      for (std::size_t v = 0; v < 64; ++v) out[j][v] += chunk[j][v];
    }
  }
  for (auto& sums : out) {
    for (auto& v : sums) v = std::min(v, 1.0);
  }
  return out;
}

// Counts successes of `trial` over N samples split into fixed streams.
template <class Trial>
std::size_t count_hits(std::size_t samples, std::uint64_t seed, Trial&& trial) {
  std::vector<std::size_t> hits(kSampleStreams, 0);
  parallel_for(kSampleStreams, [&](std::size_t s) {
    Rng rng = make_rng(derive_seed(seed, s));
    const std::size_t count = samples / kSampleStreams + (s < samples % kSampleStreams ? 1 : 0);
    for (std::size_t i = 0; i < count; ++i) {
      if (trial(rng)) ++hits[s];
    }
  });
  std::size_t total = 0;
  for (auto h : hits) total += h;
  return total;
}

InfluenceEstimate influence_under(const RangedFunction& f, const ProductMeasure& sampling, const Coalition& S,
                                  std::int32_t b, const EvalOptions& options) {
  check_pair(f, sampling);
  S.check_within(f.arity());
  if (b < 0) throw DomainError("influence target must be a range value, not †");
  if (static_cast<std::uint32_t>(b) >= f.range_size()) return InfluenceEstimate::exact(0.0);
  if (options.mode == Mode::exact) {
    if (b >= 64) throw DomainError("exact influence supports range values below 64");
    const ProductMeasure one[] = {sampling};
    const auto sums = exact_scan(f, S.mask(), std::uint64_t{1} << b, one);
    return InfluenceEstimate::exact(sums[0][static_cast<std::size_t>(b)]);
  }
  if (S.size() > kMaxBlockWidth) throw BudgetExceeded("block scan: coalition wider than 26");
  const auto hits = count_hits(options.mc_samples, options.seed, [&](Rng& rng) {
    return block_contains_bits(f, sampling.sample_bits(rng), S.mask(), b);
  });
  return monte_carlo_estimate(hits, options.mc_samples);
}

}  // namespace

bool block_contains_bits(const RangedFunction& f, std::uint64_t x, std::uint64_t coalition, std::int32_t b) {
  if (popcount(coalition) > static_cast<int>(kMaxBlockWidth)) throw BudgetExceeded("block scan: coalition wider than 26");
  const std::uint64_t base = x & ~coalition;
  std::uint64_t w = 0;
  do {
    if (f(base | w) == b) return true;
    w = next_submask(w, coalition);
  } while (w != 0);
  return false;
}

bool block_contains(const RangedFunction& f, const BitVector& x, const Coalition& S, std::int32_t b) {
  if (x.size() != f.arity()) throw ArityMismatch("block_contains: point arity differs from function arity");
  S.check_within(f.arity());
  return block_contains_bits(f, x.bits(), S.mask(), b);
}

InfluenceEstimate coalition_influence(const RangedFunction& f, const ProductMeasure& measure, const Coalition& S,
                                      std::int32_t b, const EvalOptions& options) {
  return influence_under(f, measure, S, b, options);
}

InfluenceEstimate boosted_influence(const RangedFunction& f, const ProductMeasure& measure, const Coalition& S,
                                    std::int32_t b, std::size_t t, const EvalOptions& options) {
  return influence_under(f, measure.boost(t), S, b, options);
}

std::vector<std::vector<double>> block_influence_profile(const RangedFunction& f,
                                                          std::span<const ProductMeasure> measures,
                                                          const Coalition& S) {
  for (const auto& m : measures) check_pair(f, m);
  S.check_within(f.arity());
  if (f.range_size() > 64) throw DomainError("block_influence_profile: range size above 64");
  const auto sums = exact_scan(f, S.mask(), low_mask(f.range_size()), measures);
  std::vector<std::vector<double>> out;
  out.reserve(sums.size());
  for (const auto& s : sums) out.emplace_back(s.begin(), s.begin() + f.range_size());
  return out;
}

InfluenceEstimate variable_influence(const RangedFunction& f, const ProductMeasure& measure, std::size_t k,
                                     const EvalOptions& options) {
  check_pair(f, measure);
  if (k >= f.arity()) throw DomainError("variable_influence: coordinate out of range");
  const std::uint64_t bit = std::uint64_t{1} << k;
  if (options.mode == Mode::exact) {
    const std::uint64_t outside = low_mask(f.arity()) & ~bit;
    if (popcount(outside) > static_cast<int>(kMaxExactOutside)) throw BudgetExceeded("variable_influence: n above 25");
    const CompactMass mass(measure, outside);
    const std::uint64_t total = std::uint64_t{1} << popcount(outside);
    double acc = 0.0;
    std::uint64_t z = 0;
    for (std::uint64_t i = 0; i < total; ++i, z = next_submask(z, outside)) {
      if (f(z) != f(z | bit)) acc += mass(i);
    }
    return InfluenceEstimate::exact(std::min(acc, 1.0));
  }
  const auto hits = count_hits(options.mc_samples, options.seed, [&](Rng& rng) {
    const auto x = measure.sample_bits(rng);
    return f(x & ~bit) != f(x | bit);
  });
  return monte_carlo_estimate(hits, options.mc_samples);
}

ValueDistribution value_distribution(const RangedFunction& f, const ProductMeasure& measure) {
  check_pair(f, measure);
  if (f.arity() > kMaxTableArity) throw BudgetExceeded("value_distribution: n above 26");
  const CompactMass mass(measure, low_mask(f.arity()));
  ValueDistribution out;
  out.values.assign(f.range_size(), 0.0);
  const std::uint64_t total = std::uint64_t{1} << f.arity();
  for (std::uint64_t x = 0; x < total; ++x) {
    const auto v = f(x);
    if (v == kDagger) {
      out.dagger += mass(x);
    } else {
      out.values[static_cast<std::size_t>(v)] += mass(x);
    }
  }
  return out;
}

nlohmann::json ResilienceVerdict::to_json() const {
  nlohmann::json j = {{"resilient", resilient}, {"coalitions_checked", coalitions_checked}};
  if (!resilient) {
    j["witness"] = witness.to_json();
    j["b"] = b;
    j["value"] = value;
  }
  return j;
}

ResilienceVerdict certify_resilience(const RangedFunction& f, const ProductMeasure& measure, double epsilon,
                                     std::size_t ell, double budget) {
  check_pair(f, measure);
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("certify_resilience: epsilon must lie in (0,1)");
  const std::size_t n = f.arity();
  ell = std::min(ell, n);
  if (resilience_work(n, ell) > budget) throw BudgetExceeded("certify_resilience: enumeration exceeds the work budget");
  const RangedFunction g = n <= 22 ? f.tabulated() : f;
  const ProductMeasure one[] = {measure};

  ResilienceVerdict verdict;
  for (std::size_t s = ell + 1; s-- > 0;) {
    std::vector<std::size_t> combo(s);
    for (std::size_t i = 0; i < s; ++i) combo[i] = i;
    while (true) {
      const Coalition S(combo);
      ++verdict.coalitions_checked;
      const auto profile = block_influence_profile(g, one, S)[0];
      for (std::size_t b = 0; b < profile.size(); ++b) {
        if (profile[b] >= 1.0 - epsilon - kCertifyTolerance) {
          verdict.resilient = false;
          verdict.witness = S;
          verdict.b = static_cast<std::int32_t>(b);
          verdict.value = profile[b];
          return verdict;
        }
      }
      std::size_t i = s;
      while (i > 0 && combo[i - 1] == n - s + i - 1) --i;
      if (i == 0) break;
      ++combo[i - 1];
      for (std::size_t j = i; j < s; ++j) combo[j] = combo[j - 1] + 1;
    }
  }
  return verdict;
}

}  // namespace coinflip
