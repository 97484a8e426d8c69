#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "coinflip/search.hpp"

namespace coinflip {
namespace {

using Table = std::vector<std::int32_t>;

std::uint64_t next_submask(std::uint64_t z, std::uint64_t mask) { return ((z | ~mask) + 1) & mask; }

std::vector<ProductMeasure> boosted_levels(const ProductMeasure& measure, std::size_t levels) {
  std::vector<ProductMeasure> out;
  for (std::size_t l = 1; l <= levels; ++l) out.push_back(measure.boost(l));
  return out;
}

struct Piece {
  bool ok = false;
  std::uint64_t coalition = 0;
  std::uint32_t code = 0;
};

class RangeSearch {
 public:
  RangeSearch(std::size_t n, const ProductMeasure& measure, const RangeOptions& options)
      : n_(n), measure_(measure), options_(options) {}

  nlohmann::json& trace() { return trace_; }

  // Finds S and an m-bit code b with I_S^{b,l}(table) >= 1 - ε for all l <= t.
  Piece search(const Table& table, std::size_t m, std::size_t t, double epsilon, std::uint64_t seed,
               std::size_t depth) {
    if (m == 1) return one_bit(table, t, epsilon, seed, depth);

    const double eps1 = (epsilon / 8.0) * (epsilon / 8.0);
    const double eps2 = epsilon - eps1;
    Table first(table.size());
    for (std::size_t x = 0; x < table.size(); ++x) {
      first[x] = table[x] == kDagger ? kDagger : (table[x] >> (m - 1));
    }
    trace_["levels"].push_back({{"depth", depth}, {"m", m}, {"t", t}, {"epsilon", epsilon},
                                {"epsilon_1", eps1}, {"epsilon_2", eps2}});
    const Piece head = search(first, 1, 2 * t, eps1, mix64(seed + 1), depth + 1);
    if (!head.ok) return {};

    // g(x) = low m-1 bits of f at the lexicographically smallest completion
    // in x's S1-block with first bit b1; † if there is none.
    const std::uint64_t s1 = head.coalition;
    const std::uint64_t outside = low_mask(n_) & ~s1;
    const auto width = static_cast<std::size_t>(popcount(s1));
    const BitScatter inside(s1);
    const std::uint64_t rest = low_mask(m - 1);
    Table g(table.size(), kDagger);
    std::uint64_t z = 0;
    do {
      std::int32_t value = kDagger;
      for (std::uint64_t c = 0; c < (std::uint64_t{1} << width); ++c) {
        const std::uint64_t y = z | inside.deposit(reverse_low_bits(c, width));
        if (first[y] == static_cast<std::int32_t>(head.code)) {
          value = static_cast<std::int32_t>(static_cast<std::uint64_t>(table[y]) & rest);
          break;
        }
      }
      std::uint64_t w = 0;
      do {
        g[z | w] = value;
        w = next_submask(w, s1);
      } while (w != 0);
      z = next_submask(z, outside);
    } while (z != 0);

    const auto levels = boosted_levels(measure_, t);
    auto masses = nlohmann::json::array();
    for (const auto& mu : levels) masses.push_back(dagger_mass(g, mu));
    trace_["levels"].push_back({{"depth", depth}, {"selector_coalition", Coalition::from_mask(s1).to_json()},
                                {"first_bit", head.code}, {"derived_dagger_mass", masses}});

    const Piece tail = search(g, m - 1, t, eps2, mix64(seed + 2), depth + 1);
    if (!tail.ok) return {};
    return {true, head.coalition | tail.coalition, (head.code << (m - 1)) | tail.code};
  }

  double dagger_mass(const Table& table, const ProductMeasure& mu) const {
    const CompactMass mass(mu, low_mask(n_));
    double total = 0.0;
    for (std::size_t x = 0; x < table.size(); ++x) {
      if (table[x] == kDagger) total += mass(x);
    }
    return total;
  }

 private:
  Piece one_bit(const Table& table, std::size_t t, double epsilon, std::uint64_t seed, std::size_t depth) {
    const std::size_t k = range_support_size(1, t, epsilon, options_.constant);
    const ProductMeasure boosted = measure_.boost(k);
    const auto levels = boosted_levels(measure_, t);
    const auto f = RangedFunction::from_table(n_, 2, table);
    const auto dist = value_distribution(f, measure_);
    const std::int32_t order[2] = {dist.values[1] > dist.values[0] ? 1 : 0, dist.values[1] > dist.values[0] ? 0 : 1};
    nlohmann::json record = {{"depth", depth}, {"m", 1}, {"t", t}, {"epsilon", epsilon}, {"k", k}};
    for (std::size_t i = 0; i < options_.base_trials; ++i) {
      Rng rng = make_rng(derive_seed(seed, i));
      const Coalition S = Coalition::from_mask(boosted.sample_bits(rng));
      const auto profile = block_influence_profile(f, levels, S);
      for (auto b : order) {
        bool all = true;
        for (const auto& level : profile) {
          if (level[static_cast<std::size_t>(b)] < 1.0 - epsilon - kCertifyTolerance) {
            all = false;
            break;
          }
        }
        if (all) {
          record["attempts"] = i + 1;
          record["coalition"] = S.to_json();
          record["b"] = b;
          trace_["levels"].push_back(record);
          return {true, S.mask(), static_cast<std::uint32_t>(b)};
        }
      }
    }
    record["attempts"] = options_.base_trials;
    record["failure"] = "no support certified every level";
    trace_["levels"].push_back(record);
    return {};
  }

  std::size_t n_;
  ProductMeasure measure_;
  RangeOptions options_;
  nlohmann::json trace_ = {{"levels", nlohmann::json::array()}};
};

}  // namespace

std::size_t range_support_size(std::size_t m, std::size_t t, double epsilon, double constant) {
  if (m == 0 || t == 0) throw DomainError("range_support_size: m and t must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("range_support_size: epsilon must lie in (0,1)");
  const double tm = static_cast<double>(t) * static_cast<double>(m);
  const double k = constant * tm * static_cast<double>(m * m) / (epsilon * epsilon) * std::log(tm / epsilon);
  if (!(k > 0.0)) throw OutOfRegime("k", "support size is not positive");
  return static_cast<std::size_t>(std::min(std::ceil(k), 1e15));
}

double dagger_threshold(double epsilon) { return std::pow(epsilon, 4) / 65536.0; }

std::vector<double> dagger_masses(const RangedFunction& f, const ProductMeasure& measure, std::size_t levels) {
  if (f.arity() != measure.size()) throw ArityMismatch("dagger_masses: function and measure arity differ");
  if (f.arity() > kMaxExactOutside) throw BudgetExceeded("dagger_masses: n above 24");
  std::vector<CompactMass> masses;
  for (std::size_t l = 1; l <= levels; ++l) masses.emplace_back(measure.boost(l), low_mask(f.arity()));
  std::vector<double> out(levels, 0.0);
  const std::uint64_t total = std::uint64_t{1} << f.arity();
  for (std::uint64_t x = 0; x < total; ++x) {
    if (f(x) != kDagger) continue;
    for (std::size_t l = 0; l < levels; ++l) out[l] += masses[l](x);
  }
  return out;
}

SearchOutcome large_range_coalition(const RangedFunction& f_in, const ProductMeasure& measure, std::size_t t,
                                    double epsilon, std::uint64_t seed, const RangeOptions& options) {
  if (f_in.arity() != measure.size()) throw ArityMismatch("large_range_coalition: function and measure arity differ");
  if (t == 0) throw DomainError("large_range_coalition: t must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("large_range_coalition: epsilon must lie in (0,1)");
  if (f_in.arity() > kMaxExactOutside) throw BudgetExceeded("large_range_coalition: n above 24");
  if (f_in.range_size() > 64) throw DomainError("large_range_coalition: range size above 64");
  const RangedFunction f = f_in.tabulated();
  const std::size_t n = f.arity();
  const std::size_t m = std::max<std::size_t>(1, f.code_length());

  const double limit = dagger_threshold(epsilon);
  const auto daggers = dagger_masses(f, measure, 2 * t);
  for (std::size_t l = 0; l < daggers.size(); ++l) {
    if (!(daggers[l] < limit)) {
      throw PreconditionViolated("large_range_coalition: dagger mass " + std::to_string(daggers[l]) + " at level " +
                                 std::to_string(l + 1) + " is not below epsilon^4/2^16 = " + std::to_string(limit));
    }
  }

  SearchOutcome out;
  out.threshold = 1.0 - epsilon;
  out.trace = {{"procedure", "large-range"}, {"m", m}, {"t", t}, {"epsilon", epsilon},
               {"constant", options.constant}, {"k", range_support_size(m, t, epsilon, options.constant)},
               {"dagger_masses", daggers}, {"dagger_threshold", limit}};
  const auto levels = boosted_levels(measure, t);
  auto attempts = nlohmann::json::array();
  for (std::size_t a = 0; a < options.retries; ++a) {
    RangeSearch search(n, measure, options);
    const Piece piece = search.search(f.table(), m, t, epsilon, derive_seed(seed, a), 0);
    nlohmann::json attempt = search.trace();
    if (!piece.ok) {
      attempt["result"] = "no candidate";
      attempts.push_back(attempt);
      continue;
    }
    const Coalition S = Coalition::from_mask(piece.coalition);
    const auto b = static_cast<std::int32_t>(piece.code);
    std::vector<InfluenceEstimate> certs;
    bool all = true;
    if (piece.code < f.range_size()) {
      const auto profile = block_influence_profile(f, levels, S);
      for (const auto& level : profile) {
        certs.push_back(InfluenceEstimate::exact(level[piece.code]));
        if (level[piece.code] < out.threshold - kCertifyTolerance) all = false;
      }
    } else {
      certs.assign(t, InfluenceEstimate::exact(0.0));
      all = false;
    }
    attempt["result"] = all ? "certified" : "certificate below threshold";
    attempts.push_back(attempt);
    out.coalition = S;
    out.target = b;
    out.level_certificates = certs;
    out.certificate = certs.front();
    if (all) {
      out.status = SearchStatus::certified;
      break;
    }
  }
  out.trace["attempts"] = attempts;
  return out;
}

}  // namespace coinflip
