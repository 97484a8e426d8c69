#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "coinflip/parallel.hpp"
#include "coinflip/search.hpp"

namespace coinflip {
namespace {

std::uint64_t next_submask(std::uint64_t z, std::uint64_t mask) { return ((z | ~mask) + 1) & mask; }

std::vector<std::size_t> members_of(std::uint64_t mask) { return Coalition::from_mask(mask).members(); }

// I_S^b of f with the coordinates in `fixed` set to `values`; S lies outside `fixed`.
double restricted_influence(const RangedFunction& f, const CompactMass& outside_mass, std::uint64_t outside,
                            std::uint64_t values, std::uint64_t coalition, std::int32_t b) {
  double total = 0.0;
  std::uint64_t z = 0;
  const std::uint64_t count = std::uint64_t{1} << popcount(outside);
  for (std::uint64_t i = 0; i < count; ++i, z = next_submask(z, outside)) {
    std::uint64_t w = 0;
    do {
      if (f(values | z | w) == b) {
        total += outside_mass(i);
        break;
      }
      w = next_submask(w, coalition);
    } while (w != 0);
  }
  return total;
}

struct Candidate {
  std::uint64_t coalition = 0;
  std::int32_t b = 0;
  double found = 0.0;
  double popularity = 0.0;
};

}  // namespace

SearchOutcome find_single_round(const RangedFunction& f_in, const ProductMeasure& measure, double epsilon,
                                std::uint64_t seed, const SingleRoundOptions& options) {
  if (f_in.arity() != measure.size()) throw ArityMismatch("find_single_round: function and measure arity differ");
  if (!(epsilon > 0.0 && epsilon <= 0.5)) throw DomainError("find_single_round: epsilon must lie in (0, 1/2]");
  const std::size_t n = f_in.arity();
  if (n < 4) throw PreconditionViolated("find_single_round: n must be at least 4");
  if (n > kMaxExactOutside) throw BudgetExceeded("find_single_round: n above 24");
  for (std::size_t i = 0; i < n; ++i) {
    if (measure.bias(i) > 0.5) {
      throw PreconditionViolated("find_single_round: bias of coordinate " + std::to_string(i + 1) +
                                 " above 1/2; negate it first");
    }
  }
  const RangedFunction f = f_in.tabulated();
  const double alpha = 1.0 / std::log2(static_cast<double>(n));
  std::uint64_t small = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (measure.bias(i) > alpha) small |= std::uint64_t{1} << i;
  }
  const std::uint64_t biased = low_mask(n) & ~small;
  const double half = epsilon / 2.0;
  nlohmann::json trace = {{"procedure", "single-round"}, {"alpha_0", alpha}, {"epsilon", epsilon},
                          {"small_bias_coordinates", Coalition::from_mask(small).to_json()}};

  if (small == 0) {
    SearchOutcome out = f.range_size() == 2
                            ? boosted_coalition(f, measure, epsilon, options.support_trials, seed)
                            : large_range_coalition(f, measure, 1, epsilon, seed, {options.range_constant});
    trace["biased_part"] = out.trace;
    out.trace = trace;
    return out;
  }

  const auto small_members = members_of(small);
  const auto biased_members = members_of(biased);
  const ProductMeasure small_measure = measure.restrict(small_members);
  const ProductMeasure biased_measure = measure.restrict(biased_members);
  const BitScatter small_scatter(small);
  const BitScatter biased_scatter(biased);
  const std::size_t a = small_members.size();

  // Restrictions y of the small-bias part with their weights.
  std::vector<std::uint64_t> ys;
  std::vector<double> weights;
  if (a < 63 && (std::uint64_t{1} << a) <= options.restrictions) {
    const CompactMass mass(small_measure, low_mask(a));
    for (std::uint64_t y = 0; y < (std::uint64_t{1} << a); ++y) {
      ys.push_back(y);
      weights.push_back(mass(y));
    }
  } else {
    Rng rng = make_rng(mix64(seed ^ 0x79));
    for (std::size_t i = 0; i < options.restrictions; ++i) {
      ys.push_back(small_measure.sample_bits(rng));
      weights.push_back(1.0 / static_cast<double>(options.restrictions));
    }
  }
  trace["restrictions"] = ys.size();

  // Biased-part search on each restriction.
  std::vector<std::uint64_t> found_sets(ys.size(), 0);
  std::vector<std::int32_t> found_values(ys.size(), kDagger);
  const std::uint64_t search_seed = mix64(seed + 1);
  parallel_for(ys.size(), [&](std::size_t i) {
    const std::uint64_t fixed = small_scatter.deposit(ys[i]);
    const RangedFunction fy = restrict_coordinates(f, small, fixed);
    if (fy.arity() == 0) {
      found_values[i] = fy(0);
      return;
    }
    SearchOutcome sub;
    if (f.range_size() == 2) {
      sub = boosted_coalition(fy, biased_measure, half, options.support_trials, derive_seed(search_seed, i));
    } else {
      try {
        sub = large_range_coalition(fy, biased_measure, 1, half, derive_seed(search_seed, i),
                                    {options.range_constant});
      } catch (const PreconditionViolated&) {
        return;
      }
    }
    if (!sub.certified()) return;
    found_sets[i] = biased_scatter.deposit(sub.coalition.mask());
    found_values[i] = sub.target;
  });

  std::map<std::pair<std::uint64_t, std::int32_t>, double> tally;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    if (found_values[i] != kDagger) tally[{found_sets[i], found_values[i]}] += weights[i];
  }
  std::vector<Candidate> candidates;
  for (const auto& [key, w] : tally) candidates.push_back({key.first, key.second, w, 0.0});
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& x, const Candidate& y) { return x.found > y.found; });
  if (candidates.size() > 4 * options.candidates) candidates.resize(4 * options.candidates);

  // Popularity: weighted fraction of restrictions on which the pair certifies at 1 - ε/2.
  std::vector<double> popularity(candidates.size(), 0.0);
  parallel_for(candidates.size(), [&](std::size_t c) {
    const std::uint64_t outside = biased & ~candidates[c].coalition;
    const CompactMass mass(measure, outside);
    double p = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
      const double v = restricted_influence(f, mass, outside, small_scatter.deposit(ys[i]), candidates[c].coalition,
                                            candidates[c].b);
      if (v >= 1.0 - half - kCertifyTolerance) p += weights[i];
    }
    popularity[c] = p;
  });
  for (std::size_t c = 0; c < candidates.size(); ++c) candidates[c].popularity = popularity[c];
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    if (x.popularity != y.popularity) return x.popularity > y.popularity;
    const int sx = popcount(x.coalition);
    const int sy = popcount(y.coalition);
    if (sx != sy) return sx < sy;
    if (x.coalition != y.coalition) {
      return Coalition::from_mask(x.coalition).members() < Coalition::from_mask(y.coalition).members();
    }
    return x.b < y.b;
  });

  auto election = nlohmann::json::array();
  for (const auto& c : candidates) {
    election.push_back({{"coalition", Coalition::from_mask(c.coalition).to_json()}, {"b", c.b},
                        {"found_weight", c.found}, {"popularity", c.popularity}});
  }
  trace["election"] = election;

  SearchOutcome out;
  out.threshold = 1.0 - epsilon;
  auto tried = nlohmann::json::array();
  const std::size_t m = std::max<std::size_t>(1, f.code_length());
  const double gamma = std::min(half, 1.0 / std::pow(2.0, static_cast<double>(m + 1)));
  trace["gamma"] = gamma;
  bool have_best = false;
  for (std::size_t c = 0; c < candidates.size() && c < options.candidates; ++c) {
    const auto& cand = candidates[c];
    const std::uint64_t outside = biased & ~cand.coalition;
    const CompactMass mass(measure, outside);
    std::vector<std::int32_t> h_table(std::size_t{1} << a);
    for (std::uint64_t y = 0; y < h_table.size(); ++y) {
      const double v = restricted_influence(f, mass, outside, small_scatter.deposit(y), cand.coalition, cand.b);
      h_table[y] = v >= 1.0 - half - kCertifyTolerance ? 1 : 0;
    }
    const RangedFunction h = RangedFunction::from_table(a, 2, std::move(h_table));
    const double mean = value_distribution(h, small_measure).values[1];
    nlohmann::json step = {{"coalition", Coalition::from_mask(cand.coalition).to_json()}, {"b", cand.b},
                           {"indicator_mean", mean}};

    std::uint64_t small_set = 0;
    bool have_set = false;
    if (mean >= 1.0 - half - kCertifyTolerance) {
      have_set = true;
      step["small_bias_step"] = "none";
    } else {
      const std::size_t m_t = a >= 2 ? small_bias_subset_size(a, alpha, gamma) : a + 1;
      step["m_T"] = m_t;
      if (a >= 2 && m_t <= a && mean >= gamma) {
        const auto sub = random_small_bias(h, small_measure, alpha, gamma, m_t, options.subset_trials,
                                           derive_seed(mix64(seed + 2), c));
        step["random"] = sub.trace;
        if (sub.certified()) {
          small_set = sub.coalition.mask();
          have_set = true;
        }
      }
      if (!have_set && mean >= half) {
        const auto sub = greedy_small_bias(h, small_measure, half, 1, a);
        step["greedy"] = sub.trace;
        small_set = sub.coalition.mask();
        have_set = true;
      }
    }
    if (!have_set) {
      step["result"] = "indicator mean below epsilon/2";
      tried.push_back(step);
      continue;
    }
    const Coalition S = Coalition::from_mask(cand.coalition | small_scatter.deposit(small_set));
    const auto cert = certify_influence(f, measure, S, cand.b, {}, 0);
    step["certificate"] = cert.value;
    const bool ok = cert.value >= out.threshold - kCertifyTolerance;
    step["result"] = ok ? "certified" : "certificate below threshold";
    tried.push_back(step);
    if (!have_best || cert.value > out.certificate.value) {
      have_best = true;
      out.coalition = S;
      out.target = cand.b;
      out.certificate = cert;
    }
    if (ok) {
      out.status = SearchStatus::certified;
      out.coalition = S;
      out.target = cand.b;
      out.certificate = cert;
      break;
    }
  }
  trace["candidates_tried"] = tried;
  if (!out.certified()) trace["failure"] = candidates.empty() ? "no restriction produced a candidate" :
                                                                "no elected candidate certified";
  out.trace = trace;
  return out;
}

}  // namespace coinflip
