#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "coinflip/parallel.hpp"
#include "coinflip/search.hpp"

namespace coinflip {
namespace {

std::uint64_t next_submask(std::uint64_t z, std::uint64_t mask) { return ((z | ~mask) + 1) & mask; }

enum class RoundKind { biased, small };

const char* kind_name(RoundKind k) { return k == RoundKind::biased ? "biased" : "small-bias"; }

// One round of the split protocol: which original round it reads and which players are live.
struct SplitRound {
  std::size_t source = 0;
  std::uint64_t active = 0;
  RoundKind kind = RoundKind::biased;
};

struct SplitPlan {
  std::vector<SplitRound> rounds;
  RoundSchedule schedule;
};

// Rounds whose live players straddle the threshold are split into a small-bias
// round followed by a biased round; dead players have bias 0 and are ignored.
SplitPlan plan_rounds(const MultiRoundProtocol& protocol, double epsilon, double delta_constant) {
  const std::size_t n = protocol.players();
  std::size_t total = protocol.rounds();
  SplitPlan plan;
  for (std::size_t iteration = 0; iteration <= protocol.rounds(); ++iteration) {
    plan.schedule = round_schedule(total, n, epsilon, delta_constant);
    plan.rounds.clear();
    for (std::size_t j = 0; j < protocol.rounds(); ++j) {
      const auto& mu = protocol.round_measure(j);
      const std::size_t q = plan.rounds.size();
      const std::size_t level = total > q ? total - q : 1;
      const double first = plan.schedule.eta[std::min(level, total)];
      bool all_low = true;
      for (std::size_t i = 0; i < n; ++i) all_low = all_low && mu.bias(i) <= first;
      if (all_low || level <= 1) {
        plan.rounds.push_back({j, low_mask(n), RoundKind::biased});
        continue;
      }
      const double second = plan.schedule.eta[level - 1];
      std::uint64_t high = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (mu.bias(i) > second) high |= std::uint64_t{1} << i;
      }
      const std::uint64_t low = low_mask(n) & ~high;
      if (high != 0) plan.rounds.push_back({j, high, RoundKind::small});
      if (low != 0) plan.rounds.push_back({j, low, RoundKind::biased});
    }
    if (plan.rounds.size() == total) break;
    total = plan.rounds.size();
  }
  return plan;
}

MultiRoundProtocol split_protocol(const MultiRoundProtocol& protocol, const std::vector<SplitRound>& rounds) {
  const std::size_t n = protocol.players();
  if (rounds.size() == protocol.rounds()) {
    bool trivial = true;
    for (const auto& r : rounds) trivial = trivial && r.active == low_mask(n);
    if (trivial) return protocol;
  }
  if (rounds.size() * n > 64) throw BudgetExceeded("multi_round_coalition: split protocol exceeds 64 inputs");
  const RangedFunction f = protocol.outcome();
  const auto plan = rounds;
  auto outcome = RangedFunction::from_lambda(
      rounds.size() * n, 2,
      [f, plan, n](std::uint64_t x) {
        std::uint64_t y = 0;
        for (std::size_t q = 0; q < plan.size(); ++q) {
          y |= (((x >> (q * n)) & plan[q].active)) << (plan[q].source * n);
        }
        return f(y);
      },
      "split protocol");
  if (outcome.arity() <= 24) outcome = outcome.tabulated();
  std::vector<ProductMeasure> measures;
  for (const auto& r : rounds) {
    std::vector<double> biases(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if ((r.active >> i) & 1U) biases[i] = protocol.round_measure(r.source).bias(i);
    }
    measures.emplace_back(std::move(biases));
  }
  return MultiRoundProtocol(rounds.size(), n, std::move(outcome), std::move(measures));
}

bool coalition_less(const Coalition& a, const Coalition& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a.members() < b.members();
}

std::vector<Coalition> sorted_unique(std::vector<Coalition> sets) {
  std::sort(sets.begin(), sets.end(), coalition_less);
  sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
  return sets;
}

// Pools: uniform subsets of every size over the live players, plus on biased
// rounds the supports of boost(μ, t) for t = 1, 2, 4, ... under the size cap.
std::vector<Coalition> round_pool(const SplitRound& round, const ProductMeasure& measure, std::size_t k,
                                  std::size_t cap, std::size_t pool_size, std::uint64_t seed, nlohmann::json& trace) {
  std::vector<Coalition> out;
  std::size_t rejected = 0;
  const auto live = Coalition::from_mask(round.active).members();
  if (round.kind == RoundKind::biased) {
    std::vector<std::size_t> rungs;
    for (std::size_t t = 1; t <= k; t *= 2) rungs.push_back(t);
    for (std::size_t i = 0; i < pool_size; ++i) {
      Rng rng = make_rng(derive_seed(seed, i));
      const std::size_t t = rungs[i % rungs.size()];
      const Coalition S = Coalition::from_mask(measure.boost(t).sample_bits(rng));
      if (S.size() > cap) {
        ++rejected;
        continue;
      }
      out.push_back(S);
    }
    trace["rungs"] = rungs;
  }
  for (std::size_t i = 0; i < pool_size && !live.empty(); ++i) {
    Rng rng = make_rng(derive_seed(seed, pool_size + i));
    const std::size_t size = 1 + i % live.size();
    if (round.kind == RoundKind::biased && size > cap) continue;
    std::vector<std::size_t> members;
    for (auto idx : sample_subset(rng, live.size(), size)) members.push_back(live[idx]);
    out.emplace_back(members);
  }
  trace["kind"] = kind_name(round.kind);
  trace["cap"] = cap;
  trace["rejected"] = rejected;
  return out;
}

// Steers round 1 into h's target preimage over B, then plays optimally on g_x.
InfluenceEstimate rollout(const MultiRoundProtocol& split, const Coalition& B, const std::vector<std::int32_t>& h,
                          std::int32_t h_target, std::int32_t b, std::size_t samples, std::uint64_t seed) {
  const std::size_t n = split.players();
  const std::uint64_t good_mask = low_mask(n) & ~B.mask();
  const BitScatter good(good_mask);
  const BitScatter bad(B.mask());
  const std::size_t width = B.size();
  auto steer = [&](std::uint64_t a) {
    const std::uint64_t base = good.deposit(a);
    for (std::uint64_t c = 0; c < (std::uint64_t{1} << width); ++c) {
      const std::uint64_t beta = reverse_low_bits(c, width);
      if (h[base | bad.deposit(beta)] == h_target) return beta;
    }
    return std::uint64_t{0};
  };
  std::map<std::uint64_t, Strategy> cache;
  Policy policy = [&](std::size_t round, std::span<const std::uint64_t> history) -> std::uint64_t {
    const std::uint64_t beta0 = steer(history[0]);
    if (round == 0) return beta0;
    const std::uint64_t x = good.deposit(history[0]) | bad.deposit(beta0);
    auto it = cache.find(x);
    if (it == cache.end()) {
      it = cache.emplace(x, extract_optimal_strategy(split.restrict_first_round(BitVector(n, x)), B, b)).first;
    }
    return it->second.respond(round - 1, history.subspan(1, round));
  };
  return strategy_influence(split, B, policy, b, {Mode::monte_carlo, samples, seed});
}

}  // namespace

double iterated_log2(double n, std::size_t times) {
  double v = n;
  for (std::size_t i = 0; i < times && v >= 1.0; ++i) v = std::log2(v);
  return v;
}

nlohmann::json RoundSchedule::to_json() const {
  return {{"rounds", rounds}, {"delta", delta}, {"eta", eta}, {"k", k}, {"m", m}, {"clamped", clamped},
          {"capped", capped}, {"out_of_regime", !clamped.empty() || !capped.empty()}};
}

RoundSchedule round_schedule(std::size_t rounds, std::size_t n, double epsilon, double delta_constant) {
  if (rounds == 0) throw DomainError("round_schedule: rounds must be positive");
  if (n < 2) throw DomainError("round_schedule: n must be at least 2");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("round_schedule: epsilon must lie in (0,1)");
  RoundSchedule s;
  s.rounds = rounds;
  s.delta.assign(rounds + 1, 1.0);
  s.eta.assign(rounds + 1, 0.0);
  s.k.assign(rounds + 1, 0);
  s.m.assign(rounds + 1, 0);
  const double log_eps = std::log(1.0 / epsilon);
  const double nd = static_cast<double>(n);
  for (std::size_t l = 1; l <= rounds; ++l) {
    const double iterated = iterated_log2(nd, 4 * rounds - 4 * l);
    if (iterated < 2.0) s.clamped.push_back(l);
    const double d = delta_constant / (std::pow(log_eps, static_cast<double>(l)) * std::max(2.0, iterated));
    if (!std::isfinite(d) || d <= 0.0) {
      throw OutOfRegime("delta_" + std::to_string(l), "value " + std::to_string(d) + " is not a positive number");
    }
    if (d > 1.0) s.capped.push_back(l);
    s.delta[l] = std::min(d, 1.0);
  }
  const double top = std::max(2.0, iterated_log2(nd, 4 * rounds));
  for (std::size_t l = 1; l <= rounds; ++l) {
    s.eta[l] = s.delta[l - 1];
    const double k = delta_constant * std::pow(4.0, static_cast<double>(rounds - l)) * nd /
                     (top * epsilon * epsilon * epsilon);
    if (!std::isfinite(k) || k <= 0.0) throw OutOfRegime("k_" + std::to_string(l), "value is not a positive number");
    s.k[l] = static_cast<std::size_t>(std::ceil(k));
    s.m[l] = static_cast<std::size_t>(std::ceil(2.0 * k * s.eta[l] * nd));
  }
  return s;
}

SearchOutcome multi_round_coalition(const MultiRoundProtocol& protocol_in, double epsilon, std::uint64_t seed,
                                    const MultiRoundOptions& options) {
  if (!(epsilon > 0.0 && epsilon <= 0.5)) throw DomainError("multi_round_coalition: epsilon must lie in (0, 1/2]");
  const std::size_t r = protocol_in.rounds();
  const std::size_t n = protocol_in.players();
  if (r > 3) throw BudgetExceeded("multi_round_coalition: at most 3 rounds");
  if (r * n > 64) throw BudgetExceeded("multi_round_coalition: r*n above 64");

  // Flip every coordinate with bias above 1/2; coalitions and outcomes are unchanged.
  std::uint64_t flip = 0;
  std::vector<ProductMeasure> measures;
  for (std::size_t j = 0; j < r; ++j) {
    std::uint64_t round_flip = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (protocol_in.round_measure(j).bias(i) > 0.5) round_flip |= std::uint64_t{1} << i;
    }
    flip |= round_flip << (j * n);
    measures.push_back(protocol_in.round_measure(j).flip(round_flip));
  }
  RangedFunction outcome = flip == 0 ? protocol_in.outcome() : negate_coordinates(protocol_in.outcome(), flip);
  if (outcome.arity() <= 24) outcome = outcome.tabulated();
  const MultiRoundProtocol F(r, n, outcome, measures);

  if (r == 1) {
    SearchOutcome out = find_single_round(F.outcome(), F.round_measure(0), epsilon, seed, options.single);
    out.trace = {{"procedure", "multi-round"}, {"rounds", 1}, {"flipped", bits_to_hex(flip, n)},
                 {"single_round", out.trace}};
    return out;
  }

  const SplitPlan plan = plan_rounds(F, epsilon, options.delta_constant);
  const RoundSchedule& schedule = plan.schedule;
  const std::size_t rr = plan.rounds.size();
  const MultiRoundProtocol P = split_protocol(F, plan.rounds);
  nlohmann::json trace = {{"procedure", "multi-round"},
                          {"rounds", r},
                          {"epsilon", epsilon},
                          {"flipped", bits_to_hex(flip, r * n)},
                          {"schedule", schedule.to_json()}};
  auto split_trace = nlohmann::json::array();
  for (const auto& q : plan.rounds) {
    split_trace.push_back({{"source_round", q.source + 1}, {"kind", kind_name(q.kind)},
                           {"players", Coalition::from_mask(q.active).to_json()}});
  }
  trace["split_rounds"] = split_trace;

  SearchOutcome out;
  out.threshold = 1.0 - epsilon;
  bool have_best = false;
  auto consider = [&](const Coalition& B, std::int32_t b, const InfluenceEstimate& cert) {
    if (!have_best || cert.value > out.certificate.value) {
      have_best = true;
      out.coalition = B;
      out.target = b;
      out.certificate = cert;
    }
    if (cert.value >= out.threshold - kCertifyTolerance) {
      out.status = SearchStatus::certified;
      out.coalition = B;
      out.target = b;
      out.certificate = cert;
      return true;
    }
    return false;
  };

  // pools[l] holds coalitions for the last l rounds of the split protocol.
  std::vector<std::vector<Coalition>> pools(rr + 1);
  pools[0] = {Coalition()};
  auto pool_trace = nlohmann::json::array();
  for (std::size_t l = 1; l <= rr; ++l) {
    const std::size_t q = rr - l;
    nlohmann::json info = {{"level", l}, {"round", q + 1}};
    auto fresh = round_pool(plan.rounds[q], P.round_measure(q), schedule.k[l], schedule.m[l], options.pool_size,
                            derive_seed(mix64(seed + 3), l), info);
    fresh.insert(fresh.end(), pools[l - 1].begin(), pools[l - 1].end());
    pools[l] = sorted_unique(std::move(fresh));
    info["size"] = pools[l].size();
    pool_trace.push_back(info);
  }
  trace["pools"] = pool_trace;

  // Pool scan on the original protocol.
  std::size_t scanned = 0;
  for (const auto& B : pools[rr]) {
    if (!game_in_budget(F, B)) continue;
    ++scanned;
    bool done = false;
    for (std::int32_t b = 0; b < 2 && !done; ++b) {
      done = consider(B, b, InfluenceEstimate::exact(optimal_influence(F, B, b).value));
    }
    if (done) {
      trace["pool_scanned"] = scanned;
      trace["path"] = "pool";
      out.trace = trace;
      return out;
    }
  }
  trace["pool_scanned"] = scanned;

  // Constructive step on the first split round.
  const SplitRound& head = plan.rounds[0];
  const auto& head_measure = P.round_measure(0);
  const std::size_t live_width = static_cast<std::size_t>(popcount(head.active));
  const double work = std::ldexp(1.0, static_cast<int>(live_width + (rr - 1) * n));
  if (n > 12 || work > std::ldexp(1.0, 26)) {
    trace["path"] = "pool";
    trace["failure"] = "pool scan found no certified coalition; constructive step out of budget";
    out.trace = trace;
    return out;
  }
  const double eps_step = epsilon / 2.0;
  const double delta_prev = schedule.delta[rr - 1];
  const auto& prev_pool = pools[rr - 1];
  std::vector<std::uint64_t> xs;
  {
    std::uint64_t x = 0;
    do {
      xs.push_back(x);
      x = next_submask(x, head.active);
    } while (x != 0);
  }
  std::vector<MultiRoundProtocol> tails(xs.size());
  parallel_for(xs.size(), [&](std::size_t i) { tails[i] = P.restrict_first_round(BitVector(n, xs[i])); });
  const CompactMass head_mass(head_measure, head.active);
  // Tail game values per (pool index, b, x), memoized.
  std::map<std::pair<std::size_t, std::int32_t>, std::vector<double>> memo;
  auto tail_values = [&](std::size_t t, std::int32_t b) -> const std::vector<double>& {
    auto it = memo.find({t, b});
    if (it != memo.end()) return it->second;
    std::vector<double> v(xs.size(), 0.0);
    parallel_for(xs.size(), [&](std::size_t i) { v[i] = optimal_influence(tails[i], prev_pool[t], b).value; });
    return memo.emplace(std::make_pair(t, b), std::move(v)).first->second;
  };
  for (const auto& T : prev_pool) {
    if (!game_in_budget(tails[0], T)) {
      trace["failure"] = "tail games out of budget";
      out.trace = trace;
      return out;
    }
  }
  auto expand = [&](const std::vector<std::int32_t>& compact) {
    std::vector<std::int32_t> table(std::size_t{1} << n);
    for (std::uint64_t x = 0; x < table.size(); ++x) table[x] = compact[x & head.active];
    return table;
  };
  auto final_certificate = [&](const Coalition& B, std::int32_t b, const std::vector<std::int32_t>& h,
                               std::int32_t h_target, std::uint64_t rollout_seed) {
    if (game_in_budget(F, B)) return InfluenceEstimate::exact(optimal_influence(F, B, b).value);
    return rollout(P, B, h, h_target, b, options.rollout_samples, rollout_seed);
  };

  auto steps = nlohmann::json::array();
  for (std::size_t attempt = 0; attempt < options.retries; ++attempt) {
    Rng rng = make_rng(derive_seed(mix64(seed + 4), attempt));
    nlohmann::json step = {{"attempt", attempt + 1}, {"kind", kind_name(head.kind)}, {"epsilon_step", eps_step}};
    if (head.kind == RoundKind::biased) {
      std::size_t M = static_cast<std::size_t>(
          std::ceil((std::log(1.0 / epsilon) + static_cast<double>(rr)) / delta_prev));
      step["M"] = M;
      if (M > 32) {
        M = 32;
        step["M_capped"] = 32;
      }
      std::vector<std::size_t> picks;
      for (std::size_t i = 0; i < M; ++i) picks.push_back(uniform_below(rng, prev_pool.size()));
      std::vector<std::int32_t> compact(std::size_t{1} << n, kDagger);
      for (std::size_t xi = 0; xi < xs.size(); ++xi) {
        for (std::size_t i = 0; i < M && compact[xs[xi]] == kDagger; ++i) {
          for (std::int32_t b = 0; b < 2; ++b) {
            if (tail_values(picks[i], b)[xi] >= 1.0 - eps_step - kCertifyTolerance) {
              compact[xs[xi]] = static_cast<std::int32_t>(2 * i) + b;
              break;
            }
          }
        }
      }
      const auto table = expand(compact);
      const RangedFunction h = RangedFunction::from_table(n, static_cast<std::uint32_t>(2 * M), table);
      const auto daggers = dagger_masses(h, head_measure, 2);
      step["covering_sets"] = nlohmann::json::array();
      for (auto p : picks) step["covering_sets"].push_back(prev_pool[p].to_json());
      step["dagger_masses"] = daggers;
      step["dagger_threshold"] = dagger_threshold(eps_step);
      if (daggers[0] >= dagger_threshold(eps_step) || daggers[1] >= dagger_threshold(eps_step)) {
        step["result"] = "dagger mass above threshold";
        steps.push_back(step);
        continue;
      }
      const auto sub = large_range_coalition(h, head_measure, 1, eps_step, derive_seed(seed, attempt),
                                             {options.range_constant});
      step["range_search"] = sub.trace;
      if (!sub.certified()) {
        step["result"] = "range search failed";
        steps.push_back(step);
        continue;
      }
      const std::size_t i = static_cast<std::size_t>(sub.target) / 2;
      const std::int32_t b = sub.target % 2;
      const Coalition B = Coalition::from_mask(sub.coalition.mask() | prev_pool[picks[i]].mask());
      const auto cert = final_certificate(B, b, table, sub.target, derive_seed(seed, attempt));
      step["coalition"] = B.to_json();
      step["b"] = b;
      step["certificate"] = cert.to_json();
      const bool ok = consider(B, b, cert);
      step["result"] = ok ? "certified" : "certificate below threshold";
      steps.push_back(step);
      if (ok) break;
    } else {
      const std::size_t t = uniform_below(rng, prev_pool.size());
      step["T"] = prev_pool[t].to_json();
      bool ok = false;
      for (std::int32_t b = 0; b < 2 && !ok; ++b) {
        const auto& values = tail_values(t, b);
        const std::uint64_t live = head.active;
        std::vector<std::int32_t> indicator(std::size_t{1} << live_width, 0);
        double event = 0.0;
        for (std::size_t xi = 0; xi < xs.size(); ++xi) {
          const std::uint64_t c = BitScatter(live).extract(xs[xi]);
          if (values[xi] >= 1.0 - eps_step - kCertifyTolerance) {
            indicator[c] = 1;
            event += head_mass(c);
          }
        }
        nlohmann::json branch = {{"b", b}, {"event_probability", event}, {"event_threshold", delta_prev / 4.0}};
        if (event < delta_prev / 4.0) {
          branch["result"] = "event fails";
          step["branches"].push_back(branch);
          continue;
        }
        const auto live_members = Coalition::from_mask(live).members();
        const ProductMeasure live_measure = head_measure.restrict(live_members);
        const RangedFunction h = RangedFunction::from_table(live_width, 2, indicator);
        std::uint64_t chosen = 0;
        bool have = false;
        const double alpha = std::min(schedule.eta[rr], 0.49);
        try {
          const std::size_t m = small_bias_subset_size(live_width, alpha, eps_step);
          branch["m"] = m;
          const auto sub = random_small_bias(h, live_measure, alpha, eps_step, m, options.single.subset_trials,
                                             derive_seed(seed, attempt));
          branch["random"] = sub.trace;
          if (sub.certified()) {
            chosen = sub.coalition.mask();
            have = true;
          }
        } catch (const PreconditionViolated& e) {
          branch["random_skipped"] = e.what();
        } catch (const DomainError& e) {
          branch["random_skipped"] = e.what();
        }
        if (!have && event >= eps_step) {
          const auto sub = greedy_small_bias(h, live_measure, eps_step, 1, live_width);
          branch["greedy"] = sub.trace;
          chosen = sub.coalition.mask();
          have = true;
        }
        if (!have) {
          branch["result"] = "no first-round set";
          step["branches"].push_back(branch);
          continue;
        }
        const Coalition B = Coalition::from_mask(BitScatter(live).deposit(chosen) | prev_pool[t].mask());
        std::vector<std::int32_t> full(std::size_t{1} << n);
        for (std::uint64_t x = 0; x < full.size(); ++x) full[x] = indicator[BitScatter(live).extract(x)];
        const auto cert = final_certificate(B, b, full, 1, derive_seed(seed, attempt));
        branch["coalition"] = B.to_json();
        branch["certificate"] = cert.to_json();
        ok = consider(B, b, cert);
        branch["result"] = ok ? "certified" : "certificate below threshold";
        step["branches"].push_back(branch);
      }
      steps.push_back(step);
      if (ok) break;
    }
  }
  trace["path"] = "constructive";
  trace["steps"] = steps;
  if (!out.certified()) trace["failure"] = "no constructed coalition certified";
  out.trace = trace;
  return out;
}

}  // namespace coinflip
