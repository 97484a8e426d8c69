#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <json.hpp>

#include "coinflip/functions.hpp"
#include "coinflip/influence.hpp"

namespace coinflip {

// Rushing response: given the good players' broadcasts of rounds 0..round
// (good_rounds.size() == round + 1), the bad players' assignment for `round`.
// Good assignments are compact: bit j is the j-th smallest player outside B.
// The returned assignment is compact over B in the same way.
using Policy = std::function<std::uint64_t(std::size_t round, std::span<const std::uint64_t> good_rounds)>;

// Exact-game limits: r*(n-|B|) and r*|B| each at most 22, r*n at most 28.
inline constexpr std::size_t kMaxGameGoodBits = 22;
inline constexpr std::size_t kMaxGameBadBits = 22;
inline constexpr std::size_t kMaxGameBits = 28;

// A deterministic strategy stored as per-round tables indexed by the good history
// (round-major: round 0 in the lowest bits).
class Strategy {
 public:
  Strategy() = default;
  Strategy(Coalition coalition, std::size_t rounds, std::size_t players, std::vector<std::vector<std::uint64_t>> tables);

  // Every table entry equal to `assignment`.
  static Strategy constant(Coalition coalition, std::size_t rounds, std::size_t players, std::uint64_t assignment = 0);
  // Tabulates `policy` on every good history.
  static Strategy materialize(const Policy& policy, Coalition coalition, std::size_t rounds, std::size_t players);

  const Coalition& coalition() const noexcept { return coalition_; }
  std::size_t rounds() const noexcept { return rounds_; }
  std::size_t players() const noexcept { return players_; }
  const std::vector<std::vector<std::uint64_t>>& tables() const noexcept { return tables_; }

  std::uint64_t respond(std::size_t round, std::span<const std::uint64_t> good_rounds) const;
  Policy policy() const;

  // {"coalition": [...1-based], "rounds": [{history_hex: assignment_hex}, ...]}
  nlohmann::json to_json() const;
  static Strategy from_json(const nlohmann::json& j, std::size_t rounds, std::size_t players);

 private:
  Coalition coalition_;
  std::size_t rounds_ = 0;
  std::size_t players_ = 0;
  std::vector<std::vector<std::uint64_t>> tables_;
};

struct GameValue {
  double value = 0.0;
  bool certified = true;
  nlohmann::json to_json() const { return {{"value", value}, {"certified", certified}}; }
};

// Places one round's good and bad bits into the full r*n input.
std::uint64_t assemble_round(std::size_t round, std::size_t players, std::uint64_t good_mask, std::uint64_t good,
                             std::uint64_t bad);

// Pr[f = b] when the good players draw from their round measures and B answers by `policy`.
InfluenceEstimate strategy_influence(const MultiRoundProtocol& protocol, const Coalition& coalition,
                                     const Policy& policy, std::int32_t b, const EvalOptions& options = {});
InfluenceEstimate strategy_influence(const MultiRoundProtocol& protocol, const Strategy& strategy, std::int32_t b,
                                     const EvalOptions& options = {});

// sup over strategies, by backward induction.
GameValue optimal_influence(const MultiRoundProtocol& protocol, const Coalition& coalition, std::int32_t b);

// Argmax of the backward induction, ties toward the lexicographically smallest assignment.
Strategy extract_optimal_strategy(const MultiRoundProtocol& protocol, const Coalition& coalition, std::int32_t b);

// Throws BudgetExceeded unless the exact game fits the limits above.
void check_game_budget(const MultiRoundProtocol& protocol, const Coalition& coalition);
bool game_in_budget(const MultiRoundProtocol& protocol, const Coalition& coalition);

}  // namespace coinflip
