#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "coinflip/bits.hpp"
#include "coinflip/measures.hpp"

namespace coinflip {

// Failure sentinel. Never a member of the range and never a coalition target.
inline constexpr std::int32_t kDagger = -1;

// Largest arity for which a truth table may be materialized.
inline constexpr std::size_t kMaxTableArity = 26;

class FunctionNode {
 public:
  virtual ~FunctionNode() = default;
  virtual std::int32_t eval(std::uint64_t x) const = 0;
  virtual nlohmann::json to_json() const = 0;
};

// f: {0,1}^n -> {0, ..., range_size-1} ∪ {†}. Cheap to copy; the representation is shared.
class RangedFunction {
 public:
  RangedFunction() = default;
  RangedFunction(std::size_t n, std::uint32_t range_size, std::shared_ptr<const FunctionNode> node);

  static RangedFunction from_table(std::size_t n, std::uint32_t range_size, std::vector<std::int32_t> table);
  // Wraps an arbitrary evaluator. `description` is what to_json reports.
  static RangedFunction from_lambda(std::size_t n, std::uint32_t range_size,
                                    std::function<std::int32_t(std::uint64_t)> fn, std::string description);

  static RangedFunction constant(std::size_t n, std::int32_t value, std::uint32_t range_size = 2);
  static RangedFunction or_function(std::size_t n);
  static RangedFunction and_function(std::size_t n);
  // 1 iff more than half of the inputs are 1.
  static RangedFunction majority(std::size_t n);
  static RangedFunction parity(std::size_t n);
  static RangedFunction dictator(std::size_t n, std::size_t index);
  // OR of ANDs over consecutive blocks of `width`; n must be a multiple of width.
  static RangedFunction tribes(std::size_t n, std::size_t width);
  // Recursive majority of three, n = 3^depth.
  static RangedFunction iterated_majority(std::size_t depth);
  // Hash-defined: value v with probability probs[v], † with probability dagger_prob.
  static RangedFunction random(std::size_t n, std::uint64_t seed, std::vector<double> probs, double dagger_prob = 0.0);

  std::size_t arity() const noexcept { return n_; }
  std::uint32_t range_size() const noexcept { return range_size_; }
  // m = ceil(log2 |R|): width of the big-endian code of a range value.
  std::size_t code_length() const noexcept;

  std::int32_t operator()(std::uint64_t x) const {
    return table_ ? (*table_)[static_cast<std::size_t>(x)] : node_->eval(x);
  }
  std::int32_t evaluate(const BitVector& x) const;

  bool has_table() const noexcept { return static_cast<bool>(table_); }
  const std::vector<std::int32_t>& table() const { return *table_; }
  // Same function backed by a materialized truth table (n <= 26).
  RangedFunction tabulated() const;

  nlohmann::json to_json() const;
  static RangedFunction from_json(const nlohmann::json& j);

 private:
  std::size_t n_ = 0;
  std::uint32_t range_size_ = 2;
  std::shared_ptr<const FunctionNode> node_;
  std::shared_ptr<const std::vector<std::int32_t>> table_;
};

// f'(x) = f(x xor mask).
RangedFunction negate_coordinates(const RangedFunction& f, std::uint64_t mask);

struct NegatedPair {
  RangedFunction function;
  ProductMeasure measure;
};
// Applies the same flip to f and μ, preserving the law of f's value.
NegatedPair negate_coordinates(const RangedFunction& f, const ProductMeasure& measure, std::uint64_t mask);

// Composes f with partition: value v becomes partition[v]; † stays †.
RangedFunction bundle_range(const RangedFunction& f, std::vector<std::int32_t> partition);

// Fixes the coordinates in `fixed_mask` to the matching bits of `fixed_values`;
// the remaining coordinates keep their relative order.
RangedFunction restrict_coordinates(const RangedFunction& f, std::uint64_t fixed_mask, std::uint64_t fixed_values);

// f(x) xor g(y) on the concatenated input (x first). Boolean inputs only.
RangedFunction xor_juxtapose(const RangedFunction& f, const RangedFunction& g);

// (f(x), g(y)) encoded as f*|R_g| + g; † if either side is †.
RangedFunction product_range(const RangedFunction& f, const RangedFunction& g);

// Applies f to the same input and pairs the values: f*|R_g| + g.
RangedFunction pair_values(const RangedFunction& f, const RangedFunction& g);

// f: ({0,1}^n)^r -> {0,1}; round i reads coordinates i*n .. i*n+n-1.
class MultiRoundProtocol {
 public:
  MultiRoundProtocol() = default;
  MultiRoundProtocol(std::size_t rounds, std::size_t players, RangedFunction outcome,
                     std::vector<ProductMeasure> round_measures);

  std::size_t rounds() const noexcept { return rounds_; }
  std::size_t players() const noexcept { return players_; }
  const RangedFunction& outcome() const noexcept { return outcome_; }
  const ProductMeasure& round_measure(std::size_t i) const { return measures_.at(i); }
  const std::vector<ProductMeasure>& round_measures() const noexcept { return measures_; }
  ProductMeasure joint_measure() const;

  // g_x(y) = f(x, y); requires at least two rounds.
  MultiRoundProtocol restrict_first_round(const BitVector& x) const;

 private:
  std::size_t rounds_ = 0;
  std::size_t players_ = 0;
  RangedFunction outcome_;
  std::vector<ProductMeasure> measures_;
};

}  // namespace coinflip
