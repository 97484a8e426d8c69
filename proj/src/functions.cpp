#include "coinflip/functions.hpp"

#include <bit>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "coinflip/rng.hpp"

namespace coinflip {
namespace {

using nlohmann::json;

json coords_json(std::uint64_t mask) {
  json out = json::array();
  for (std::size_t i = 0; i < 64; ++i) {
    if ((mask >> i) & 1U) out.push_back(i + 1);
  }
  return out;
}

std::uint64_t coords_from_json(const json& j, std::size_t n) {
  std::uint64_t mask = 0;
  for (const auto& v : j) {
    const auto c = v.get<std::size_t>();
    if (c < 1 || c > n) throw DomainError("function JSON: coordinate out of range");
    mask |= std::uint64_t{1} << (c - 1);
  }
  return mask;
}

class ConstantNode final : public FunctionNode {
 public:
  explicit ConstantNode(std::int32_t v) : v_(v) {}
  std::int32_t eval(std::uint64_t) const override { return v_; }
  json to_json() const override { return {{"kind", "constant"}, {"params", {{"value", v_}}}}; }

 private:
  std::int32_t v_;
};

class OrNode final : public FunctionNode {
 public:
  std::int32_t eval(std::uint64_t x) const override { return x != 0 ? 1 : 0; }
  json to_json() const override { return {{"kind", "or"}, {"params", json::object()}}; }
};

class AndNode final : public FunctionNode {
 public:
  explicit AndNode(std::size_t n) : full_(low_mask(n)) {}
  std::int32_t eval(std::uint64_t x) const override { return x == full_ ? 1 : 0; }
  json to_json() const override { return {{"kind", "and"}, {"params", json::object()}}; }

 private:
  std::uint64_t full_;
};

class MajorityNode final : public FunctionNode {
 public:
  explicit MajorityNode(std::size_t n) : n_(n) {}
  std::int32_t eval(std::uint64_t x) const override {
    return 2 * static_cast<std::size_t>(popcount(x)) > n_ ? 1 : 0;
  }
  json to_json() const override { return {{"kind", "majority"}, {"params", json::object()}}; }

 private:
  std::size_t n_;
};

class ParityNode final : public FunctionNode {
 public:
  std::int32_t eval(std::uint64_t x) const override { return popcount(x) & 1; }
  json to_json() const override { return {{"kind", "parity"}, {"params", json::object()}}; }
};

class DictatorNode final : public FunctionNode {
 public:
  explicit DictatorNode(std::size_t i) : i_(i) {}
  std::int32_t eval(std::uint64_t x) const override { return static_cast<std::int32_t>((x >> i_) & 1U); }
  json to_json() const override { return {{"kind", "dictator"}, {"params", {{"index", i_ + 1}}}}; }

 private:
  std::size_t i_;
};

class TribesNode final : public FunctionNode {
 public:
  TribesNode(std::size_t n, std::size_t width) : n_(n), width_(width) {}
  std::int32_t eval(std::uint64_t x) const override {
    const std::uint64_t tribe = low_mask(width_);
    for (std::size_t start = 0; start < n_; start += width_) {
      if (((x >> start) & tribe) == tribe) return 1;
    }
    return 0;
  }
  json to_json() const override { return {{"kind", "tribes"}, {"params", {{"width", width_}}}}; }

 private:
  std::size_t n_;
  std::size_t width_;
};

class IteratedMajorityNode final : public FunctionNode {
 public:
  explicit IteratedMajorityNode(std::size_t depth) : depth_(depth) {}
  std::int32_t eval(std::uint64_t x) const override {
    std::uint64_t level = x;
    std::size_t width = 1;
    for (std::size_t d = 0; d < depth_; ++d) width *= 3;
    for (std::size_t d = 0; d < depth_; ++d) {
      std::uint64_t next = 0;
      for (std::size_t g = 0; g * 3 < width; ++g) {
        const auto ones = popcount((level >> (3 * g)) & 7U);
        if (ones >= 2) next |= std::uint64_t{1} << g;
      }
      level = next;
      width /= 3;
    }
    return static_cast<std::int32_t>(level & 1U);
  }
  json to_json() const override { return {{"kind", "iterated-majority"}, {"params", {{"depth", depth_}}}}; }

 private:
  std::size_t depth_;
};

class RandomNode final : public FunctionNode {
 public:
  RandomNode(std::uint64_t seed, std::vector<double> probs, double dagger)
      : seed_(seed), probs_(std::move(probs)), dagger_(dagger) {
    double acc = dagger_;
    for (double p : probs_) {
      acc += p;
      cumulative_.push_back(acc);
    }
    cumulative_.back() = 2.0;
  }
  std::int32_t eval(std::uint64_t x) const override {
    const double u = static_cast<double>(mix64(seed_ ^ mix64(x)) >> 11) * 0x1.0p-53;
    if (u < dagger_) return kDagger;
    for (std::size_t v = 0; v < cumulative_.size(); ++v) {
      if (u < cumulative_[v]) return static_cast<std::int32_t>(v);
    }
    return static_cast<std::int32_t>(cumulative_.size() - 1);
  }
  json to_json() const override {
    return {{"kind", "random"}, {"params", {{"seed", seed_}, {"probs", probs_}, {"dagger", dagger_}}}};
  }

 private:
  std::uint64_t seed_;
  std::vector<double> probs_;
  double dagger_;
  std::vector<double> cumulative_;
};

class LambdaNode final : public FunctionNode {
 public:
  LambdaNode(std::function<std::int32_t(std::uint64_t)> fn, std::string description)
      : fn_(std::move(fn)), description_(std::move(description)) {}
  std::int32_t eval(std::uint64_t x) const override { return fn_(x); }
  json to_json() const override { return {{"kind", "lambda"}, {"params", {{"description", description_}}}}; }

 private:
  std::function<std::int32_t(std::uint64_t)> fn_;
  std::string description_;
};

class NegatedNode final : public FunctionNode {
 public:
  NegatedNode(RangedFunction inner, std::uint64_t mask) : inner_(std::move(inner)), mask_(mask) {}
  std::int32_t eval(std::uint64_t x) const override { return inner_(x ^ mask_); }
  json to_json() const override {
    return {{"kind", "negated"}, {"params", {{"coords", coords_json(mask_)}, {"inner", inner_.to_json()}}}};
  }

 private:
  RangedFunction inner_;
  std::uint64_t mask_;
};

class BundleNode final : public FunctionNode {
 public:
  BundleNode(RangedFunction inner, std::vector<std::int32_t> partition)
      : inner_(std::move(inner)), partition_(std::move(partition)) {}
  std::int32_t eval(std::uint64_t x) const override {
    const std::int32_t v = inner_(x);
    return v == kDagger ? kDagger : partition_[static_cast<std::size_t>(v)];
  }
  json to_json() const override {
    return {{"kind", "bundle"}, {"params", {{"partition", partition_}, {"inner", inner_.to_json()}}}};
  }

 private:
  RangedFunction inner_;
  std::vector<std::int32_t> partition_;
};

class RestrictNode final : public FunctionNode {
 public:
  RestrictNode(RangedFunction inner, std::uint64_t fixed_mask, std::uint64_t fixed_values)
      : inner_(std::move(inner)),
        fixed_mask_(fixed_mask),
        fixed_values_(fixed_values & fixed_mask),
        free_(low_mask(inner_.arity()) & ~fixed_mask) {}
  std::int32_t eval(std::uint64_t x) const override { return inner_(free_.deposit(x) | fixed_values_); }
  json to_json() const override {
    return {{"kind", "restrict"},
            {"params",
             {{"coords", coords_json(fixed_mask_)},
              {"values", coords_json(fixed_values_)},
              {"inner", inner_.to_json()}}}};
  }

 private:
  RangedFunction inner_;
  std::uint64_t fixed_mask_;
  std::uint64_t fixed_values_;
  BitScatter free_;
};

class XorNode final : public FunctionNode {
 public:
  XorNode(RangedFunction f, RangedFunction g) : f_(std::move(f)), g_(std::move(g)) {}
  std::int32_t eval(std::uint64_t x) const override {
    const auto a = f_(x & low_mask(f_.arity()));
    const auto b = g_(x >> f_.arity());
    if (a == kDagger || b == kDagger) return kDagger;
    return a ^ b;
  }
  json to_json() const override { return {{"kind", "xor"}, {"params", {{"left", f_.to_json()}, {"right", g_.to_json()}}}}; }

 private:
  RangedFunction f_;
  RangedFunction g_;
};

class ProductRangeNode final : public FunctionNode {
 public:
  ProductRangeNode(RangedFunction f, RangedFunction g, bool shared_input)
      : f_(std::move(f)), g_(std::move(g)), shared_(shared_input) {}
  std::int32_t eval(std::uint64_t x) const override {
    const auto a = f_(shared_ ? x : (x & low_mask(f_.arity())));
    const auto b = g_(shared_ ? x : (x >> f_.arity()));
    if (a == kDagger || b == kDagger) return kDagger;
    return a * static_cast<std::int32_t>(g_.range_size()) + b;
  }
  json to_json() const override {
    return {{"kind", shared_ ? "pair" : "product"}, {"params", {{"left", f_.to_json()}, {"right", g_.to_json()}}}};
  }

 private:
  RangedFunction f_;
  RangedFunction g_;
  bool shared_;
};

void check_arity(std::size_t n) {
  if (n > kMaxArity) throw DomainError("function arity above 64");
}

}  // namespace

RangedFunction::RangedFunction(std::size_t n, std::uint32_t range_size, std::shared_ptr<const FunctionNode> node)
    : n_(n), range_size_(range_size), node_(std::move(node)) {
  check_arity(n);
  if (range_size < 1) throw DomainError("range size must be positive");
}

RangedFunction RangedFunction::from_table(std::size_t n, std::uint32_t range_size, std::vector<std::int32_t> table) {
  if (n > kMaxTableArity) throw DomainError("truth tables are limited to n <= 26");
  if (table.size() != (std::size_t{1} << n)) throw ArityMismatch("truth table length is not 2^n");
  for (auto v : table) {
    if (v != kDagger && (v < 0 || static_cast<std::uint32_t>(v) >= range_size)) {
      throw DomainError("truth table value outside the range");
    }
  }
  RangedFunction f;
  f.n_ = n;
  f.range_size_ = range_size;
  f.table_ = std::make_shared<const std::vector<std::int32_t>>(std::move(table));
  return f;
}

RangedFunction RangedFunction::from_lambda(std::size_t n, std::uint32_t range_size,
                                           std::function<std::int32_t(std::uint64_t)> fn, std::string description) {
  return RangedFunction(n, range_size, std::make_shared<LambdaNode>(std::move(fn), std::move(description)));
}

RangedFunction RangedFunction::constant(std::size_t n, std::int32_t value, std::uint32_t range_size) {
  if (value < 0 || static_cast<std::uint32_t>(value) >= range_size) throw DomainError("constant outside range");
  return RangedFunction(n, range_size, std::make_shared<ConstantNode>(value));
}

RangedFunction RangedFunction::or_function(std::size_t n) { return RangedFunction(n, 2, std::make_shared<OrNode>()); }

RangedFunction RangedFunction::and_function(std::size_t n) {
  check_arity(n);
  return RangedFunction(n, 2, std::make_shared<AndNode>(n));
}

RangedFunction RangedFunction::majority(std::size_t n) { return RangedFunction(n, 2, std::make_shared<MajorityNode>(n)); }

RangedFunction RangedFunction::parity(std::size_t n) { return RangedFunction(n, 2, std::make_shared<ParityNode>()); }

RangedFunction RangedFunction::dictator(std::size_t n, std::size_t index) {
  if (index >= n) throw DomainError("dictator index out of range");
  return RangedFunction(n, 2, std::make_shared<DictatorNode>(index));
}

RangedFunction RangedFunction::tribes(std::size_t n, std::size_t width) {
  if (width == 0 || n % width != 0) throw DomainError("tribes: n must be a positive multiple of the width");
  return RangedFunction(n, 2, std::make_shared<TribesNode>(n, width));
}

RangedFunction RangedFunction::iterated_majority(std::size_t depth) {
  std::size_t n = 1;
  for (std::size_t d = 0; d < depth; ++d) n *= 3;
  if (depth > 3) throw DomainError("iterated majority: depth above 3 exceeds 64 inputs");
  return RangedFunction(n, 2, std::make_shared<IteratedMajorityNode>(depth));
}

RangedFunction RangedFunction::random(std::size_t n, std::uint64_t seed, std::vector<double> probs, double dagger_prob) {
  if (probs.empty()) throw DomainError("random: empty probability vector");
  double total = dagger_prob;
  for (double p : probs) {
    if (!(p >= 0.0)) throw DomainError("random: negative probability");
    total += p;
  }
  if (!(dagger_prob >= 0.0) || std::abs(total - 1.0) > 1e-9) throw DomainError("random: probabilities must sum to 1");
  const auto range = static_cast<std::uint32_t>(probs.size());
  return RangedFunction(n, range, std::make_shared<RandomNode>(seed, std::move(probs), dagger_prob));
}

std::size_t RangedFunction::code_length() const noexcept {
  return range_size_ <= 1 ? 0 : static_cast<std::size_t>(std::bit_width(range_size_ - 1));
}

std::int32_t RangedFunction::evaluate(const BitVector& x) const {
  if (x.size() != n_) throw ArityMismatch("evaluate: point arity differs from function arity");
  return (*this)(x.bits());
}

RangedFunction RangedFunction::tabulated() const {
  if (table_) return *this;
  if (n_ > kMaxTableArity) throw DomainError("tabulated: arity above 26");
  std::vector<std::int32_t> table(std::size_t{1} << n_);
  for (std::size_t x = 0; x < table.size(); ++x) table[x] = node_->eval(x);
  RangedFunction f = *this;
  f.table_ = std::make_shared<const std::vector<std::int32_t>>(std::move(table));
  return f;
}

json RangedFunction::to_json() const {
  if (node_) {
    json j = node_->to_json();
    j["params"]["n"] = n_;
    j["params"]["range_size"] = range_size_;
    return j;
  }
  return {{"n", n_}, {"range_size", range_size_}, {"table", *table_}};
}

RangedFunction RangedFunction::from_json(const json& j) {
  if (j.contains("table")) {
    return from_table(j.at("n").get<std::size_t>(), j.value("range_size", 2U), j.at("table").get<std::vector<std::int32_t>>());
  }
  if (!j.contains("kind")) throw DomainError("function JSON: expected \"table\" or \"kind\"");
  const auto kind = j.at("kind").get<std::string>();
  const json params = j.value("params", json::object());
  const auto n = params.value("n", std::size_t{0});
  if (kind == "constant") return constant(n, params.at("value").get<std::int32_t>(), params.value("range_size", 2U));
  if (kind == "or") return or_function(n);
  if (kind == "and") return and_function(n);
  if (kind == "majority") return majority(n);
  if (kind == "parity") return parity(n);
  if (kind == "dictator") return dictator(n, params.at("index").get<std::size_t>() - 1);
  if (kind == "tribes") return tribes(n, params.at("width").get<std::size_t>());
  if (kind == "iterated-majority") return iterated_majority(params.at("depth").get<std::size_t>());
  if (kind == "random") {
    return random(n, params.at("seed").get<std::uint64_t>(), params.at("probs").get<std::vector<double>>(),
                  params.value("dagger", 0.0));
  }
  if (kind == "negated") {
    auto inner = from_json(params.at("inner"));
    return negate_coordinates(inner, coords_from_json(params.at("coords"), inner.arity()));
  }
  if (kind == "bundle") {
    return bundle_range(from_json(params.at("inner")), params.at("partition").get<std::vector<std::int32_t>>());
  }
  if (kind == "restrict") {
    auto inner = from_json(params.at("inner"));
    return restrict_coordinates(inner, coords_from_json(params.at("coords"), inner.arity()),
                                coords_from_json(params.at("values"), inner.arity()));
  }
  if (kind == "xor") return xor_juxtapose(from_json(params.at("left")), from_json(params.at("right")));
  if (kind == "product") return product_range(from_json(params.at("left")), from_json(params.at("right")));
  if (kind == "pair") return pair_values(from_json(params.at("left")), from_json(params.at("right")));
  throw DomainError("function JSON: unknown kind \"" + kind + "\"");
}

RangedFunction negate_coordinates(const RangedFunction& f, std::uint64_t mask) {
  if ((mask & ~low_mask(f.arity())) != 0) throw DomainError("negate_coordinates: coordinate out of range");
  if (mask == 0) return f;
  return RangedFunction(f.arity(), f.range_size(), std::make_shared<NegatedNode>(f, mask));
}

NegatedPair negate_coordinates(const RangedFunction& f, const ProductMeasure& measure, std::uint64_t mask) {
  if (f.arity() != measure.size()) throw ArityMismatch("negate_coordinates: function and measure arity differ");
  return {negate_coordinates(f, mask), measure.flip(mask)};
}

RangedFunction bundle_range(const RangedFunction& f, std::vector<std::int32_t> partition) {
  if (partition.size() != f.range_size()) throw DomainError("bundle_range: partition must cover every range value");
  std::int32_t top = -1;
  for (auto v : partition) {
    if (v < 0) throw DomainError("bundle_range: partition values must be non-negative");
    top = std::max(top, v);
  }
  const auto range = static_cast<std::uint32_t>(top + 1);
  return RangedFunction(f.arity(), range, std::make_shared<BundleNode>(f, std::move(partition)));
}

RangedFunction restrict_coordinates(const RangedFunction& f, std::uint64_t fixed_mask, std::uint64_t fixed_values) {
  if ((fixed_mask & ~low_mask(f.arity())) != 0) throw DomainError("restrict_coordinates: coordinate out of range");
  const std::size_t n = f.arity() - static_cast<std::size_t>(popcount(fixed_mask));
  return RangedFunction(n, f.range_size(), std::make_shared<RestrictNode>(f, fixed_mask, fixed_values));
}

RangedFunction xor_juxtapose(const RangedFunction& f, const RangedFunction& g) {
  if (f.range_size() != 2 || g.range_size() != 2) throw DomainError("xor_juxtapose: Boolean functions only");
  return RangedFunction(f.arity() + g.arity(), 2, std::make_shared<XorNode>(f, g));
}

RangedFunction product_range(const RangedFunction& f, const RangedFunction& g) {
  return RangedFunction(f.arity() + g.arity(), f.range_size() * g.range_size(),
                        std::make_shared<ProductRangeNode>(f, g, false));
}

RangedFunction pair_values(const RangedFunction& f, const RangedFunction& g) {
  if (f.arity() != g.arity()) throw ArityMismatch("pair_values: arities differ");
  return RangedFunction(f.arity(), f.range_size() * g.range_size(), std::make_shared<ProductRangeNode>(f, g, true));
}

MultiRoundProtocol::MultiRoundProtocol(std::size_t rounds, std::size_t players, RangedFunction outcome,
                                       std::vector<ProductMeasure> round_measures)
    : rounds_(rounds), players_(players), outcome_(std::move(outcome)), measures_(std::move(round_measures)) {
  if (rounds_ == 0) throw DomainError("protocol: at least one round");
  if (outcome_.arity() != rounds_ * players_) throw ArityMismatch("protocol: outcome arity must be rounds * players");
  if (outcome_.range_size() != 2) throw DomainError("protocol: outcome must be Boolean");
  if (measures_.size() != rounds_) throw ArityMismatch("protocol: one measure per round");
  for (const auto& m : measures_) {
    if (m.size() != players_) throw ArityMismatch("protocol: round measure arity must equal players");
  }
}

ProductMeasure MultiRoundProtocol::joint_measure() const {
  std::vector<double> all;
  for (const auto& m : measures_) all.insert(all.end(), m.biases().begin(), m.biases().end());
  return ProductMeasure(std::move(all));
}

MultiRoundProtocol MultiRoundProtocol::restrict_first_round(const BitVector& x) const {
  if (rounds_ < 2) throw DomainError("restrict_first_round: needs at least two rounds");
  if (x.size() != players_) throw ArityMismatch("restrict_first_round: x must have one bit per player");
  auto g = restrict_coordinates(outcome_, low_mask(players_), x.bits());
  if (outcome_.has_table()) g = g.tabulated();
  return MultiRoundProtocol(rounds_ - 1, players_, std::move(g),
                            std::vector<ProductMeasure>(measures_.begin() + 1, measures_.end()));
}

}  // namespace coinflip
