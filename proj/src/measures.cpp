#include "coinflip/measures.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace coinflip {

ProductMeasure::ProductMeasure(std::vector<double> biases) : biases_(std::move(biases)) {
  if (biases_.size() > kMaxArity) throw DomainError("ProductMeasure: more than 64 coordinates");
  for (std::size_t i = 0; i < biases_.size(); ++i) {
    const double p = biases_[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw DomainError("ProductMeasure: bias " + std::to_string(i + 1) + " outside [0,1]");
    }
  }
}

double ProductMeasure::mass(const BitVector& x) const {
  if (x.size() != size()) throw ArityMismatch("mass: point arity differs from measure arity");
  return mass_bits(x.bits());
}

double ProductMeasure::mass_bits(std::uint64_t x) const noexcept {
  double m = 1.0;
  for (std::size_t i = 0; i < biases_.size(); ++i) {
    m *= ((x >> i) & 1U) ? biases_[i] : 1.0 - biases_[i];
  }
  return m;
}

double boosted_bias(double p, std::size_t t) {
  if (p >= 1.0) return 1.0;
  return -std::expm1(static_cast<double>(t) * std::log1p(-p));
}

ProductMeasure ProductMeasure::boost(std::size_t t) const {
  if (t == 0) throw DomainError("boost: t must be at least 1");
  if (t == 1) return *this;
  std::vector<double> out(biases_.size());
  std::transform(biases_.begin(), biases_.end(), out.begin(), [t](double p) { return boosted_bias(p, t); });
  return ProductMeasure(std::move(out));
}

ProductMeasure ProductMeasure::restrict(std::span<const std::size_t> coords) const {
  std::vector<double> out;
  out.reserve(coords.size());
  for (std::size_t c : coords) {
    if (c >= biases_.size()) throw DomainError("restrict: coordinate " + std::to_string(c + 1) + " out of range");
    out.push_back(biases_[c]);
  }
  return ProductMeasure(std::move(out));
}

ProductMeasure ProductMeasure::flip(std::uint64_t mask) const {
  if ((mask & ~low_mask(size())) != 0) throw DomainError("flip: coordinate out of range");
  std::vector<double> out = biases_;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if ((mask >> i) & 1U) out[i] = 1.0 - out[i];
  }
  return ProductMeasure(std::move(out));
}

std::uint64_t ProductMeasure::sample_bits(Rng& rng) const {
  std::uint64_t x = 0;
  for (std::size_t i = 0; i < biases_.size(); ++i) {
    if (bernoulli(rng, biases_[i])) x |= std::uint64_t{1} << i;
  }
  return x;
}

nlohmann::json ProductMeasure::to_json() const { return {{"n", size()}, {"biases", biases_}}; }

ProductMeasure ProductMeasure::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("biases")) throw DomainError("measure JSON: expected {\"n\", \"biases\"}");
  auto biases = j.at("biases").get<std::vector<double>>();
  if (j.contains("n") && j.at("n").get<std::size_t>() != biases.size()) {
    throw DomainError("measure JSON: n does not match length of biases");
  }
  return ProductMeasure(std::move(biases));
}

CompactMass::CompactMass(const ProductMeasure& measure, std::uint64_t coords) {
  std::vector<double> p;
  for (std::size_t i = 0; i < measure.size(); ++i) {
    if ((coords >> i) & 1U) p.push_back(measure.bias(i));
  }
  width_ = p.size();
  split_ = width_ / 2;
  auto build = [&p](std::size_t from, std::size_t to) {
    std::vector<double> table(std::size_t{1} << (to - from), 1.0);
    for (std::size_t a = 0; a < table.size(); ++a) {
      double m = 1.0;
      for (std::size_t j = from; j < to; ++j) m *= ((a >> (j - from)) & 1U) ? p[j] : 1.0 - p[j];
      table[a] = m;
    }
    return table;
  };
  low_ = build(0, split_);
  high_ = build(split_, width_);
}

Sampler product_sampler(ProductMeasure measure) {
  return [m = std::move(measure)](Rng& rng) { return m.sample_bits(rng); };
}

Sampler or_compose(Sampler base, std::size_t t) {
  if (t == 0) throw DomainError("or_compose: t must be at least 1");
  return [base = std::move(base), t](Rng& rng) {
    std::uint64_t x = 0;
    for (std::size_t i = 0; i < t; ++i) x |= base(rng);
    return x;
  };
}

}  // namespace coinflip
