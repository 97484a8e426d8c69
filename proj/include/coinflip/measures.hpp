#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "coinflip/bits.hpp"
#include "coinflip/rng.hpp"
#include <json.hpp>

namespace coinflip {

// Product measure on {0,1}^n; biases[i] = Pr[x_i = 1]. Immutable once built.
class ProductMeasure {
 public:
  ProductMeasure() = default;
  explicit ProductMeasure(std::vector<double> biases);

  static ProductMeasure uniform(std::size_t n) { return ProductMeasure(std::vector<double>(n, 0.5)); }
  static ProductMeasure constant_bias(std::size_t n, double p) { return ProductMeasure(std::vector<double>(n, p)); }

  std::size_t size() const noexcept { return biases_.size(); }
  double bias(std::size_t i) const { return biases_.at(i); }
  const std::vector<double>& biases() const noexcept { return biases_; }

  double mass(const BitVector& x) const;
  double mass_bits(std::uint64_t x) const noexcept;

  // Law of the coordinatewise OR of t independent samples.
  ProductMeasure boost(std::size_t t) const;

  // Marginal on `coords`, in the order given.
  ProductMeasure restrict(std::span<const std::size_t> coords) const;

  // p_i -> 1 - p_i on the coordinates set in `mask`.
  ProductMeasure flip(std::uint64_t mask) const;

  BitVector sample(Rng& rng) const { return BitVector(size(), sample_bits(rng)); }
  std::uint64_t sample_bits(Rng& rng) const;

  nlohmann::json to_json() const;
  static ProductMeasure from_json(const nlohmann::json& j);

  friend bool operator==(const ProductMeasure&, const ProductMeasure&) = default;

 private:
  std::vector<double> biases_;
};

// 1 - (1-p)^t without cancellation for small p.
double boosted_bias(double p, std::size_t t);

// Masses of the assignments to a fixed coordinate subset, indexed by the compact
// assignment (bit j = j-th smallest coordinate of the subset). Two half tables.
class CompactMass {
 public:
  CompactMass(const ProductMeasure& measure, std::uint64_t coords);

  std::size_t width() const noexcept { return width_; }
  double operator()(std::uint64_t compact) const noexcept {
    return low_[compact & low_mask(split_)] * high_[compact >> split_];
  }

 private:
  std::size_t width_ = 0;
  std::size_t split_ = 0;
  std::vector<double> low_;
  std::vector<double> high_;
};

// Sampler route for measures without a product form.
using Sampler = std::function<std::uint64_t(Rng&)>;

Sampler product_sampler(ProductMeasure measure);
// OR of t independent draws of `base`.
Sampler or_compose(Sampler base, std::size_t t);

}  // namespace coinflip
