#pragma once

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "coinflip/errors.hpp"

namespace coinflip {

// Widest cube any representation in this library addresses.
inline constexpr std::size_t kMaxArity = 64;

inline constexpr std::uint64_t low_mask(std::size_t width) {
  return width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1;
}

inline int popcount(std::uint64_t v) { return std::popcount(v); }

// Reverses the low `width` bits. Enumerating c = 0, 1, ... and reversing visits
// assignments in lexicographic order when the first listed coordinate is bit 0.
inline std::uint64_t reverse_low_bits(std::uint64_t v, std::size_t width) {
  std::uint64_t out = 0;
  for (std::size_t i = 0; i < width; ++i) {
    out = (out << 1) | ((v >> i) & 1U);
  }
  return out;
}

// A point of {0,1}^n. Coordinate i lives in bit i; the string form lists x_1 first.
class BitVector {
 public:
  BitVector() = default;
  BitVector(std::size_t n, std::uint64_t bits) : n_(n), bits_(bits & low_mask(n)) {
    if (n > kMaxArity) throw DomainError("BitVector: arity above 64");
  }

  static BitVector from_string(std::string_view s) {
    if (s.size() > kMaxArity) throw DomainError("BitVector: string longer than 64");
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '1') {
        bits |= std::uint64_t{1} << i;
      } else if (s[i] != '0') {
        throw DomainError("BitVector: expected only '0' and '1'");
      }
    }
    return BitVector(s.size(), bits);
  }

  std::size_t size() const noexcept { return n_; }
  std::uint64_t bits() const noexcept { return bits_; }
  bool operator[](std::size_t i) const { return (bits_ >> i) & 1U; }
  int weight() const noexcept { return popcount(bits_); }

  std::string to_string() const {
    std::string s(n_, '0');
    for (std::size_t i = 0; i < n_; ++i) {
      if ((*this)[i]) s[i] = '1';
    }
    return s;
  }

  friend bool operator==(const BitVector&, const BitVector&) = default;

 private:
  std::size_t n_ = 0;
  std::uint64_t bits_ = 0;
};

// Moves bits between a compact index and the positions of a fixed mask
// (software pdep/pext via byte lookup tables).
class BitScatter {
 public:
  BitScatter() = default;
  explicit BitScatter(std::uint64_t mask) : mask_(mask), width_(static_cast<std::size_t>(popcount(mask))) {
    std::array<std::uint64_t, 64> positions{};
    std::size_t count = 0;
    for (std::size_t i = 0; i < 64; ++i) {
      if ((mask >> i) & 1U) positions[count++] = std::uint64_t{1} << i;
    }
    for (std::size_t chunk = 0; chunk < 8; ++chunk) {
      for (std::size_t byte = 0; byte < 256; ++byte) {
        std::uint64_t dep = 0;
        for (std::size_t j = 0; j < 8; ++j) {
          const std::size_t idx = chunk * 8 + j;
          if (idx < count && ((byte >> j) & 1U)) dep |= positions[idx];
        }
        deposit_[chunk][byte] = dep;

        // extract: bits of the full word in [8*chunk, 8*chunk+8)
        std::uint64_t ext = 0;
        for (std::size_t j = 0; j < 8; ++j) {
          const std::size_t pos = chunk * 8 + j;
          if (((byte >> j) & 1U) && ((mask >> pos) & 1U)) {
            const auto rank = static_cast<std::size_t>(popcount(mask & low_mask(pos)));
            ext |= std::uint64_t{1} << rank;
          }
        }
        extract_[chunk][byte] = ext;
      }
    }
  }

  std::uint64_t mask() const noexcept { return mask_; }
  std::size_t width() const noexcept { return width_; }

  std::uint64_t deposit(std::uint64_t compact) const noexcept {
    std::uint64_t out = 0;
    for (std::size_t chunk = 0; chunk < 8 && compact != 0; ++chunk, compact >>= 8) {
      out |= deposit_[chunk][compact & 0xFFU];
    }
    return out;
  }

  std::uint64_t extract(std::uint64_t full) const noexcept {
    full &= mask_;
    std::uint64_t out = 0;
    for (std::size_t chunk = 0; chunk < 8 && full != 0; ++chunk, full >>= 8) {
      out |= extract_[chunk][full & 0xFFU];
    }
    return out;
  }

 private:
  std::uint64_t mask_ = 0;
  std::size_t width_ = 0;
  std::array<std::array<std::uint64_t, 256>, 8> deposit_{};
  std::array<std::array<std::uint64_t, 256>, 8> extract_{};
};

// Bit string rendered as hex, first bit = most significant bit of the first digit.
std::string bits_to_hex(std::uint64_t bits, std::size_t width);
std::uint64_t hex_to_bits(std::string_view hex, std::size_t width);

}  // namespace coinflip
