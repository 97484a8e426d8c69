#include "coinflip/bits.hpp"

#include "coinflip/rng.hpp"

#include <algorithm>

namespace coinflip {

std::string bits_to_hex(std::uint64_t bits, std::size_t width) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (std::size_t start = 0; start < width; start += 4) {
    unsigned digit = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      digit <<= 1;
      if (start + j < width && ((bits >> (start + j)) & 1U)) digit |= 1U;
    }
    out.push_back(kDigits[digit]);
  }
  return out;
}

std::uint64_t hex_to_bits(std::string_view hex, std::size_t width) {
  if (hex.size() != (width + 3) / 4) throw DomainError("hex_to_bits: length does not match width");
  std::uint64_t bits = 0;
  for (std::size_t d = 0; d < hex.size(); ++d) {
    const char c = hex[d];
    unsigned digit = 0;
    if (c >= '0' && c <= '9') {
      digit = static_cast<unsigned>(c - '0');
    } else if (c >= 'a' && c <= 'f') {
      digit = static_cast<unsigned>(c - 'a' + 10);
    } else if (c >= 'A' && c <= 'F') {
      digit = static_cast<unsigned>(c - 'A' + 10);
    } else {
      throw DomainError("hex_to_bits: invalid digit");
    }
    for (std::size_t j = 0; j < 4; ++j) {
      const std::size_t pos = d * 4 + j;
      if ((digit >> (3 - j)) & 1U) {
        if (pos >= width) throw DomainError("hex_to_bits: padding bit set");
        bits |= std::uint64_t{1} << pos;
      }
    }
  }
  return bits;
}

std::vector<std::size_t> sample_subset(Rng& rng, std::size_t n, std::size_t m) {
  if (m > n) throw DomainError("sample_subset: m exceeds n");
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform_below(rng, n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(m);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace coinflip
