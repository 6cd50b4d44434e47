#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "rnscrypt/bignum.hpp"

namespace testing_support {

using rnscrypt::Bignum;

/// Uniform value with at most `bits` bits.
inline Bignum random_below_bits(std::mt19937_64& rng, std::size_t bits) {
  std::vector<Bignum::Word> w((bits + 31) / 32);
  for (auto& x : w) x = static_cast<Bignum::Word>(rng());
  if (bits % 32 != 0 && !w.empty()) w.back() &= (Bignum::Word{1} << (bits % 32)) - 1;
  return Bignum::from_words(std::move(w));
}

/// Exactly `bits` bits.
inline Bignum random_exact_bits(std::mt19937_64& rng, std::size_t bits) {
  return rnscrypt::add(random_below_bits(rng, bits - 1), Bignum::power_of_two(bits - 1));
}

inline Bignum random_odd_exact_bits(std::mt19937_64& rng, std::size_t bits) {
  Bignum x = random_exact_bits(rng, bits);
  return x.is_odd() ? x : rnscrypt::add(x, Bignum{1});
}

/// Uniform in [0, bound) by rejection.
inline Bignum random_below(std::mt19937_64& rng, const Bignum& bound) {
  for (;;) {
    Bignum x = random_below_bits(rng, bound.bit_length());
    if (x < bound) return x;
  }
}

}  // namespace testing_support
