#pragma once

#include <cstdint>

namespace rnscrypt::word {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

inline constexpr u64 kNarrowLimit = u64{1} << 32;

inline u64 mul_mod(u64 a, u64 b, u64 m) {
  if (m <= kNarrowLimit) return (a * b) % m;
  return static_cast<u64>(static_cast<u128>(a) * b % m);
}

inline u64 add_mod(u64 a, u64 b, u64 m) {
  u64 s = a + b;
  return (s >= m || s < a) ? s - m : s;
}

inline u64 sub_mod(u64 a, u64 b, u64 m) { return a >= b ? a - b : a + (m - b); }

u64 pow_mod(u64 base, u64 exp, u64 m);

/// Deterministic primality for any 64-bit value.
bool is_prime(u64 n);

}  // namespace rnscrypt::word
