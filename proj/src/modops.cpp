#include "rnscrypt/modops.hpp"

#include <utility>

#include "rnscrypt/errors.hpp"
#include "rnscrypt/word.hpp"

namespace rnscrypt {

std::uint64_t channel_inverse(std::uint64_t x, std::uint64_t m) {
  if (x >= m) throw RangeError("channel value must be reduced below its modulus");
  if (x == 0) throw ZeroNotInvertibleError("zero has no inverse");
  __int128 old_r = m, r = x;
  __int128 old_t = 0, t = 1;
  while (r != 0) {
    __int128 q = old_r / r;
    old_r = std::exchange(r, old_r - q * r);
    old_t = std::exchange(t, old_t - q * t);
  }
  if (old_r != 1) throw ZeroNotInvertibleError("value shares a factor with the modulus");
  if (old_t < 0) old_t += m;
  return static_cast<std::uint64_t>(old_t);
}

namespace {

// k = (-f^-1) mod e; e == 1 collapses everything to zero.
std::uint64_t arazi_k(std::uint64_t e, std::uint64_t f_mod_e) {
  if (e == 1) return 0;
  if (f_mod_e == 0) throw NotCoprimeError("e divides f", e);
  std::uint64_t inv;
  try {
    inv = channel_inverse(f_mod_e, e);
  } catch (const ZeroNotInvertibleError&) {
    throw NotCoprimeError("gcd(e, f) != 1", e);
  }
  return inv == 0 ? 0 : e - inv;
}

}  // namespace

Bignum arazi_inverse(std::uint64_t e, const Bignum& f) {
  if (e == 0) throw RangeError("exponent must be positive");
  if (f <= Bignum{1}) throw RangeError("modulus must exceed 1");
  const std::uint64_t k = arazi_k(e, mod_word(f, e));
  auto [d, rem] = divmod(add(Bignum{1}, mul(f, Bignum{k})), Bignum{e});
  if (!rem.is_zero()) throw DivisionNotExactError("1 + f*k is not divisible by e");
  return d;
}

Bignum arazi_inverse_rns(std::uint64_t e, const Bignum& f, const RnsBase::Ptr& base) {
  if (e == 0) throw RangeError("exponent must be positive");
  if (f <= Bignum{1}) throw RangeError("modulus must exceed 1");
  const std::uint64_t k = arazi_k(e, mod_word(f, e));
  RnsInt fr = to_rns(f, base);
  std::vector<std::uint64_t> d(base->size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const std::uint64_t m = base->modulus(i);
    if (e % m == 0) throw NotCoprimeError("e shares a factor with a base modulus", m);
    const std::uint64_t numerator = word::add_mod(1 % m, word::mul_mod(fr[i], k % m, m), m);
    d[i] = word::mul_mod(numerator, channel_inverse(e % m, m), m);
  }
  return from_rns_mrs(RnsInt(base, std::move(d)));
}

}  // namespace rnscrypt
