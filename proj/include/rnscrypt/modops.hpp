#pragma once

#include <cstdint>

#include "rnscrypt/bignum.hpp"
#include "rnscrypt/rns.hpp"

namespace rnscrypt {

/// x^-1 mod m for prime m by extended Euclid on words.
/// Throws ZeroNotInvertibleError when x == 0 and RangeError when x >= m.
std::uint64_t channel_inverse(std::uint64_t x, std::uint64_t m);

/// e^-1 mod f for a small exponent e, via the closed form
///
///     d = (1 + f * ((-f^-1) mod e)) / e
///
/// Only f mod e and one exact division by e are needed. Throws
/// NotCoprimeError when gcd(e, f) != 1.
Bignum arazi_inverse(std::uint64_t e, const Bignum& f);

/// Same formula evaluated channel-wise: f is converted to `base`, every
/// channel computes (1 + f_i * k) * e^-1 mod m_i, and d is reconstructed.
/// Requires f < M and e coprime to every modulus of `base`.
Bignum arazi_inverse_rns(std::uint64_t e, const Bignum& f, const RnsBase::Ptr& base);

}  // namespace rnscrypt
