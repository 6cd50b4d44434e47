#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "rnscrypt/bignum.hpp"
#include "rnscrypt/exec.hpp"
#include "rnscrypt/rns.hpp"

namespace rnscrypt {

namespace detail {
struct MontState;
}

/// A value in the Montgomery domain of one context, held simultaneously in
/// the main base B and in the auxiliary base B' (plus B''s redundant
/// channel). Both vectors represent the same integer, which is < 2N.
class MontInt {
 public:
  MontInt() = default;

  std::span<const std::uint64_t> main_residues() const noexcept { return main_; }
  /// B' residues followed by the residue modulo B''s redundant modulus.
  std::span<const std::uint64_t> aux_residues() const noexcept { return aux_; }

 private:
  friend class MontContext;
  std::shared_ptr<const detail::MontState> owner_;
  std::vector<std::uint64_t> main_;
  std::vector<std::uint64_t> aux_;
};

/// Montgomery arithmetic modulo an odd N with R = M, the product of the
/// main base. All constants (-N^-1 mod m_i, M^-1 mod m'_j, N mod m'_j,
/// R mod N, R^2 mod N and the two extension tables) are computed once here.
///
/// One multiplication runs as:
///   1. s = a*b and q = s*(-N^-1) channel-wise in B; s = a*b in B'
///   2. extend q from B to B' exactly (mixed radix)
///   3. t = (s + q*N) * M^-1 channel-wise in B'
///   4. extend t back from B' to B (redundant-channel CRT by default)
/// With inputs below 2N and 4N < M the output is again below 2N. Values are
/// only brought below N when they leave the domain.
class MontContext {
 public:
  /// Generated bases: B at offset 0, B' at offset `channel_count`.
  MontContext(const Bignum& n, std::size_t channel_count, unsigned word_bits = 32,
              ExtensionMethod back_extension = ExtensionMethod::crt_extra);
  MontContext(const Bignum& n, RnsBase::Ptr main, RnsBase::Ptr aux,
              ExtensionMethod back_extension = ExtensionMethod::crt_extra);

  /// Context with the smallest generated base that can hold `n`.
  static MontContext for_modulus(const Bignum& n, unsigned word_bits = 32);
  /// Smallest channel count c with c * (word_bits - 1) >= bits + 2.
  static std::size_t channels_for(std::size_t modulus_bits, unsigned word_bits = 32);

  const Bignum& modulus() const noexcept;
  const RnsBase::Ptr& main_base() const noexcept;
  const RnsBase::Ptr& aux_base() const noexcept;
  ExtensionMethod back_extension() const noexcept;

  /// x*R mod N. Throws RangeError unless x < N.
  MontInt to_mont(const Bignum& x) const;
  MontInt to_mont(const RnsInt& x) const;
  /// Fully reduced z*R^-1 mod N.
  Bignum from_mont(const MontInt& z) const;
  /// Wraps x < 2N as a domain value without scaling by R.
  MontInt lift(const Bignum& x) const;
  /// The integer (< 2N) a MontInt currently holds, reconstructed from B.
  Bignum value(const MontInt& z) const;
  Bignum aux_value(const MontInt& z) const;

  /// a*b*R^-1 mod N, result < 2N. Throws ContextMismatchError.
  MontInt mont_mul(const MontInt& a, const MontInt& b) const;
  /// The same product with every channel phase dispatched through
  /// exec::run_channels. Bit-identical to mont_mul for any worker count.
  MontInt mont_mul_channels(const MontInt& a, const MontInt& b, const exec::ParallelPlan& plan) const;
  /// Left-to-right square-and-multiply over domain values.
  MontInt mont_pow(const MontInt& base, const Bignum& k) const;
  /// x^k mod N, x < N.
  Bignum mont_exp(const Bignum& x, const Bignum& k) const;

  /// R mod N in the domain, i.e. the domain image of 1.
  const MontInt& one() const noexcept;

 private:
  void check_owner(const MontInt& z) const;
  MontInt make_value() const;
  void init_one();

  std::shared_ptr<const detail::MontState> state_;
  MontInt one_;
};

}  // namespace rnscrypt
