#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rnscrypt/bignum.hpp"

namespace rnscrypt {

enum class ExtensionMethod {
  mrs,        ///< exact, via mixed-radix digits (Garner)
  crt_extra,  ///< exact CRT sum, overflow count recovered from a redundant channel
};

/// The three numbers that regenerate a generated base. Moduli are never stored.
struct BaseDescriptor {
  unsigned word_bits = 32;
  std::size_t channel_count = 128;
  std::size_t offset = 0;

  std::string to_string() const;
  static BaseDescriptor parse(std::string_view text);
  friend bool operator==(const BaseDescriptor&, const BaseDescriptor&) = default;
};

/// An ordered set of distinct word-size primes with everything the
/// conversions need precomputed: M, M/m_i, (M/m_i)^-1 mod m_i, and the
/// triangular Garner table.
///
/// Every base also owns a redundant modulus m_r, a prime outside the base
/// that the `crt_extra` extension uses to recover the CRT overflow count.
/// For generated bases it is the prime `2 * channel_count` places below the
/// base's largest, so it never collides with the auxiliary base generated
/// at `offset = channel_count`.
class RnsBase {
 public:
  using Ptr = std::shared_ptr<const RnsBase>;

  /// The `channel_count` largest primes below 2^word_bits after skipping the
  /// first `offset` of them. word_bits must be 8, 16, 32 or 64.
  static Ptr generate(std::size_t channel_count, unsigned word_bits, std::size_t offset = 0);
  static Ptr generate(const BaseDescriptor& descriptor);
  /// Explicit moduli, used mostly for hand-checkable toy bases.
  static Ptr from_moduli(std::vector<std::uint64_t> moduli);

  std::size_t size() const noexcept { return moduli_.size(); }
  std::span<const std::uint64_t> moduli() const noexcept { return moduli_; }
  std::uint64_t modulus(std::size_t i) const { return moduli_[i]; }
  const Bignum& product() const noexcept { return product_; }
  std::uint64_t redundant_modulus() const noexcept { return redundant_; }
  unsigned word_bits() const noexcept { return word_bits_; }
  const std::optional<BaseDescriptor>& descriptor() const noexcept { return descriptor_; }
  /// Largest modulus bit-length a generated base accepts: channels * (word_bits - 1).
  std::size_t capacity_bits() const noexcept { return size() * (word_bits_ - 1); }
  /// All moduli, including the redundant one, fit in 32 bits.
  bool narrow() const noexcept { return narrow_; }

  bool same_as(const RnsBase& other) const noexcept;
  bool disjoint_with(const RnsBase& other) const noexcept;

  std::uint64_t crt_inverse(std::size_t i) const { return crt_inverse_[i]; }
  const Bignum& cofactor(std::size_t i) const { return cofactors_[i]; }
  /// prod_{k<i} m_k mod m_j for i < j.
  std::span<const std::uint64_t> garner_row(std::size_t j) const {
    return {garner_rows_.data() + j * (j - (j > 0)) / 2, j};
  }
  /// (prod_{k<j} m_k)^-1 mod m_j.
  std::uint64_t garner_inverse(std::size_t j) const { return garner_inverse_[j]; }

  /// Mixed-radix digits of the value with residues `x`.
  void mrs_digits(std::span<const std::uint64_t> x, std::span<std::uint64_t> digits) const;

  RnsBase(std::vector<std::uint64_t> moduli, std::uint64_t redundant, unsigned word_bits,
          std::optional<BaseDescriptor> descriptor);

 private:
  std::vector<std::uint64_t> moduli_;
  std::uint64_t redundant_;
  unsigned word_bits_;
  std::optional<BaseDescriptor> descriptor_;
  bool narrow_;
  Bignum product_;
  std::vector<Bignum> cofactors_;
  std::vector<std::uint64_t> crt_inverse_;
  std::vector<std::uint64_t> garner_rows_;
  std::vector<std::uint64_t> garner_inverse_;
};

/// An integer below M held as one residue per channel. Values produced by
/// to_rns or base_extend also carry their residue modulo the base's
/// redundant modulus; channel arithmetic drops it because the result may
/// have wrapped modulo M.
class RnsInt {
 public:
  RnsInt(RnsBase::Ptr base, std::vector<std::uint64_t> residues,
         std::optional<std::uint64_t> redundant = std::nullopt);

  const RnsBase::Ptr& base() const noexcept { return base_; }
  std::span<const std::uint64_t> residues() const noexcept { return residues_; }
  std::uint64_t operator[](std::size_t i) const { return residues_[i]; }
  std::size_t size() const noexcept { return residues_.size(); }
  std::optional<std::uint64_t> redundant() const noexcept { return redundant_; }

  /// Same base and same residues; the redundant residue is not compared.
  friend bool operator==(const RnsInt& a, const RnsInt& b);

 private:
  RnsBase::Ptr base_;
  std::vector<std::uint64_t> residues_;
  std::optional<std::uint64_t> redundant_;
};

/// X = d_0 + d_1 m_0 + d_2 m_0 m_1 + ...
struct MrsDigits {
  std::vector<std::uint64_t> digits;
};

/// Throws RangeError when x >= M.
RnsInt to_rns(const Bignum& x, const RnsBase::Ptr& base);
MrsDigits to_mrs(const RnsInt& r);
Bignum from_mrs(const MrsDigits& digits, const RnsBase& base);
Bignum from_rns_mrs(const RnsInt& r);
Bignum from_rns_crt(const RnsInt& r);

/// Channel-wise arithmetic mod each m_i. Throws BaseMismatchError.
RnsInt rns_add(const RnsInt& a, const RnsInt& b);
RnsInt rns_sub(const RnsInt& a, const RnsInt& b);
RnsInt rns_mul(const RnsInt& a, const RnsInt& b);

/// Residues of the same integer in `to`. Bases must be disjoint
/// (OverlappingBasesError). `crt_extra` needs the redundant residue and
/// throws MissingRedundantResidueError without it.
RnsInt base_extend(const RnsInt& r, const RnsBase::Ptr& to, ExtensionMethod method);

/// Precomputed tables for extending from one base into another. Output
/// spans have `to.size() + 1` entries: the target residues followed by the
/// residue modulo `to.redundant_modulus()`.
class BaseExtender {
 public:
  BaseExtender(RnsBase::Ptr from, RnsBase::Ptr to);

  const RnsBase& from() const noexcept { return *from_; }
  const RnsBase& to() const noexcept { return *to_; }
  std::size_t target_count() const noexcept { return targets_.size(); }
  std::uint64_t target_modulus(std::size_t t) const { return targets_[t]; }

  /// `scratch` needs from().size() entries.
  void extend_mrs(std::span<const std::uint64_t> x, std::span<std::uint64_t> out,
                  std::span<std::uint64_t> scratch) const;
  void extend_crt(std::span<const std::uint64_t> x, std::uint64_t x_redundant,
                  std::span<std::uint64_t> out, std::span<std::uint64_t> scratch) const;

  // Per-phase pieces of the two extensions, for channel-parallel drivers.
  std::uint64_t mrs_eval(std::span<const std::uint64_t> digits, std::size_t t) const;
  std::uint64_t crt_xi(std::span<const std::uint64_t> x, std::size_t i) const;
  std::uint64_t crt_alpha(std::span<const std::uint64_t> xi, std::uint64_t x_redundant) const;
  std::uint64_t crt_eval(std::span<const std::uint64_t> xi, std::uint64_t alpha,
                         std::size_t t) const;

 private:
  RnsBase::Ptr from_;
  RnsBase::Ptr to_;
  bool narrow_;
  std::vector<std::uint64_t> targets_;
  std::vector<std::uint64_t> mrs_table_;     // [t][i] = prod_{k<i} m_k mod target_t
  std::vector<std::uint64_t> crt_table_;     // [t][i] = (M/m_i) mod target_t
  std::vector<std::uint64_t> m_mod_target_;  // M mod target_t
  std::vector<std::uint64_t> cofactor_mod_redundant_;
  std::uint64_t m_inverse_redundant_;
};

}  // namespace rnscrypt
