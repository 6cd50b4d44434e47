#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rnscrypt {

/// Non-negative arbitrary-precision integer in radix 2^32, least significant
/// word first.
///
/// This is the reference arithmetic that every RNS and Montgomery result is
/// checked against. It uses schoolbook multiplication and Knuth long division
/// and nothing cleverer. Zero is the empty word sequence; no other value has
/// a trailing zero word.
class Bignum {
 public:
  using Word = std::uint32_t;

  Bignum() = default;
  Bignum(std::uint64_t value);  // NOLINT(google-explicit-constructor)

  static Bignum from_words(std::vector<Word> words);
  /// Big-endian hex digits, either case, no prefix. Throws ParseError.
  static Bignum from_hex(std::string_view hex);
  static Bignum from_bytes(std::span<const std::uint8_t> big_endian);
  static Bignum power_of_two(std::size_t exponent);

  /// Lowercase big-endian hex, no prefix, no leading zeros ("0" for zero).
  std::string to_hex() const;
  /// Big-endian bytes left-padded to `width`. Throws RangeError if it does not fit.
  std::vector<std::uint8_t> to_bytes(std::size_t width) const;
  std::uint64_t to_u64() const;

  std::span<const Word> words() const noexcept { return words_; }
  bool is_zero() const noexcept { return words_.empty(); }
  bool is_odd() const noexcept { return !words_.empty() && (words_[0] & 1U); }
  std::size_t bit_length() const noexcept;
  bool bit(std::size_t index) const noexcept;

  friend bool operator==(const Bignum&, const Bignum&) = default;
  friend std::strong_ordering operator<=>(const Bignum& a, const Bignum& b);

 private:
  void trim();

  std::vector<Word> words_;
};

struct DivMod {
  Bignum quotient;
  Bignum remainder;
};

/// g = s*a + t*b where s and t carry explicit sign flags.
struct ExtGcd {
  Bignum g;
  Bignum s;
  bool s_negative = false;
  Bignum t;
  bool t_negative = false;
};

Bignum add(const Bignum& a, const Bignum& b);
/// Throws UnderflowError when a < b.
Bignum sub(const Bignum& a, const Bignum& b);
Bignum mul(const Bignum& a, const Bignum& b);
/// Throws DivisionByZeroError when m is zero.
DivMod divmod(const Bignum& a, const Bignum& m);
Bignum mod(const Bignum& a, const Bignum& m);
std::uint64_t mod_word(const Bignum& a, std::uint64_t m);
Bignum shift_left(const Bignum& a, std::size_t bits);
Bignum shift_right(const Bignum& a, std::size_t bits);

/// x^k mod n by left-to-right square-and-multiply. n must exceed 1.
Bignum modexp(const Bignum& x, const Bignum& k, const Bignum& n);
ExtGcd ext_gcd(const Bignum& a, const Bignum& b);
Bignum gcd(const Bignum& a, const Bignum& b);
/// a^-1 mod m, or nullopt when gcd(a, m) != 1.
std::optional<Bignum> mod_inverse(const Bignum& a, const Bignum& m);

inline Bignum operator+(const Bignum& a, const Bignum& b) { return add(a, b); }
inline Bignum operator-(const Bignum& a, const Bignum& b) { return sub(a, b); }
inline Bignum operator*(const Bignum& a, const Bignum& b) { return mul(a, b); }
inline Bignum operator/(const Bignum& a, const Bignum& b) { return divmod(a, b).quotient; }
inline Bignum operator%(const Bignum& a, const Bignum& b) { return divmod(a, b).remainder; }

}  // namespace rnscrypt
