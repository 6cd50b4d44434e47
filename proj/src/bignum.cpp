#include "rnscrypt/bignum.hpp"

#include <algorithm>
#include <bit>

#include "rnscrypt/errors.hpp"

namespace rnscrypt {
namespace {

using Word = Bignum::Word;
using Words = std::vector<Word>;

constexpr unsigned kWordBits = 32;

void trim_words(Words& w) {
  while (!w.empty() && w.back() == 0) w.pop_back();
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

int compare_words(std::span<const Word> a, std::span<const Word> b) {
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  for (std::size_t i = a.size(); i-- > 0;) {
    if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
  }
  return 0;
}

// a -= b in place, a >= b assumed.
void sub_in_place(Words& a, std::span<const Word> b) {
  std::uint64_t borrow = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::uint64_t rhs = (i < b.size() ? b[i] : 0) + borrow;
    std::uint64_t lhs = a[i];
    borrow = lhs < rhs ? 1 : 0;
    a[i] = static_cast<Word>(lhs - rhs);
  }
}

// Single-word divisor.
std::uint64_t divmod_small(std::span<const Word> a, Word d, Words& quotient) {
  quotient.assign(a.size(), 0);
  std::uint64_t rem = 0;
  for (std::size_t i = a.size(); i-- > 0;) {
    std::uint64_t cur = (rem << kWordBits) | a[i];
    quotient[i] = static_cast<Word>(cur / d);
    rem = cur % d;
  }
  trim_words(quotient);
  return rem;
}

// Knuth, TAOCP vol. 2, 4.3.1 algorithm D. Requires v.size() >= 2, u >= v.
void divmod_knuth(std::span<const Word> u_in, std::span<const Word> v_in, Words& q, Words& r) {
  const std::size_t n = v_in.size();
  const std::size_t m = u_in.size() - n;
  const int s = std::countl_zero(v_in.back());

  Words vn(n);
  for (std::size_t i = n - 1; i > 0; --i) {
    vn[i] = s ? (v_in[i] << s) | (v_in[i - 1] >> (kWordBits - s)) : v_in[i];
  }
  vn[0] = v_in[0] << s;

  Words un(u_in.size() + 1);
  un[u_in.size()] = s ? u_in.back() >> (kWordBits - s) : 0;
  for (std::size_t i = u_in.size() - 1; i > 0; --i) {
    un[i] = s ? (u_in[i] << s) | (u_in[i - 1] >> (kWordBits - s)) : u_in[i];
  }
  un[0] = u_in[0] << s;

  constexpr std::uint64_t base = std::uint64_t{1} << kWordBits;
  q.assign(m + 1, 0);
  for (std::size_t j = m + 1; j-- > 0;) {
    std::uint64_t num = (static_cast<std::uint64_t>(un[j + n]) << kWordBits) | un[j + n - 1];
    std::uint64_t qhat = num / vn[n - 1];
    std::uint64_t rhat = num % vn[n - 1];
    while (qhat >= base || qhat * vn[n - 2] > ((rhat << kWordBits) | un[j + n - 2])) {
      --qhat;
      rhat += vn[n - 1];
      if (rhat >= base) break;
    }

    std::int64_t borrow = 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t p = qhat * vn[i];
      std::int64_t t = static_cast<std::int64_t>(un[i + j]) - borrow -
                       static_cast<std::int64_t>(p & 0xFFFFFFFFU);
      un[i + j] = static_cast<Word>(t);
      borrow = static_cast<std::int64_t>(p >> kWordBits) - (t >> kWordBits);
    }
    std::int64_t t = static_cast<std::int64_t>(un[j + n]) - borrow;
    un[j + n] = static_cast<Word>(t);

    if (t < 0) {
      --qhat;
      std::uint64_t carry = 0;
      for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t sum = static_cast<std::uint64_t>(un[i + j]) + vn[i] + carry;
        un[i + j] = static_cast<Word>(sum);
        carry = sum >> kWordBits;
      }
      un[j + n] = static_cast<Word>(un[j + n] + carry);
    }
    q[j] = static_cast<Word>(qhat);
  }

  r.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = s ? (un[i] >> s) | (un[i + 1] << (kWordBits - s)) : un[i];
  }
  trim_words(q);
  trim_words(r);
}

// Signed magnitude used only by the extended Euclid loop.
struct Signed {
  Bignum mag;
  bool neg = false;
};

Signed signed_sub(const Signed& a, const Signed& b) {
  if (a.neg != b.neg) return {add(a.mag, b.mag), a.neg};
  if (a.mag >= b.mag) return {sub(a.mag, b.mag), a.neg && a.mag != b.mag};
  return {sub(b.mag, a.mag), !a.neg};
}

}  // namespace

Bignum::Bignum(std::uint64_t value) {
  if (value != 0) {
    words_.push_back(static_cast<Word>(value));
    if (value >> kWordBits) words_.push_back(static_cast<Word>(value >> kWordBits));
  }
}

Bignum Bignum::from_words(std::vector<Word> words) {
  Bignum out;
  out.words_ = std::move(words);
  out.trim();
  return out;
}

Bignum Bignum::from_hex(std::string_view hex) {
  if (hex.empty()) throw ParseError("empty hex string");
  Words words((hex.size() + 7) / 8, 0);
  std::size_t nibble = 0;
  for (std::size_t i = hex.size(); i-- > 0; ++nibble) {
    int v = hex_value(hex[i]);
    if (v < 0) throw ParseError("invalid hex digit '" + std::string(1, hex[i]) + "'");
    words[nibble / 8] |= static_cast<Word>(v) << (4 * (nibble % 8));
  }
  return from_words(std::move(words));
}

Bignum Bignum::from_bytes(std::span<const std::uint8_t> big_endian) {
  Words words((big_endian.size() + 3) / 4, 0);
  std::size_t pos = 0;
  for (std::size_t i = big_endian.size(); i-- > 0; ++pos) {
    words[pos / 4] |= static_cast<Word>(big_endian[i]) << (8 * (pos % 4));
  }
  return from_words(std::move(words));
}

Bignum Bignum::power_of_two(std::size_t exponent) {
  Words words(exponent / kWordBits + 1, 0);
  words.back() = Word{1} << (exponent % kWordBits);
  return from_words(std::move(words));
}

std::string Bignum::to_hex() const {
  if (is_zero()) return "0";
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(words_.size() * 8);
  for (std::size_t i = words_.size(); i-- > 0;) {
    for (int shift = 28; shift >= 0; shift -= 4) {
      out.push_back(digits[(words_[i] >> shift) & 0xF]);
    }
  }
  out.erase(0, out.find_first_not_of('0'));
  return out;
}

std::vector<std::uint8_t> Bignum::to_bytes(std::size_t width) const {
  if ((bit_length() + 7) / 8 > width) {
    throw RangeError("value needs " + std::to_string((bit_length() + 7) / 8) +
                     " bytes, width is " + std::to_string(width));
  }
  std::vector<std::uint8_t> out(width, 0);
  for (std::size_t pos = 0; pos < words_.size() * 4 && pos < width; ++pos) {
    out[width - 1 - pos] = static_cast<std::uint8_t>(words_[pos / 4] >> (8 * (pos % 4)));
  }
  return out;
}

std::uint64_t Bignum::to_u64() const {
  if (words_.size() > 2) throw RangeError("value does not fit in 64 bits");
  std::uint64_t v = 0;
  if (!words_.empty()) v = words_[0];
  if (words_.size() > 1) v |= static_cast<std::uint64_t>(words_[1]) << kWordBits;
  return v;
}

std::size_t Bignum::bit_length() const noexcept {
  if (words_.empty()) return 0;
  return words_.size() * kWordBits - std::countl_zero(words_.back());
}

bool Bignum::bit(std::size_t index) const noexcept {
  std::size_t w = index / kWordBits;
  return w < words_.size() && ((words_[w] >> (index % kWordBits)) & 1U);
}

std::strong_ordering operator<=>(const Bignum& a, const Bignum& b) {
  return compare_words(a.words(), b.words()) <=> 0;
}

void Bignum::trim() { trim_words(words_); }

Bignum add(const Bignum& a, const Bignum& b) {
  auto x = a.words();
  auto y = b.words();
  if (x.size() < y.size()) std::swap(x, y);
  Words out(x.size() + 1, 0);
  std::uint64_t carry = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::uint64_t sum = static_cast<std::uint64_t>(x[i]) + (i < y.size() ? y[i] : 0) + carry;
    out[i] = static_cast<Word>(sum);
    carry = sum >> kWordBits;
  }
  out[x.size()] = static_cast<Word>(carry);
  return Bignum::from_words(std::move(out));
}

Bignum sub(const Bignum& a, const Bignum& b) {
  if (a < b) throw UnderflowError("subtraction underflow");
  Words out(a.words().begin(), a.words().end());
  sub_in_place(out, b.words());
  return Bignum::from_words(std::move(out));
}

Bignum mul(const Bignum& a, const Bignum& b) {
  if (a.is_zero() || b.is_zero()) return {};
  auto x = a.words();
  auto y = b.words();
  Words out(x.size() + y.size(), 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::uint64_t carry = 0;
    for (std::size_t j = 0; j < y.size(); ++j) {
      std::uint64_t cur = static_cast<std::uint64_t>(x[i]) * y[j] + out[i + j] + carry;
      out[i + j] = static_cast<Word>(cur);
      carry = cur >> kWordBits;
    }
    out[i + y.size()] = static_cast<Word>(carry);
  }
  return Bignum::from_words(std::move(out));
}

DivMod divmod(const Bignum& a, const Bignum& m) {
  if (m.is_zero()) throw DivisionByZeroError("division by zero");
  if (a < m) return {Bignum{}, a};
  Words q;
  if (m.words().size() == 1) {
    std::uint64_t r = divmod_small(a.words(), m.words()[0], q);
    return {Bignum::from_words(std::move(q)), Bignum{r}};
  }
  Words r;
  divmod_knuth(a.words(), m.words(), q, r);
  return {Bignum::from_words(std::move(q)), Bignum::from_words(std::move(r))};
}

Bignum mod(const Bignum& a, const Bignum& m) { return divmod(a, m).remainder; }

std::uint64_t mod_word(const Bignum& a, std::uint64_t m) {
  if (m == 0) throw DivisionByZeroError("division by zero");
  auto w = a.words();
  if (m <= 0xFFFFFFFFULL) {
    std::uint64_t r = 0;
    for (std::size_t i = w.size(); i-- > 0;) r = ((r << kWordBits) | w[i]) % m;
    return r;
  }
  unsigned __int128 r = 0;
  for (std::size_t i = w.size(); i-- > 0;) r = ((r << kWordBits) | w[i]) % m;
  return static_cast<std::uint64_t>(r);
}

Bignum shift_left(const Bignum& a, std::size_t bits) {
  if (a.is_zero()) return {};
  const std::size_t whole = bits / kWordBits;
  const unsigned part = bits % kWordBits;
  auto w = a.words();
  Words out(w.size() + whole + 1, 0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    out[i + whole] |= w[i] << part;
    if (part) out[i + whole + 1] |= w[i] >> (kWordBits - part);
  }
  return Bignum::from_words(std::move(out));
}

Bignum shift_right(const Bignum& a, std::size_t bits) {
  const std::size_t whole = bits / kWordBits;
  const unsigned part = bits % kWordBits;
  auto w = a.words();
  if (whole >= w.size()) return {};
  Words out(w.size() - whole, 0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = w[i + whole] >> part;
    if (part && i + whole + 1 < w.size()) out[i] |= w[i + whole + 1] << (kWordBits - part);
  }
  return Bignum::from_words(std::move(out));
}

Bignum modexp(const Bignum& x, const Bignum& k, const Bignum& n) {
  if (n <= Bignum{1}) throw RangeError("modexp modulus must exceed 1");
  Bignum base = mod(x, n);
  Bignum acc{1};
  for (std::size_t i = k.bit_length(); i-- > 0;) {
    acc = mod(mul(acc, acc), n);
    if (k.bit(i)) acc = mod(mul(acc, base), n);
  }
  return acc;
}

ExtGcd ext_gcd(const Bignum& a, const Bignum& b) {
  Bignum old_r = a;
  Bignum r = b;
  Signed old_s{Bignum{1}, false}, s{Bignum{}, false};
  Signed old_t{Bignum{}, false}, t{Bignum{1}, false};
  while (!r.is_zero()) {
    auto [q, rem] = divmod(old_r, r);
    old_r = std::exchange(r, rem);
    Signed next_s = signed_sub(old_s, {mul(q, s.mag), s.neg});
    old_s = std::exchange(s, next_s);
    Signed next_t = signed_sub(old_t, {mul(q, t.mag), t.neg});
    old_t = std::exchange(t, next_t);
  }
  return {old_r, old_s.mag, old_s.neg && !old_s.mag.is_zero(), old_t.mag,
          old_t.neg && !old_t.mag.is_zero()};
}

Bignum gcd(const Bignum& a, const Bignum& b) {
  Bignum x = a, y = b;
  while (!y.is_zero()) {
    Bignum r = mod(x, y);
    x = std::move(y);
    y = std::move(r);
  }
  return x;
}

std::optional<Bignum> mod_inverse(const Bignum& a, const Bignum& m) {
  if (m <= Bignum{1}) return std::nullopt;
  ExtGcd e = ext_gcd(mod(a, m), m);
  if (e.g != Bignum{1}) return std::nullopt;
  Bignum s = mod(e.s, m);
  if (e.s_negative && !s.is_zero()) s = sub(m, s);
  return s;
}

}  // namespace rnscrypt
