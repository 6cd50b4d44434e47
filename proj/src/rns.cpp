#include "rnscrypt/rns.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <mutex>
#include <sstream>
#include <tuple>

#include "rnscrypt/errors.hpp"
#include "rnscrypt/modops.hpp"
#include "rnscrypt/word.hpp"

namespace rnscrypt {
namespace {

using word::u128;
using word::u64;

// Sum of a[i] * b[i] mod m. On the narrow path every product is < 2^64, so
// a 128-bit accumulator absorbs up to 2^64 terms before a single reduction.
u64 dot_mod(const u64* a, const u64* b, std::size_t n, u64 m, bool narrow) {
  if (narrow) {
    u128 acc = 0;
    for (std::size_t i = 0; i < n; ++i) acc += static_cast<u128>(a[i] * b[i]);
    return static_cast<u64>(acc % m);
  }
  u64 acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc = word::add_mod(acc, word::mul_mod(a[i], b[i], m), m);
  return acc;
}

// Descending primes below 2^bits, extended lazily and shared by every base.
class PrimeLadder {
 public:
  // Returns up to `count` primes; fewer when the range below 2^bits runs out.
  static std::vector<u64> get(unsigned bits, std::size_t count) {
    static std::mutex mutex;
    static std::map<unsigned, PrimeLadder> ladders;
    std::lock_guard lock(mutex);
    auto [it, inserted] = ladders.try_emplace(bits, bits);
    it->second.extend(count);
    const auto& primes = it->second.primes_;
    return {primes.begin(), primes.begin() + static_cast<std::ptrdiff_t>(std::min(count, primes.size()))};
  }

  explicit PrimeLadder(unsigned bits)
      : next_(bits == 64 ? ~u64{0} : (u64{1} << bits) - 1) {}

 private:
  void extend(std::size_t count) {
    while (primes_.size() < count && next_ >= 2) {
      if (word::is_prime(next_)) primes_.push_back(next_);
      --next_;
    }
  }

  u64 next_;
  std::vector<u64> primes_;
};

u64 smallest_prime_above(u64 n) {
  for (u64 c = n + 1;; ++c) {
    if (word::is_prime(c)) return c;
  }
}

const RnsBase& checked_same_base(const RnsInt& a, const RnsInt& b) {
  if (!a.base()->same_as(*b.base())) throw BaseMismatchError("operands live in different bases");
  return *a.base();
}

template <class Op>
RnsInt channel_op(const RnsInt& a, const RnsInt& b, Op op) {
  const RnsBase& base = checked_same_base(a, b);
  std::vector<u64> out(base.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(a[i], b[i], base.modulus(i));
  return RnsInt(a.base(), std::move(out));
}

}  // namespace

std::string BaseDescriptor::to_string() const {
  std::ostringstream os;
  os << "word_bits=" << word_bits << " channel_count=" << channel_count << " offset=" << offset;
  return os.str();
}

BaseDescriptor BaseDescriptor::parse(std::string_view text) {
  BaseDescriptor d;
  bool seen[3] = {false, false, false};
  std::istringstream is{std::string(text)};
  std::string field;
  while (is >> field) {
    auto eq = field.find('=');
    if (eq == std::string::npos) throw ParseError("malformed base descriptor field: " + field);
    std::string key = field.substr(0, eq);
    unsigned long long value = 0;
    try {
      std::size_t used = 0;
      value = std::stoull(field.substr(eq + 1), &used);
      if (used != field.size() - eq - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError("bad number in base descriptor: " + field);
    }
    if (key == "word_bits") d.word_bits = static_cast<unsigned>(value), seen[0] = true;
    else if (key == "channel_count") d.channel_count = value, seen[1] = true;
    else if (key == "offset") d.offset = value, seen[2] = true;
    else throw ParseError("unknown base descriptor field: " + key);
  }
  if (!(seen[0] && seen[1] && seen[2])) throw ParseError("incomplete base descriptor");
  return d;
}

RnsBase::Ptr RnsBase::generate(std::size_t channel_count, unsigned word_bits, std::size_t offset) {
  if (channel_count == 0) throw RangeError("a base needs at least one channel");
  if (word_bits != 8 && word_bits != 16 && word_bits != 32 && word_bits != 64) {
    throw RangeError("word_bits must be 8, 16, 32 or 64");
  }
  const std::size_t redundant_index = offset + 2 * channel_count;
  const auto ladder = PrimeLadder::get(word_bits, redundant_index + 1);
  if (ladder.size() < offset + channel_count) {
    throw NotEnoughPrimesError("only " + std::to_string(ladder.size()) + " primes below 2^" +
                               std::to_string(word_bits));
  }
  std::vector<u64> moduli(ladder.begin() + static_cast<std::ptrdiff_t>(offset),
                          ladder.begin() + static_cast<std::ptrdiff_t>(offset + channel_count));
  u64 redundant = 0;
  if (redundant_index < ladder.size() && ladder[redundant_index] > channel_count) {
    redundant = ladder[redundant_index];
  } else {
    // Tiny word sizes can run out of primes; go above the word instead.
    redundant = smallest_prime_above(ladder.front());
  }
  return std::make_shared<const RnsBase>(std::move(moduli), redundant, word_bits,
                                         BaseDescriptor{word_bits, channel_count, offset});
}

RnsBase::Ptr RnsBase::generate(const BaseDescriptor& d) {
  return generate(d.channel_count, d.word_bits, d.offset);
}

RnsBase::Ptr RnsBase::from_moduli(std::vector<u64> moduli) {
  if (moduli.empty()) throw RangeError("a base needs at least one channel");
  std::vector<u64> sorted = moduli;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw RangeError("base moduli must be distinct");
  }
  for (u64 m : moduli) {
    if (!word::is_prime(m)) throw RangeError("base modulus " + std::to_string(m) + " is not prime");
  }
  const u64 largest = sorted.back();
  const unsigned bits = static_cast<unsigned>(64 - std::countl_zero(largest));
  u64 redundant = largest;
  do {
    redundant = smallest_prime_above(redundant);
  } while (std::binary_search(sorted.begin(), sorted.end(), redundant));
  return std::make_shared<const RnsBase>(std::move(moduli), redundant, bits, std::nullopt);
}

RnsBase::RnsBase(std::vector<u64> moduli, u64 redundant, unsigned word_bits,
                 std::optional<BaseDescriptor> descriptor)
    : moduli_(std::move(moduli)),
      redundant_(redundant),
      word_bits_(word_bits),
      descriptor_(descriptor) {
  const std::size_t n = moduli_.size();
  narrow_ = redundant_ <= word::kNarrowLimit &&
            std::all_of(moduli_.begin(), moduli_.end(), [](u64 m) { return m <= word::kNarrowLimit; });

  product_ = Bignum{1};
  for (u64 m : moduli_) product_ = mul(product_, Bignum{m});

  cofactors_.reserve(n);
  crt_inverse_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    cofactors_.push_back(divmod(product_, Bignum{moduli_[i]}).quotient);
    crt_inverse_[i] = channel_inverse(mod_word(cofactors_[i], moduli_[i]), moduli_[i]);
  }

  garner_rows_.resize(n * (n - 1) / 2);
  garner_inverse_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const u64 mj = moduli_[j];
    u64* row = garner_rows_.data() + j * (j - (j > 0)) / 2;
    u64 prefix = 1 % mj;
    for (std::size_t i = 0; i < j; ++i) {
      row[i] = prefix;
      prefix = word::mul_mod(prefix, moduli_[i] % mj, mj);
    }
    garner_inverse_[j] = channel_inverse(prefix, mj);
  }
}

bool RnsBase::same_as(const RnsBase& other) const noexcept {
  return this == &other || moduli_ == other.moduli_;
}

bool RnsBase::disjoint_with(const RnsBase& other) const noexcept {
  for (u64 m : moduli_) {
    if (std::find(other.moduli_.begin(), other.moduli_.end(), m) != other.moduli_.end()) {
      return false;
    }
  }
  return true;
}

void RnsBase::mrs_digits(std::span<const u64> x, std::span<u64> digits) const {
  const std::size_t n = size();
  for (std::size_t j = 0; j < n; ++j) {
    const u64 mj = moduli_[j];
    const u64 partial = dot_mod(digits.data(), garner_row(j).data(), j, mj, narrow_);
    digits[j] = word::mul_mod(word::sub_mod(x[j], partial, mj), garner_inverse_[j], mj);
  }
}

RnsInt::RnsInt(RnsBase::Ptr base, std::vector<u64> residues, std::optional<u64> redundant)
    : base_(std::move(base)), residues_(std::move(residues)), redundant_(redundant) {
  if (residues_.size() != base_->size()) {
    throw RangeError("residue count does not match the base's channel count");
  }
  for (std::size_t i = 0; i < residues_.size(); ++i) {
    if (residues_[i] >= base_->modulus(i)) throw RangeError("residue not reduced");
  }
  if (redundant_ && *redundant_ >= base_->redundant_modulus()) {
    throw RangeError("redundant residue not reduced");
  }
}

bool operator==(const RnsInt& a, const RnsInt& b) {
  return a.base_->same_as(*b.base_) && a.residues_ == b.residues_;
}

RnsInt to_rns(const Bignum& x, const RnsBase::Ptr& base) {
  if (x >= base->product()) throw RangeError("value does not fit below the base product M");
  std::vector<u64> residues(base->size());
  for (std::size_t i = 0; i < residues.size(); ++i) residues[i] = mod_word(x, base->modulus(i));
  return RnsInt(base, std::move(residues), mod_word(x, base->redundant_modulus()));
}

MrsDigits to_mrs(const RnsInt& r) {
  MrsDigits out{std::vector<u64>(r.size())};
  r.base()->mrs_digits(r.residues(), out.digits);
  return out;
}

Bignum from_mrs(const MrsDigits& digits, const RnsBase& base) {
  Bignum x;
  for (std::size_t i = digits.digits.size(); i-- > 0;) {
    x = add(mul(x, Bignum{base.modulus(i)}), Bignum{digits.digits[i]});
  }
  return x;
}

Bignum from_rns_mrs(const RnsInt& r) { return from_mrs(to_mrs(r), *r.base()); }

Bignum from_rns_crt(const RnsInt& r) {
  const RnsBase& base = *r.base();
  Bignum sum;
  for (std::size_t i = 0; i < base.size(); ++i) {
    const u64 xi = word::mul_mod(r[i], base.crt_inverse(i), base.modulus(i));
    if (xi != 0) sum = add(sum, mul(base.cofactor(i), Bignum{xi}));
  }
  return mod(sum, base.product());
}

RnsInt rns_add(const RnsInt& a, const RnsInt& b) { return channel_op(a, b, word::add_mod); }
RnsInt rns_sub(const RnsInt& a, const RnsInt& b) { return channel_op(a, b, word::sub_mod); }
RnsInt rns_mul(const RnsInt& a, const RnsInt& b) { return channel_op(a, b, word::mul_mod); }

RnsInt base_extend(const RnsInt& r, const RnsBase::Ptr& to, ExtensionMethod method) {
  BaseExtender ext(r.base(), to);
  std::vector<u64> out(ext.target_count());
  std::vector<u64> scratch(r.size());
  if (method == ExtensionMethod::mrs) {
    ext.extend_mrs(r.residues(), out, scratch);
  } else {
    if (!r.redundant()) {
      throw MissingRedundantResidueError("crt_extra extension needs the redundant residue");
    }
    ext.extend_crt(r.residues(), *r.redundant(), out, scratch);
  }
  const u64 redundant = out.back();
  out.pop_back();
  return RnsInt(to, std::move(out), redundant);
}

BaseExtender::BaseExtender(RnsBase::Ptr from, RnsBase::Ptr to)
    : from_(std::move(from)), to_(std::move(to)) {
  if (!from_->disjoint_with(*to_)) throw OverlappingBasesError("bases share a modulus");
  const std::size_t n = from_->size();
  targets_.assign(to_->moduli().begin(), to_->moduli().end());
  targets_.push_back(to_->redundant_modulus());
  narrow_ = from_->narrow() && to_->narrow();

  mrs_table_.resize(targets_.size() * n);
  crt_table_.resize(targets_.size() * n);
  m_mod_target_.resize(targets_.size());
  for (std::size_t t = 0; t < targets_.size(); ++t) {
    const u64 mt = targets_[t];
    u64 prefix = 1 % mt;
    for (std::size_t i = 0; i < n; ++i) {
      mrs_table_[t * n + i] = prefix;
      prefix = word::mul_mod(prefix, from_->modulus(i) % mt, mt);
      crt_table_[t * n + i] = mod_word(from_->cofactor(i), mt);
    }
    m_mod_target_[t] = prefix;
  }

  const u64 mr = from_->redundant_modulus();
  cofactor_mod_redundant_.resize(n);
  for (std::size_t i = 0; i < n; ++i) cofactor_mod_redundant_[i] = mod_word(from_->cofactor(i), mr);
  m_inverse_redundant_ = channel_inverse(mod_word(from_->product(), mr), mr);
}

void BaseExtender::extend_mrs(std::span<const u64> x, std::span<u64> out,
                              std::span<u64> scratch) const {
  from_->mrs_digits(x, scratch);
  for (std::size_t t = 0; t < targets_.size(); ++t) out[t] = mrs_eval(scratch, t);
}

void BaseExtender::extend_crt(std::span<const u64> x, u64 x_redundant, std::span<u64> out,
                              std::span<u64> scratch) const {
  for (std::size_t i = 0; i < from_->size(); ++i) scratch[i] = crt_xi(x, i);
  const u64 alpha = crt_alpha(scratch, x_redundant);
  for (std::size_t t = 0; t < targets_.size(); ++t) out[t] = crt_eval(scratch, alpha, t);
}

u64 BaseExtender::mrs_eval(std::span<const u64> digits, std::size_t t) const {
  const std::size_t n = from_->size();
  return dot_mod(digits.data(), mrs_table_.data() + t * n, n, targets_[t], narrow_);
}

u64 BaseExtender::crt_xi(std::span<const u64> x, std::size_t i) const {
  return word::mul_mod(x[i], from_->crt_inverse(i), from_->modulus(i));
}

// X = sum xi_i M_i - alpha M with 0 <= alpha < n, so alpha is pinned down by
// its value modulo the redundant channel as long as n < m_r.
u64 BaseExtender::crt_alpha(std::span<const u64> xi, u64 x_redundant) const {
  const u64 mr = from_->redundant_modulus();
  const u64 sum = dot_mod(xi.data(), cofactor_mod_redundant_.data(), from_->size(), mr, narrow_);
  return word::mul_mod(word::sub_mod(sum, x_redundant, mr), m_inverse_redundant_, mr);
}

u64 BaseExtender::crt_eval(std::span<const u64> xi, u64 alpha, std::size_t t) const {
  const std::size_t n = from_->size();
  const u64 mt = targets_[t];
  const u64 sum = dot_mod(xi.data(), crt_table_.data() + t * n, n, mt, narrow_);
  return word::sub_mod(sum, word::mul_mod(alpha % mt, m_mod_target_[t], mt), mt);
}

}  // namespace rnscrypt
