#include "rnscrypt/mont.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>
#include <tuple>

#include "rnscrypt/errors.hpp"
#include "rnscrypt/modops.hpp"
#include "rnscrypt/word.hpp"

namespace rnscrypt {
namespace detail {

using word::u64;

// Everything that depends on the base pair but not on N.
struct MontBases {
  MontBases(RnsBase::Ptr main_base, RnsBase::Ptr aux_base)
      : main(std::move(main_base)), aux(std::move(aux_base)), to_aux(main, aux), to_main(aux, main) {
    aux_moduli.resize(to_aux.target_count());
    m_inverse_aux.resize(aux_moduli.size());
    for (std::size_t j = 0; j < aux_moduli.size(); ++j) {
      aux_moduli[j] = to_aux.target_modulus(j);
      m_inverse_aux[j] = channel_inverse(mod_word(main->product(), aux_moduli[j]), aux_moduli[j]);
    }
  }

  RnsBase::Ptr main;
  RnsBase::Ptr aux;
  BaseExtender to_aux;
  BaseExtender to_main;
  std::vector<u64> aux_moduli;     // B' then its redundant modulus
  std::vector<u64> m_inverse_aux;  // M^-1 mod aux_moduli[j]
};

struct MontState {
  Bignum n;
  std::shared_ptr<const MontBases> bases;
  ExtensionMethod back = ExtensionMethod::crt_extra;
  std::vector<u64> neg_n_inverse;  // -N^-1 mod m_i
  std::vector<u64> n_aux;          // N mod aux_moduli[j]
  std::vector<u64> one_main, one_aux;          // R mod N
  std::vector<u64> r2_main, r2_aux;            // R^2 mod N
  std::vector<u64> unit_main, unit_aux;        // plain 1
};

}  // namespace detail

namespace {

using detail::MontBases;
using detail::MontState;
using word::u64;

std::shared_ptr<const MontBases> generated_bases(std::size_t channels, unsigned word_bits) {
  static std::mutex mutex;
  static std::map<std::pair<std::size_t, unsigned>, std::shared_ptr<const MontBases>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{channels, word_bits}];
  if (!slot) {
    slot = std::make_shared<const MontBases>(RnsBase::generate(channels, word_bits, 0),
                                             RnsBase::generate(channels, word_bits, channels));
  }
  return slot;
}

void residues_of(const Bignum& x, std::span<const u64> moduli, std::vector<u64>& out) {
  out.resize(moduli.size());
  for (std::size_t i = 0; i < moduli.size(); ++i) out[i] = mod_word(x, moduli[i]);
}

struct Scratch {
  explicit Scratch(const MontBases& b)
      : q(b.main->size()),
        q_aux(b.aux_moduli.size()),
        digits(std::max(b.main->size(), b.aux->size())),
        back(b.main->size() + 1) {}
  std::vector<u64> q, q_aux, digits, back;
};

// out may alias a or b: every phase reads an input channel before writing
// the same output channel, and main outputs are written last.
void mul_kernel(const MontState& st, const u64* a_main, const u64* a_aux, const u64* b_main,
                const u64* b_aux, u64* out_main, u64* out_aux, Scratch& s) {
  const MontBases& bases = *st.bases;
  const RnsBase& main = *bases.main;
  const std::size_t n = main.size();
  const std::size_t na = bases.aux_moduli.size();

  for (std::size_t i = 0; i < n; ++i) {
    const u64 m = main.modulus(i);
    s.q[i] = word::mul_mod(word::mul_mod(a_main[i], b_main[i], m), st.neg_n_inverse[i], m);
  }
  for (std::size_t j = 0; j < na; ++j) {
    out_aux[j] = word::mul_mod(a_aux[j], b_aux[j], bases.aux_moduli[j]);
  }

  bases.to_aux.extend_mrs(s.q, s.q_aux, s.digits);

  for (std::size_t j = 0; j < na; ++j) {
    const u64 m = bases.aux_moduli[j];
    const u64 sum = word::add_mod(out_aux[j], word::mul_mod(s.q_aux[j], st.n_aux[j], m), m);
    out_aux[j] = word::mul_mod(sum, bases.m_inverse_aux[j], m);
  }

  const std::span<const u64> t(out_aux, na - 1);
  if (st.back == ExtensionMethod::crt_extra) {
    bases.to_main.extend_crt(t, out_aux[na - 1], s.back, s.digits);
  } else {
    bases.to_main.extend_mrs(t, s.back, s.digits);
  }
  std::copy_n(s.back.begin(), n, out_main);
}

std::shared_ptr<const MontState> build_state(const Bignum& n,
                                             std::shared_ptr<const MontBases> bases,
                                             ExtensionMethod back, bool generated) {
  if (!n.is_odd()) throw EvenModulusError("Montgomery modulus must be odd");
  if (n <= Bignum{2}) throw RangeError("Montgomery modulus must exceed 2");
  const RnsBase& main = *bases->main;
  const RnsBase& aux = *bases->aux;
  if (generated && n.bit_length() > main.capacity_bits()) {
    throw CapacityError("modulus of " + std::to_string(n.bit_length()) +
                        " bits exceeds the base capacity of " +
                        std::to_string(main.capacity_bits()) + " bits");
  }
  if (mul(n, Bignum{4}) >= main.product()) throw CapacityError("need 4N < M");
  if (mul(n, Bignum{2}) >= aux.product()) throw CapacityError("need 2N < M'");
  for (const RnsBase* b : {&main, &aux}) {
    for (u64 m : b->moduli()) {
      if (mod_word(n, m) == 0) {
        throw NotCoprimeError("modulus shares the factor " + std::to_string(m) +
                              " with the RNS base", m);
      }
    }
  }

  auto st = std::make_shared<MontState>();
  st->n = n;
  st->bases = bases;
  st->back = back;
  st->neg_n_inverse.resize(main.size());
  for (std::size_t i = 0; i < main.size(); ++i) {
    const u64 m = main.modulus(i);
    st->neg_n_inverse[i] = m - channel_inverse(mod_word(n, m), m);
  }
  residues_of(n, bases->aux_moduli, st->n_aux);

  const Bignum r = mod(main.product(), n);
  const Bignum r2 = mod(mul(r, r), n);
  residues_of(r, main.moduli(), st->one_main);
  residues_of(r, bases->aux_moduli, st->one_aux);
  residues_of(r2, main.moduli(), st->r2_main);
  residues_of(r2, bases->aux_moduli, st->r2_aux);
  residues_of(Bignum{1}, main.moduli(), st->unit_main);
  residues_of(Bignum{1}, bases->aux_moduli, st->unit_aux);
  return st;
}

}  // namespace

MontContext::MontContext(const Bignum& n, std::size_t channel_count, unsigned word_bits,
                         ExtensionMethod back_extension)
    : state_(build_state(n, generated_bases(channel_count, word_bits), back_extension, true)) {
  init_one();
}

MontContext::MontContext(const Bignum& n, RnsBase::Ptr main, RnsBase::Ptr aux,
                         ExtensionMethod back_extension)
    : state_(build_state(n, std::make_shared<const MontBases>(std::move(main), std::move(aux)),
                         back_extension, false)) {
  init_one();
}

void MontContext::init_one() {
  one_ = make_value();
  one_.main_ = state_->one_main;
  one_.aux_ = state_->one_aux;
}

MontContext MontContext::for_modulus(const Bignum& n, unsigned word_bits) {
  return MontContext(n, channels_for(n.bit_length(), word_bits), word_bits);
}

std::size_t MontContext::channels_for(std::size_t modulus_bits, unsigned word_bits) {
  const std::size_t per_channel = word_bits - 1;
  return std::max<std::size_t>(1, (modulus_bits + 2 + per_channel - 1) / per_channel);
}

const Bignum& MontContext::modulus() const noexcept { return state_->n; }
const RnsBase::Ptr& MontContext::main_base() const noexcept { return state_->bases->main; }
const RnsBase::Ptr& MontContext::aux_base() const noexcept { return state_->bases->aux; }
ExtensionMethod MontContext::back_extension() const noexcept { return state_->back; }

MontInt MontContext::make_value() const {
  MontInt z;
  z.owner_ = state_;
  z.main_.resize(state_->bases->main->size());
  z.aux_.resize(state_->bases->aux_moduli.size());
  return z;
}

void MontContext::check_owner(const MontInt& z) const {
  if (z.owner_.get() != state_.get()) {
    throw ContextMismatchError("value belongs to a different Montgomery context");
  }
}

MontInt MontContext::lift(const Bignum& x) const {
  if (x >= mul(state_->n, Bignum{2})) throw RangeError("domain values must be below 2N");
  MontInt z = make_value();
  residues_of(x, state_->bases->main->moduli(), z.main_);
  residues_of(x, state_->bases->aux_moduli, z.aux_);
  return z;
}

MontInt MontContext::to_mont(const Bignum& x) const {
  if (x >= state_->n) throw RangeError("value must be below the modulus");
  MontInt z = lift(x);
  Scratch s(*state_->bases);
  mul_kernel(*state_, z.main_.data(), z.aux_.data(), state_->r2_main.data(),
             state_->r2_aux.data(), z.main_.data(), z.aux_.data(), s);
  return z;
}

MontInt MontContext::to_mont(const RnsInt& x) const {
  if (!x.base()->same_as(*state_->bases->main)) {
    throw BaseMismatchError("value is not in the context's main base");
  }
  return to_mont(from_rns_mrs(x));
}

Bignum MontContext::value(const MontInt& z) const {
  check_owner(z);
  return from_rns_mrs(RnsInt(state_->bases->main, z.main_));
}

Bignum MontContext::aux_value(const MontInt& z) const {
  check_owner(z);
  std::vector<u64> aux(z.aux_.begin(), z.aux_.end() - 1);
  return from_rns_mrs(RnsInt(state_->bases->aux, std::move(aux)));
}

Bignum MontContext::from_mont(const MontInt& z) const {
  check_owner(z);
  MontInt out = make_value();
  Scratch s(*state_->bases);
  mul_kernel(*state_, z.main_.data(), z.aux_.data(), state_->unit_main.data(),
             state_->unit_aux.data(), out.main_.data(), out.aux_.data(), s);
  Bignum v = value(out);
  if (v >= state_->n) v = sub(v, state_->n);
  return v;
}

MontInt MontContext::mont_mul(const MontInt& a, const MontInt& b) const {
  check_owner(a);
  check_owner(b);
  MontInt out = make_value();
  Scratch s(*state_->bases);
  mul_kernel(*state_, a.main_.data(), a.aux_.data(), b.main_.data(), b.aux_.data(),
             out.main_.data(), out.aux_.data(), s);
  return out;
}

MontInt MontContext::mont_mul_channels(const MontInt& a, const MontInt& b,
                                       const exec::ParallelPlan& plan) const {
  check_owner(a);
  check_owner(b);
  const MontState& st = *state_;
  const MontBases& bases = *st.bases;
  const RnsBase& main = *bases.main;
  const std::size_t n = main.size();
  const std::size_t na = bases.aux_moduli.size();

  std::vector<std::size_t> main_channels(n), aux_channels(na), aux_base_channels(na - 1);
  std::iota(main_channels.begin(), main_channels.end(), 0);
  std::iota(aux_channels.begin(), aux_channels.end(), 0);
  std::iota(aux_base_channels.begin(), aux_base_channels.end(), 0);
  const std::span<const std::size_t> main_span(main_channels), aux_span(aux_channels),
      aux_base_span(aux_base_channels);

  const auto q = exec::run_channels(
      [&](std::size_t i) {
        const u64 m = main.modulus(i);
        return word::mul_mod(word::mul_mod(a.main_[i], b.main_[i], m), st.neg_n_inverse[i], m);
      },
      plan, main_span);
  const auto prod_aux = exec::run_channels(
      [&](std::size_t j) { return word::mul_mod(a.aux_[j], b.aux_[j], bases.aux_moduli[j]); },
      plan, aux_span);

  // Mixed-radix digits are sequential; this is the barrier between phases.
  std::vector<u64> digits(n);
  main.mrs_digits(q, digits);

  const auto t = exec::run_channels(
      [&](std::size_t j) {
        const u64 m = bases.aux_moduli[j];
        const u64 qj = bases.to_aux.mrs_eval(digits, j);
        const u64 sum = word::add_mod(prod_aux[j], word::mul_mod(qj, st.n_aux[j], m), m);
        return word::mul_mod(sum, bases.m_inverse_aux[j], m);
      },
      plan, aux_span);
  const std::span<const u64> t_base(t.data(), na - 1);

  MontInt out = make_value();
  std::copy(t.begin(), t.end(), out.aux_.begin());
  std::vector<u64> back;
  if (st.back == ExtensionMethod::crt_extra) {
    const auto xi = exec::run_channels(
        [&](std::size_t j) { return bases.to_main.crt_xi(t_base, j); }, plan, aux_base_span);
    const u64 alpha = bases.to_main.crt_alpha(xi, t.back());
    back = exec::run_channels(
        [&](std::size_t i) { return bases.to_main.crt_eval(xi, alpha, i); }, plan, main_span);
  } else {
    std::vector<u64> aux_digits(na - 1);
    bases.aux->mrs_digits(t_base, aux_digits);
    back = exec::run_channels(
        [&](std::size_t i) { return bases.to_main.mrs_eval(aux_digits, i); }, plan, main_span);
  }
  std::copy(back.begin(), back.end(), out.main_.begin());
  return out;
}

MontInt MontContext::mont_pow(const MontInt& base, const Bignum& k) const {
  check_owner(base);
  MontInt acc = one();
  Scratch s(*state_->bases);
  for (std::size_t i = k.bit_length(); i-- > 0;) {
    mul_kernel(*state_, acc.main_.data(), acc.aux_.data(), acc.main_.data(), acc.aux_.data(),
               acc.main_.data(), acc.aux_.data(), s);
    if (k.bit(i)) {
      mul_kernel(*state_, acc.main_.data(), acc.aux_.data(), base.main_.data(),
                 base.aux_.data(), acc.main_.data(), acc.aux_.data(), s);
    }
  }
  return acc;
}

Bignum MontContext::mont_exp(const Bignum& x, const Bignum& k) const {
  return from_mont(mont_pow(to_mont(x), k));
}

const MontInt& MontContext::one() const noexcept { return one_; }

}  // namespace rnscrypt
