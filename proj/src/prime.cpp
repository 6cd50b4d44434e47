#include "rnscrypt/prime.hpp"

#include <algorithm>
#include <cmath>

#include "rnscrypt/errors.hpp"
#include "rnscrypt/exec.hpp"
#include "rnscrypt/mont.hpp"

namespace rnscrypt::prime {

PrimalityVerdict PrimalityVerdict::factor(Bignum f) {
  return {Kind::composite, Evidence::factor, std::move(f), 0};
}
PrimalityVerdict PrimalityVerdict::witness(Bignum a) {
  return {Kind::composite, Evidence::witness, std::move(a), 0};
}
PrimalityVerdict PrimalityVerdict::probably_prime(unsigned rounds) {
  return {Kind::probably_prime, Evidence::none, Bignum{}, rounds};
}

std::vector<std::uint32_t> small_primes(std::size_t count) {
  if (count == 0) throw RangeError("count must be at least 1");
  // p_n < n (ln n + ln ln n) for n >= 6.
  const double n = static_cast<double>(std::max<std::size_t>(count, 6));
  const auto limit = static_cast<std::size_t>(n * (std::log(n) + std::log(std::log(n)))) + 1;
  std::vector<bool> composite(limit + 1, false);
  std::vector<std::uint32_t> out;
  out.reserve(count);
  for (std::size_t i = 2; i <= limit && out.size() < count; ++i) {
    if (composite[i]) continue;
    out.push_back(static_cast<std::uint32_t>(i));
    for (std::size_t j = i * i; j <= limit; j += i) composite[j] = true;
  }
  return out;
}

std::span<const std::uint32_t> trial_primes() {
  static const std::vector<std::uint32_t> primes = small_primes(kTrialPrimes);
  return primes;
}

std::optional<PrimalityVerdict> trial_divide(const Bignum& n, std::span<const std::uint32_t> primes) {
  if (n <= Bignum{1}) throw RangeError("trial division needs n > 1");
  const auto divides = exec::run_channels(
      [&](std::uint32_t p) -> char { return mod_word(n, p) == 0 && n != Bignum{p}; },
      exec::ParallelPlan{}, primes);
  const auto hit = std::find(divides.begin(), divides.end(), char{1});
  if (hit == divides.end()) return std::nullopt;
  return PrimalityVerdict::factor(Bignum{primes[static_cast<std::size_t>(hit - divides.begin())]});
}

namespace {

bool same_residues(const MontInt& a, const MontInt& b) {
  return std::ranges::equal(a.main_residues(), b.main_residues());
}

// True when z holds either representative of the target below 2N.
struct DomainTarget {
  MontInt low, high;
  bool matches(const MontInt& z) const { return same_residues(z, low) || same_residues(z, high); }
};

DomainTarget target_for(const MontContext& ctx, const Bignum& x) {
  const Bignum& n = ctx.modulus();
  const Bignum image = mod(mul(x, mod(ctx.main_base()->product(), n)), n);
  return {ctx.lift(image), ctx.lift(add(image, n))};
}

}  // namespace

PrimalityVerdict miller_rabin(const Bignum& n, unsigned rounds, rbg::Drbg& rng) {
  if (rounds == 0) throw RangeError("at least one round is required");
  if (!n.is_odd() || n <= Bignum{3}) throw RangeError("Miller-Rabin needs an odd n > 3");

  std::optional<MontContext> ctx;
  try {
    ctx.emplace(MontContext::for_modulus(n));
  } catch (const NotCoprimeError& e) {
    // The base moduli are primes; sharing one with n settles the question.
    if (Bignum{e.factor()} == n) return PrimalityVerdict::probably_prime(rounds);
    return PrimalityVerdict::factor(Bignum{e.factor()});
  }

  const Bignum n_minus_1 = sub(n, Bignum{1});
  std::size_t s = 0;
  while (!n_minus_1.bit(s)) ++s;
  const Bignum d = shift_right(n_minus_1, s);

  const DomainTarget one = target_for(*ctx, Bignum{1});
  const DomainTarget minus_one = target_for(*ctx, n_minus_1);
  const Bignum span = sub(n, Bignum{3});  // bases in [2, n-2]

  for (unsigned round = 0; round < rounds; ++round) {
    const Bignum a = add(rng.uniform_below(span), Bignum{2});
    MontInt x = ctx->mont_pow(ctx->to_mont(a), d);
    if (one.matches(x) || minus_one.matches(x)) continue;
    bool reached_minus_one = false;
    for (std::size_t r = 1; r < s; ++r) {
      x = ctx->mont_mul(x, x);
      if (minus_one.matches(x)) {
        reached_minus_one = true;
        break;
      }
      if (one.matches(x)) break;
    }
    if (!reached_minus_one) return PrimalityVerdict::witness(a);
  }
  return PrimalityVerdict::probably_prime(rounds);
}

bool evidence_holds(const Bignum& n, const PrimalityVerdict& v) {
  if (!v.composite()) return false;
  if (v.evidence == PrimalityVerdict::Evidence::factor) {
    return v.value > Bignum{1} && v.value < n && mod(n, v.value).is_zero();
  }
  if (v.evidence != PrimalityVerdict::Evidence::witness) return false;
  const Bignum n_minus_1 = sub(n, Bignum{1});
  std::size_t s = 0;
  while (!n_minus_1.bit(s)) ++s;
  Bignum x = modexp(v.value, shift_right(n_minus_1, s), n);
  if (x == Bignum{1} || x == n_minus_1) return false;
  for (std::size_t r = 1; r < s; ++r) {
    x = mod(mul(x, x), n);
    if (x == n_minus_1) return false;
  }
  return true;
}

Bignum generate_prime(std::size_t bits, rbg::Drbg& rng, const SearchOptions& options) {
  if (bits < 16) throw RangeError("prime size must be at least 16 bits");
  if (options.rounds == 0) throw RangeError("at least one round is required");
  const std::size_t cap = options.max_candidates != 0 ? options.max_candidates : 64 * bits;
  const auto primes = trial_primes();
  const Bignum top_two = add(Bignum::power_of_two(bits - 1), Bignum::power_of_two(bits - 2));

  std::size_t examined = 0;
  while (examined < cap) {
    Bignum start = add(rng.random_bits(bits - 2), top_two);
    if (!start.is_odd()) start = add(start, Bignum{1});

    std::vector<std::uint32_t> residues(primes.size());
    for (std::size_t i = 0; i < primes.size(); ++i) {
      residues[i] = static_cast<std::uint32_t>(mod_word(start, primes[i]));
    }

    Bignum candidate = start;
    for (std::uint64_t step = 0; examined < cap; ++step, ++examined) {
      if (step > 0) {
        candidate = add(candidate, Bignum{2});
        for (std::size_t i = 0; i < primes.size(); ++i) {
          std::uint32_t r = residues[i] + 2;
          residues[i] = r >= primes[i] ? r - primes[i] : r;
        }
      }
      if (candidate.bit_length() > bits) break;  // walked off the top; redraw

      bool sieved = false;
      for (std::size_t i = 0; i < primes.size(); ++i) {
        if (residues[i] == 0 && candidate != Bignum{primes[i]}) {
          sieved = true;
          break;
        }
      }
      if (sieved) continue;
      if (!miller_rabin(candidate, options.rounds, rng).composite()) return candidate;
    }
  }
  throw ExhaustionError("no probable prime of " + std::to_string(bits) + " bits within " +
                        std::to_string(cap) + " candidates");
}

}  // namespace rnscrypt::prime
