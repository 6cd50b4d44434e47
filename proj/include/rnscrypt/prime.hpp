#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rnscrypt/bignum.hpp"
#include "rnscrypt/rbg.hpp"

namespace rnscrypt::prime {

/// Outcome of a primality test. Composite verdicts carry checkable
/// evidence: either a proper factor or a Miller-Rabin witness.
struct PrimalityVerdict {
  enum class Kind { composite, probably_prime };
  enum class Evidence { none, factor, witness };

  Kind kind = Kind::probably_prime;
  Evidence evidence = Evidence::none;
  Bignum value;            // the factor or witness
  unsigned rounds = 0;     // rounds run for a probably_prime verdict

  bool composite() const noexcept { return kind == Kind::composite; }
  static PrimalityVerdict factor(Bignum f);
  static PrimalityVerdict witness(Bignum a);
  static PrimalityVerdict probably_prime(unsigned rounds);
};

inline constexpr std::size_t kTrialPrimes = 10000;
inline constexpr unsigned kDefaultRounds = 64;

/// The first `count` primes, ascending, by sieve of Eratosthenes.
std::vector<std::uint32_t> small_primes(std::size_t count);
/// The first 10,000 primes, computed once.
std::span<const std::uint32_t> trial_primes();

/// composite(p) for the first listed p that divides n with p != n, nullopt
/// otherwise. The divisibility checks run as independent channels.
std::optional<PrimalityVerdict> trial_divide(const Bignum& n, std::span<const std::uint32_t> primes);

/// Miller-Rabin with `rounds` bases drawn uniformly from [2, n-2]. All
/// exponentiation stays inside a Montgomery context for n. Requires n odd,
/// n > 3 and rounds >= 1 (RangeError otherwise).
PrimalityVerdict miller_rabin(const Bignum& n, unsigned rounds, rbg::Drbg& rng);

/// Re-checks a composite verdict's evidence with the reference arithmetic.
bool evidence_holds(const Bignum& n, const PrimalityVerdict& verdict);

struct SearchOptions {
  unsigned rounds = kDefaultRounds;
  /// Candidates examined before ExhaustionError; 0 means 64 * bits.
  std::size_t max_candidates = 0;
};

/// Probable prime with exactly `bits` bits and the top two bits set. Walks
/// upward in steps of 2 from a random odd start, sieving with the first
/// 10,000 primes before Miller-Rabin. Requires bits >= 16.
Bignum generate_prime(std::size_t bits, rbg::Drbg& rng, const SearchOptions& options = {});

}  // namespace rnscrypt::prime
