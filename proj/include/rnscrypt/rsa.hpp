#pragma once

// Textbook RSA over the RNS Montgomery arithmetic. Messages are cut into
// key-sized frames
//
//     0x00 | L (4 bytes, big-endian) | L payload bytes | zero fill
//
// so every frame is below n. There is no randomized padding: equal
// plaintexts give equal ciphertexts, and this is not semantically secure.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rnscrypt/bignum.hpp"
#include "rnscrypt/exec.hpp"
#include "rnscrypt/rbg.hpp"

namespace rnscrypt::rsa {

inline constexpr std::uint64_t kDefaultExponent = 65537;
inline constexpr std::size_t kFrameOverhead = 5;

enum class Residency { resident, exported };

struct PublicKey {
  Bignum n;
  std::uint64_t e = kDefaultExponent;
  std::size_t bits = 0;

  std::size_t key_bytes() const noexcept { return (bits + 7) / 8; }
  /// Payload bytes per frame. Throws FrameError for keys too small to frame.
  std::size_t capacity() const;
  friend bool operator==(const PublicKey&, const PublicKey&) = default;
};

/// Private material stays in this object. It leaves the process only
/// through export_private with explicit confirmation.
class RsaKeyPair {
 public:
  const PublicKey& public_key() const noexcept { return public_; }
  const Bignum& n() const noexcept { return public_.n; }
  std::uint64_t e() const noexcept { return public_.e; }
  std::size_t bits() const noexcept { return public_.bits; }
  const Bignum& d() const noexcept { return d_; }
  const Bignum& p() const noexcept { return p_; }
  const Bignum& q() const noexcept { return q_; }
  Residency residency() const noexcept { return residency_; }

  /// Builds a pair from known primes; d = e^-1 mod (p-1)(q-1).
  /// Throws InvalidExponentError and NotCoprimeError.
  static RsaKeyPair from_primes(const Bignum& p, const Bignum& q, std::uint64_t e);

  bool same_material(const RsaKeyPair& other) const noexcept {
    return public_ == other.public_ && d_ == other.d_ && p_ == other.p_ && q_ == other.q_;
  }

 private:
  friend std::string export_private(RsaKeyPair& key, bool confirm);
  friend RsaKeyPair parse_private(std::string_view text);

  PublicKey public_;
  Bignum d_, p_, q_;
  Residency residency_ = Residency::resident;
};

struct KeygenOptions {
  std::uint64_t e = kDefaultExponent;
  unsigned rounds = 64;
  /// Permit a test-only fixed-seed source.
  bool allow_fixed_source = false;
};

/// p and q of bits/2 bits each (top two bits set, so n has exactly `bits`
/// bits). p is redrawn while gcd(e, p-1) != 1; q is redrawn on the same
/// condition or when |p - q| <= 2^(bits/2 - 100). bits must be even and at
/// least 64. Throws InvalidExponentError, RefusedError, ExhaustionError.
RsaKeyPair keygen(std::size_t bits, rbg::Drbg& rng, const KeygenOptions& options = {});

std::vector<std::uint8_t> frame(std::span<const std::uint8_t> payload, std::size_t key_bytes);
/// Throws FrameError on a non-zero guard byte or a length beyond capacity.
std::vector<std::uint8_t> unframe(std::span<const std::uint8_t> block);
/// One frame per `capacity` bytes; an empty message still yields one frame.
std::vector<std::vector<std::uint8_t>> frame_message(std::span<const std::uint8_t> message,
                                                     std::size_t key_bytes);

/// All frames go to the executor in one pass; output order is input order.
std::vector<Bignum> encrypt(std::span<const std::uint8_t> message, const PublicKey& key,
                            unsigned workers = exec::hardware_workers());
std::vector<std::uint8_t> decrypt(std::span<const Bignum> blocks, const RsaKeyPair& key,
                                  unsigned workers = exec::hardware_workers());
/// Serial reference paths, same results.
std::vector<Bignum> encrypt_reference(std::span<const std::uint8_t> message, const PublicKey& key);
std::vector<std::uint8_t> decrypt_reference(std::span<const Bignum> blocks, const RsaKeyPair& key);

/// Single-line JSON: {"kty":"MR-RSA","bits":..,"n":"<hex>","e":..}.
std::string export_public(const PublicKey& key);
/// Adds d, p and q. Throws RefusedError unless `confirm`; marks the key exported.
std::string export_private(RsaKeyPair& key, bool confirm);
/// Throws KeyFormatError.
PublicKey parse_public(std::string_view text);
RsaKeyPair parse_private(std::string_view text);

/// 4-byte big-endian block count, then each block as key_bytes big-endian bytes.
std::vector<std::uint8_t> encode_ciphertext(std::span<const Bignum> blocks, std::size_t key_bytes);
/// Throws FrameError on a truncated or oversized file.
std::vector<Bignum> decode_ciphertext(std::span<const std::uint8_t> data, std::size_t key_bytes);

}  // namespace rnscrypt::rsa
