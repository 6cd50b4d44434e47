#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <algorithm>
#include <cstring>

#include "rnscrypt/errors.hpp"
#include "rnscrypt/rbg.hpp"

namespace rnscrypt::rbg {

namespace {

using Block = std::array<std::uint8_t, 32>;

// HMAC-SHA-256 over the concatenation of `parts`.
Block hmac(const Block& key, std::initializer_list<std::span<const std::uint8_t>> parts) {
  std::vector<std::uint8_t> msg;
  for (auto p : parts) msg.insert(msg.end(), p.begin(), p.end());
  Block out{};
  unsigned len = 0;
  if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), msg.data(), msg.size(),
           out.data(), &len) == nullptr ||
      len != out.size()) {
    throw Error("HMAC-SHA-256 failed");
  }
  return out;
}

void put_be64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

constexpr std::uint8_t kZero[1] = {0x00};
constexpr std::uint8_t kOne[1] = {0x01};
constexpr std::size_t kEntropyBytes = 32;
constexpr std::size_t kNonceBytes = 16;

}  // namespace

void Drbg::update(std::span<const std::uint8_t> data) {
  key_ = hmac(key_, {v_, kZero, data});
  v_ = hmac(key_, {v_});
  if (data.empty()) return;
  key_ = hmac(key_, {v_, kOne, data});
  v_ = hmac(key_, {v_});
}

void Drbg::seed(std::span<const std::uint8_t> material) {
  key_.fill(0x00);
  v_.fill(0x01);
  update(material);
  reseed_counter_ = 1;
}

Drbg Drbg::instantiate(std::shared_ptr<EntropySource> source,
                       std::span<const std::uint8_t> personalization,
                       std::uint64_t reseed_interval) {
  if (!source) throw SourceFailureError("no entropy source");
  if (reseed_interval == 0) throw RangeError("reseed interval must be positive");
  source->startup_test();

  std::vector<std::uint8_t> material(kEntropyBytes + kNonceBytes);
  const FillResult got = source->fill(material);
  if (got.bytes != material.size()) {
    throw SourceFailureError("entropy source delivered " + std::to_string(got.bytes) + " of " +
                             std::to_string(material.size()) + " bytes");
  }
  if (!got.healthy) throw InsufficientEntropyError("entropy source failed its repetition test");
  material.insert(material.end(), personalization.begin(), personalization.end());

  Drbg d;
  d.source_ = std::move(source);
  d.reseed_interval_ = reseed_interval;
  d.seed(material);
  return d;
}

void Drbg::reseed(std::span<const std::uint8_t> additional) {
  std::vector<std::uint8_t> material(kEntropyBytes);
  FillResult got;
  try {
    got = source_->fill(material);
  } catch (const std::exception& e) {
    throw ReseedFailureError(std::string("entropy source failed: ") + e.what());
  }
  if (got.bytes != material.size() || !got.healthy) {
    throw ReseedFailureError("entropy source could not supply reseed material");
  }
  material.insert(material.end(), additional.begin(), additional.end());
  update(material);
  reseed_counter_ = 1;
}

void Drbg::generate_block(std::span<std::uint8_t> out) {
  if (reseed_counter_ > reseed_interval_) reseed();
  std::size_t done = 0;
  while (done < out.size()) {
    v_ = hmac(key_, {v_});
    const std::size_t take = std::min(v_.size(), out.size() - done);
    std::memcpy(out.data() + done, v_.data(), take);
    done += take;
  }
  update({});
  ++reseed_counter_;
}

void Drbg::generate_into(std::span<std::uint8_t> out) {
  if (out.empty()) {
    generate_block(out);
    return;
  }
  for (std::size_t pos = 0; pos < out.size(); pos += kMaxRequest) {
    generate_block(out.subspan(pos, std::min(kMaxRequest, out.size() - pos)));
  }
}

std::vector<std::uint8_t> Drbg::generate(std::size_t nbytes) {
  std::vector<std::uint8_t> out(nbytes);
  generate_into(out);
  return out;
}

Drbg Drbg::split() {
  std::vector<std::uint8_t> material = generate(kEntropyBytes + kNonceBytes);
  static constexpr char kLabel[] = "rnscrypt/drbg-split";
  material.insert(material.end(), kLabel, kLabel + sizeof(kLabel) - 1);
  put_be64(material, stream_id_);
  put_be64(material, ++children_);

  Drbg child;
  child.source_ = source_;
  child.reseed_interval_ = reseed_interval_;
  child.seed(material);
  for (int i = 0; i < 8; ++i) child.stream_id_ = (child.stream_id_ << 8) | material[i];
  return child;
}

Bignum Drbg::random_bits(std::size_t bits) {
  if (bits == 0) return Bignum{};
  std::vector<std::uint8_t> bytes = generate((bits + 7) / 8);
  if (bits % 8 != 0) bytes[0] &= static_cast<std::uint8_t>((1U << (bits % 8)) - 1);
  return Bignum::from_bytes(bytes);
}

Bignum Drbg::uniform_below(const Bignum& bound) {
  if (bound.is_zero()) throw RangeError("empty range");
  const std::size_t bits = bound.bit_length();
  for (;;) {
    Bignum x = random_bits(bits);
    if (x < bound) return x;
  }
}

std::uint64_t Drbg::uniform_u64(std::uint64_t bound) {
  return uniform_below(Bignum{bound}).to_u64();
}

}  // namespace rnscrypt::rbg
