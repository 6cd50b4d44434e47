#include "rnscrypt/rsa.hpp"

#include <json.hpp>

#include "rnscrypt/errors.hpp"
#include "rnscrypt/modops.hpp"
#include "rnscrypt/mont.hpp"
#include "rnscrypt/prime.hpp"

namespace rnscrypt::rsa {

namespace {

using Json = nlohmann::ordered_json;

void check_exponent(std::uint64_t e) {
  if (e < 3 || e % 2 == 0) throw InvalidExponentError("public exponent must be odd and at least 3");
}

Bignum abs_diff(const Bignum& a, const Bignum& b) { return a < b ? sub(b, a) : sub(a, b); }

std::string even_hex(const Bignum& x) {
  std::string h = x.to_hex();
  return h.size() % 2 != 0 ? "0" + h : h;
}

Bignum read_hex(const Json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_string()) {
    throw KeyFormatError(std::string("key file lacks hex field '") + field + "'");
  }
  try {
    return Bignum::from_hex(j[field].get<std::string>());
  } catch (const ParseError&) {
    throw KeyFormatError(std::string("field '") + field + "' is not hex");
  }
}

Json parse_json(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw KeyFormatError(std::string("key file is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("kty", "") != "MR-RSA") throw KeyFormatError("key type must be MR-RSA");
  return j;
}

PublicKey public_from_json(const Json& j) {
  PublicKey k;
  k.n = read_hex(j, "n");
  if (!j.contains("e") || !j["e"].is_number_unsigned()) throw KeyFormatError("key file lacks numeric 'e'");
  if (!j.contains("bits") || !j["bits"].is_number_unsigned()) {
    throw KeyFormatError("key file lacks numeric 'bits'");
  }
  k.e = j["e"].get<std::uint64_t>();
  k.bits = j["bits"].get<std::size_t>();
  if (k.n.bit_length() != k.bits) throw KeyFormatError("'bits' does not match the modulus");
  if (!k.n.is_odd()) throw KeyFormatError("modulus must be odd");
  try {
    check_exponent(k.e);
  } catch (const InvalidExponentError& e) {
    throw KeyFormatError(e.what());
  }
  return k;
}

Json public_json(const PublicKey& k) {
  Json j;
  j["kty"] = "MR-RSA";
  j["bits"] = k.bits;
  j["n"] = even_hex(k.n);
  j["e"] = k.e;
  return j;
}

template <class Runner>
std::vector<Bignum> encrypt_with(std::span<const std::uint8_t> message, const PublicKey& key,
                                 Runner&& run) {
  const auto frames = frame_message(message, key.key_bytes());
  const MontContext ctx = MontContext::for_modulus(key.n);
  const Bignum e{key.e};
  return run(
      [&](const std::vector<std::uint8_t>& f) { return ctx.mont_exp(Bignum::from_bytes(f), e); },
      std::span<const std::vector<std::uint8_t>>(frames));
}

template <class Runner>
std::vector<std::uint8_t> decrypt_with(std::span<const Bignum> blocks, const RsaKeyPair& key,
                                       Runner&& run) {
  if (key.d().is_zero()) throw RefusedError("key has no private part");
  for (const Bignum& c : blocks) {
    if (c >= key.n()) throw FrameError("ciphertext block is not below the modulus");
  }
  const std::size_t width = key.public_key().key_bytes();
  const MontContext ctx = MontContext::for_modulus(key.n());
  const auto frames =
      run([&](const Bignum& c) { return ctx.mont_exp(c, key.d()).to_bytes(width); }, blocks);
  std::vector<std::uint8_t> out;
  for (const auto& f : frames) {
    const auto payload = unframe(f);
    out.insert(out.end(), payload.begin(), payload.end());
  }
  return out;
}

}  // namespace

std::size_t PublicKey::capacity() const {
  if (key_bytes() <= kFrameOverhead) throw FrameError("key too small to hold a frame");
  return key_bytes() - kFrameOverhead;
}

RsaKeyPair RsaKeyPair::from_primes(const Bignum& p, const Bignum& q, std::uint64_t e) {
  check_exponent(e);
  if (p == q) throw RangeError("p and q must differ");
  if (p <= Bignum{2} || q <= Bignum{2}) throw RangeError("p and q must be odd primes");
  RsaKeyPair k;
  k.p_ = p;
  k.q_ = q;
  k.public_.n = mul(p, q);
  k.public_.e = e;
  k.public_.bits = k.public_.n.bit_length();
  const Bignum phi = mul(sub(p, Bignum{1}), sub(q, Bignum{1}));
  k.d_ = arazi_inverse(e, phi);
  return k;
}

RsaKeyPair keygen(std::size_t bits, rbg::Drbg& rng, const KeygenOptions& options) {
  check_exponent(options.e);
  if (bits < 64 || bits % 2 != 0) throw RangeError("key size must be even and at least 64 bits");
  if (rng.source().test_only() && !options.allow_fixed_source) {
    throw RefusedError("refusing to generate a key from a fixed test seed");
  }
  const std::size_t half = bits / 2;
  const prime::SearchOptions search{options.rounds, 0};
  const Bignum e{options.e};
  auto usable = [&](const Bignum& x) { return gcd(e, sub(x, Bignum{1})) == Bignum{1}; };

  Bignum p;
  do {
    p = prime::generate_prime(half, rng, search);
  } while (!usable(p));

  const Bignum min_gap = half > 100 ? Bignum::power_of_two(half - 100) : Bignum{0};
  Bignum q;
  do {
    q = prime::generate_prime(half, rng, search);
  } while (!usable(q) || abs_diff(p, q) <= min_gap);

  RsaKeyPair k = RsaKeyPair::from_primes(p, q, options.e);
  if (k.bits() != bits) throw Error("generated modulus has the wrong size");
  return k;
}

std::vector<std::uint8_t> frame(std::span<const std::uint8_t> payload, std::size_t key_bytes) {
  if (key_bytes <= kFrameOverhead) throw FrameError("key too small to hold a frame");
  if (payload.size() > key_bytes - kFrameOverhead) throw FrameError("payload exceeds frame capacity");
  std::vector<std::uint8_t> out(key_bytes, 0);
  const auto len = static_cast<std::uint32_t>(payload.size());
  for (int i = 0; i < 4; ++i) out[1 + i] = static_cast<std::uint8_t>(len >> (8 * (3 - i)));
  std::copy(payload.begin(), payload.end(), out.begin() + kFrameOverhead);
  return out;
}

std::vector<std::uint8_t> unframe(std::span<const std::uint8_t> block) {
  if (block.size() <= kFrameOverhead) throw FrameError("frame too short");
  if (block[0] != 0) throw FrameError("frame guard byte is not zero");
  std::uint32_t len = 0;
  for (int i = 1; i <= 4; ++i) len = (len << 8) | block[i];
  if (len > block.size() - kFrameOverhead) throw FrameError("frame length exceeds capacity");
  return {block.begin() + kFrameOverhead, block.begin() + kFrameOverhead + len};
}

std::vector<std::vector<std::uint8_t>> frame_message(std::span<const std::uint8_t> message,
                                                     std::size_t key_bytes) {
  if (key_bytes <= kFrameOverhead) throw FrameError("key too small to hold a frame");
  const std::size_t cap = key_bytes - kFrameOverhead;
  std::vector<std::vector<std::uint8_t>> out;
  std::size_t pos = 0;
  do {
    const std::size_t take = std::min(cap, message.size() - pos);
    out.push_back(frame(message.subspan(pos, take), key_bytes));
    pos += take;
  } while (pos < message.size());
  return out;
}

std::vector<Bignum> encrypt(std::span<const std::uint8_t> message, const PublicKey& key,
                            unsigned workers) {
  return encrypt_with(message, key, [workers](auto&& job, auto blocks) {
    return exec::run_blocks(job, blocks, workers);
  });
}

std::vector<std::uint8_t> decrypt(std::span<const Bignum> blocks, const RsaKeyPair& key,
                                  unsigned workers) {
  return decrypt_with(blocks, key, [workers](auto&& job, auto b) {
    return exec::run_blocks(job, b, workers);
  });
}

std::vector<Bignum> encrypt_reference(std::span<const std::uint8_t> message, const PublicKey& key) {
  return encrypt_with(message, key,
                      [](auto&& job, auto blocks) { return exec::serial::run_blocks(job, blocks); });
}

std::vector<std::uint8_t> decrypt_reference(std::span<const Bignum> blocks, const RsaKeyPair& key) {
  return decrypt_with(blocks, key, [](auto&& job, auto b) { return exec::serial::run_blocks(job, b); });
}

std::string export_public(const PublicKey& key) { return public_json(key).dump(); }

std::string export_private(RsaKeyPair& key, bool confirm) {
  if (!confirm) throw RefusedError("private key export needs explicit confirmation");
  Json j = public_json(key.public_);
  j["d"] = even_hex(key.d_);
  j["p"] = even_hex(key.p_);
  j["q"] = even_hex(key.q_);
  key.residency_ = Residency::exported;
  return j.dump();
}

PublicKey parse_public(std::string_view text) { return public_from_json(parse_json(text)); }

RsaKeyPair parse_private(std::string_view text) {
  const Json j = parse_json(text);
  RsaKeyPair k;
  k.public_ = public_from_json(j);
  k.d_ = read_hex(j, "d");
  k.p_ = read_hex(j, "p");
  k.q_ = read_hex(j, "q");
  if (mul(k.p_, k.q_) != k.public_.n) throw KeyFormatError("p * q does not match n");
  if (k.d_.is_zero() || k.d_ >= k.public_.n) throw KeyFormatError("private exponent out of range");
  k.residency_ = Residency::exported;
  return k;
}

std::vector<std::uint8_t> encode_ciphertext(std::span<const Bignum> blocks, std::size_t key_bytes) {
  if (blocks.size() > 0xFFFFFFFFu) throw RangeError("too many blocks for the ciphertext header");
  const auto count = static_cast<std::uint32_t>(blocks.size());
  std::vector<std::uint8_t> out{static_cast<std::uint8_t>(count >> 24), static_cast<std::uint8_t>(count >> 16),
                                static_cast<std::uint8_t>(count >> 8), static_cast<std::uint8_t>(count)};
  out.reserve(4 + blocks.size() * key_bytes);
  for (const Bignum& c : blocks) {
    const auto bytes = c.to_bytes(key_bytes);
    out.insert(out.end(), bytes.begin(), bytes.end());
  }
  return out;
}

std::vector<Bignum> decode_ciphertext(std::span<const std::uint8_t> data, std::size_t key_bytes) {
  if (data.size() < 4) throw FrameError("ciphertext lacks its block count");
  const std::uint64_t count = (std::uint64_t{data[0]} << 24) | (std::uint64_t{data[1]} << 16) |
                              (std::uint64_t{data[2]} << 8) | data[3];
  if (data.size() - 4 != count * key_bytes) {
    throw FrameError("ciphertext size does not match its block count");
  }
  std::vector<Bignum> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    out.push_back(Bignum::from_bytes(data.subspan(4 + i * key_bytes, key_bytes)));
  }
  return out;
}

}  // namespace rnscrypt::rsa
