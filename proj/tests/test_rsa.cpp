#include <doctest.h>

#include <algorithm>
#include <random>

#include "oracle_vectors.hpp"
#include "rnscrypt/errors.hpp"
#include "rnscrypt/prime.hpp"
#include "rnscrypt/rsa.hpp"

using namespace rnscrypt;
using namespace rnscrypt::rsa;

namespace {

rbg::Drbg rng_for(const std::string& hex) { return rbg::Drbg::instantiate(rbg::make_source("seed:" + hex)); }

const KeygenOptions kFixedOk{kDefaultExponent, 16, true};

std::vector<std::uint8_t> bytes_of(std::string_view s) { return {s.begin(), s.end()}; }

std::vector<std::uint8_t> random_message(std::mt19937_64& g, std::size_t n) {
  std::vector<std::uint8_t> m(n);
  for (auto& b : m) b = static_cast<std::uint8_t>(g());
  return m;
}

// One 1024-bit key shared by the tests below.
const RsaKeyPair& key1024() {
  static const RsaKeyPair k = [] {
    auto rng = rng_for("a1");
    return keygen(1024, rng, kFixedOk);
  }();
  return k;
}

}  // namespace

TEST_CASE("toy key from known primes") {
  auto k = RsaKeyPair::from_primes(Bignum{61}, Bignum{53}, 17);
  CHECK(k.n() == Bignum{3233});
  CHECK(k.d() == Bignum{2753});
  CHECK(k.bits() == 12);
  CHECK(k.residency() == Residency::resident);
  CHECK(modexp(Bignum{65}, Bignum{17}, k.n()) == Bignum{2790});
  CHECK(modexp(Bignum{2790}, k.d(), k.n()) == Bignum{65});
  CHECK(export_public(k.public_key()) == R"({"kty":"MR-RSA","bits":12,"n":"0ca1","e":17})");
  CHECK_THROWS_AS(k.public_key().capacity(), FrameError);
  CHECK_THROWS_AS(RsaKeyPair::from_primes(Bignum{61}, Bignum{53}, 4), InvalidExponentError);
  CHECK_THROWS_AS(RsaKeyPair::from_primes(Bignum{61}, Bignum{53}, 3), NotCoprimeError);
  CHECK_THROWS_AS(RsaKeyPair::from_primes(Bignum{61}, Bignum{61}, 17), RangeError);
}

TEST_CASE("framing") {
  const std::vector<std::uint8_t> a{'A'};
  const auto f = frame(a, 128);
  CHECK(f.size() == 128);
  CHECK(Bignum::from_bytes(f) == Bignum::from_hex(oracle::kFrameA1024));
  CHECK(unframe(f) == a);

  CHECK(frame_message({}, 384).size() == 1);
  CHECK(unframe(frame_message({}, 384)[0]).empty());
  CHECK(frame_message(std::vector<std::uint8_t>(1000), 384).size() == 3);
  CHECK(frame_message(std::vector<std::uint8_t>(379), 384).size() == 1);
  CHECK(frame_message(std::vector<std::uint8_t>(380), 384).size() == 2);

  std::mt19937_64 g(1);
  for (std::size_t n : {0, 1, 50, 123}) {
    auto m = random_message(g, n);
    CHECK(unframe(frame(m, 128)) == m);
  }

  auto bad = f;
  bad[0] = 1;
  CHECK_THROWS_AS(unframe(bad), FrameError);
  auto toolong = f;
  toolong[4] = 124;
  CHECK_THROWS_AS(unframe(toolong), FrameError);
  toolong[4] = 123;
  CHECK(unframe(toolong).size() == 123);
  CHECK_THROWS_AS(frame(std::vector<std::uint8_t>(124), 128), FrameError);
}

TEST_CASE("key generation") {
  const auto& k = key1024();
  CHECK(k.bits() == 1024);
  CHECK(k.n().bit_length() == 1024);
  CHECK(mul(k.p(), k.q()) == k.n());
  CHECK(k.p() != k.q());
  const Bignum phi = mul(sub(k.p(), Bignum{1}), sub(k.q(), Bignum{1}));
  CHECK(mod(mul(k.d(), Bignum{k.e()}), phi) == Bignum{1});
  CHECK(gcd(Bignum{k.e()}, phi) == Bignum{1});
  auto rng = rng_for("77");
  CHECK_FALSE(prime::miller_rabin(k.p(), 20, rng).composite());
  CHECK_FALSE(prime::miller_rabin(k.q(), 20, rng).composite());

  auto again = rng_for("a1");
  CHECK(keygen(1024, again, kFixedOk).same_material(k));

  auto r = rng_for("a1");
  CHECK_THROWS_AS(keygen(1024, r), RefusedError);
  CHECK_THROWS_AS(keygen(1024, r, {4, 16, true}), InvalidExponentError);
  CHECK_THROWS_AS(keygen(1023, r, kFixedOk), RangeError);

  auto os = rbg::Drbg::instantiate(rbg::make_source("os"));
  auto small = keygen(256, os, {3, 16, false});
  CHECK(small.bits() == 256);
  CHECK(mod(mul(small.d(), Bignum{3}), mul(sub(small.p(), Bignum{1}), sub(small.q(), Bignum{1}))) ==
        Bignum{1});
}

TEST_CASE("exponent correctness on edge values") {
  const auto& k = key1024();
  std::mt19937_64 g(2);
  auto rng = rng_for("55");
  std::vector<Bignum> ms{Bignum{}, Bignum{1}, sub(k.n(), Bignum{1})};
  for (int i = 0; i < 10; ++i) ms.push_back(rng.uniform_below(k.n()));
  for (const Bignum& m : ms) {
    CHECK(modexp(modexp(m, Bignum{k.e()}, k.n()), k.d(), k.n()) == m);
  }
}

TEST_CASE("encrypt and decrypt round trip") {
  const auto& k = key1024();
  const std::size_t cap = k.public_key().capacity();
  CHECK(cap == 123);
  std::mt19937_64 g(3);
  for (std::size_t n : {std::size_t{0}, std::size_t{1}, cap, cap + 1, std::size_t{10000}}) {
    const auto m = random_message(g, n);
    const auto c = encrypt(m, k.public_key());
    CHECK(c.size() == std::max<std::size_t>(1, (n + cap - 1) / cap));
    CHECK(decrypt(c, k) == m);
  }

  const auto m = bytes_of("attack at dawn");
  const auto c = encrypt(m, k.public_key());
  REQUIRE(c.size() == 1);
  CHECK(c[0] == modexp(Bignum::from_bytes(frame(m, 128)), Bignum{k.e()}, k.n()));
}

TEST_CASE("wrong key or tampering is detected") {
  const auto& k = key1024();
  auto rng = rng_for("b2");
  const auto other = keygen(1024, rng, kFixedOk);
  const auto c = encrypt(bytes_of("hello"), k.public_key());
  CHECK_THROWS_AS(decrypt(c, other), FrameError);

  // A ciphertext whose plaintext has a non-zero guard byte.
  auto f = frame(bytes_of("x"), 128);
  f[0] = 0x01;
  const Bignum m = Bignum::from_bytes(f);
  REQUIRE(m < k.n());
  const std::vector<Bignum> tampered{modexp(m, Bignum{k.e()}, k.n())};
  CHECK_THROWS_AS(decrypt(tampered, k), FrameError);
  const std::vector<Bignum> too_big{k.n()};
  CHECK_THROWS_AS(decrypt(too_big, k), FrameError);
}

TEST_CASE("parallel schedule does not change ciphertext") {
  const auto& k = key1024();
  std::mt19937_64 g(4);
  const auto m = random_message(g, 123 * 16 + 7);
  const auto ref = encrypt_reference(m, k.public_key());
  for (unsigned w : {1u, 2u, exec::hardware_workers()}) {
    CHECK(encrypt(m, k.public_key(), w) == ref);
    CHECK(decrypt(ref, k, w) == m);
  }
  CHECK(decrypt_reference(ref, k) == m);
}

TEST_CASE("key files") {
  RsaKeyPair k = key1024();
  const std::string pub = export_public(k.public_key());
  CHECK(pub.find("\"d\"") == std::string::npos);
  CHECK(pub.find("\"p\"") == std::string::npos);
  CHECK(pub.find("\"q\"") == std::string::npos);
  CHECK(pub.find('\n') == std::string::npos);
  CHECK(parse_public(pub) == k.public_key());

  CHECK_THROWS_AS(export_private(k, false), RefusedError);
  CHECK(k.residency() == Residency::resident);
  const std::string priv = export_private(k, true);
  CHECK(k.residency() == Residency::exported);
  const RsaKeyPair back = parse_private(priv);
  CHECK(back.same_material(k));
  CHECK(back.residency() == Residency::exported);

  const auto msg = bytes_of("round trip through an exported key");
  CHECK(decrypt(encrypt(msg, parse_public(pub)), back) == msg);

  CHECK_THROWS_AS(parse_public("not json"), KeyFormatError);
  CHECK_THROWS_AS(parse_public(R"({"kty":"RSA","bits":12,"n":"0ca1","e":17})"), KeyFormatError);
  CHECK_THROWS_AS(parse_public(R"({"kty":"MR-RSA","bits":13,"n":"0ca1","e":17})"), KeyFormatError);
  CHECK_THROWS_AS(parse_public(R"({"kty":"MR-RSA","bits":12,"n":"zz","e":17})"), KeyFormatError);
  CHECK_THROWS_AS(parse_private(pub), KeyFormatError);
  CHECK(parse_public(R"({"kty":"MR-RSA","bits":12,"n":"0ca1","e":17})").n == Bignum{3233});
}

TEST_CASE("ciphertext file layout") {
  const std::vector<Bignum> blocks{Bignum{1}, Bignum{0x0102}};
  const auto data = encode_ciphertext(blocks, 3);
  CHECK(data == std::vector<std::uint8_t>{0, 0, 0, 2, 0, 0, 1, 0, 1, 2});
  CHECK(decode_ciphertext(data, 3) == blocks);
  CHECK_THROWS_AS(decode_ciphertext(std::vector<std::uint8_t>(data.begin(), data.end() - 1), 3),
                  FrameError);
  CHECK_THROWS_AS(decode_ciphertext(std::vector<std::uint8_t>{0, 0}, 3), FrameError);
  CHECK(decode_ciphertext(encode_ciphertext({}, 128), 128).empty());
}
