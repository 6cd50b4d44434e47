#include <doctest.h>

#include <random>

#include "oracle_vectors.hpp"
#include "rnscrypt/errors.hpp"
#include "rnscrypt/mont.hpp"
#include "test_support.hpp"

using namespace rnscrypt;
using namespace testing_support;

namespace {

MontContext toy_context(ExtensionMethod back = ExtensionMethod::crt_extra) {
  return MontContext(Bignum{11}, RnsBase::from_moduli({3, 5, 7}), RnsBase::from_moduli({13, 17, 19}),
                     back);
}

}  // namespace

TEST_CASE("toy context") {
  for (auto back : {ExtensionMethod::crt_extra, ExtensionMethod::mrs}) {
    auto ctx = toy_context(back);
    CHECK(ctx.main_base()->product() == Bignum{105});
    CHECK(ctx.aux_base()->product() == Bignum{4199});

    CHECK(mod(ctx.value(ctx.to_mont(Bignum{1})), Bignum{11}) == Bignum{6});
    CHECK(mod(ctx.value(ctx.one()), Bignum{11}) == Bignum{6});
    CHECK(ctx.value(ctx.to_mont(Bignum{})).is_zero());

    // Raw operands, no domain entry: 4*5*105^-1 mod 11.
    auto raw = ctx.mont_mul(ctx.lift(Bignum{4}), ctx.lift(Bignum{5}));
    CHECK(mod(ctx.value(raw), Bignum{11}) == Bignum{7});
    CHECK(ctx.value(raw) < Bignum{22});

    auto one = ctx.to_mont(Bignum{1});
    CHECK(mod(ctx.value(ctx.mont_mul(one, one)), Bignum{11}) == Bignum{6});
    CHECK(ctx.from_mont(ctx.mont_mul(one, ctx.to_mont(Bignum{}))).is_zero());

    for (std::uint64_t x = 0; x < 11; ++x) {
      auto z = ctx.to_mont(Bignum{x});
      CHECK(ctx.from_mont(z) == Bignum{x});
      CHECK(ctx.value(z) == ctx.aux_value(z));
      for (std::uint64_t y = 0; y < 11; ++y) {
        CHECK(ctx.from_mont(ctx.mont_mul(z, ctx.to_mont(Bignum{y}))) == Bignum{x * y % 11});
      }
    }
    CHECK(ctx.mont_exp(Bignum{2}, Bignum{10}) == Bignum{1});
    CHECK(ctx.mont_exp(Bignum{7}, Bignum{}) == Bignum{1});
    CHECK(ctx.mont_exp(Bignum{7}, Bignum{1}) == Bignum{7});
  }
}

TEST_CASE("context preconditions") {
  auto b8 = RnsBase::generate(4, 8, 0);
  auto a8 = RnsBase::generate(4, 8, 4);
  CHECK_THROWS_AS(MontContext(Bignum{251}, b8, a8), NotCoprimeError);
  try {
    MontContext(Bignum{251 * 3}, b8, a8);
    FAIL("expected NotCoprimeError");
  } catch (const NotCoprimeError& e) {
    CHECK(e.factor() == 251);
  }
  CHECK_THROWS_AS(MontContext(Bignum{100}, b8, a8), EvenModulusError);
  CHECK_THROWS_AS(MontContext(Bignum{1}, b8, a8), RangeError);
  CHECK_THROWS_AS(MontContext(Bignum{21}, RnsBase::from_moduli({3, 5, 7}),
                              RnsBase::from_moduli({13, 17, 19})),
                  NotCoprimeError);
  CHECK_THROWS_AS(MontContext(Bignum{29}, RnsBase::from_moduli({3, 5, 7}),
                              RnsBase::from_moduli({13, 17, 19})),
                  CapacityError);

  std::mt19937_64 rng(1);
  CHECK_NOTHROW(MontContext(random_odd_exact_bits(rng, 3072), 128, 32));
  CHECK_NOTHROW(MontContext(random_odd_exact_bits(rng, 3968), 128, 32));
  CHECK_THROWS_AS(MontContext(random_odd_exact_bits(rng, 3969), 128, 32), CapacityError);

  CHECK(MontContext::channels_for(3072) == 100);
  CHECK(MontContext::channels_for(1536) == 50);
  CHECK(MontContext::channels_for(3966) == 128);

  auto ctx = toy_context();
  CHECK_THROWS_AS(ctx.to_mont(Bignum{11}), RangeError);
  auto other = toy_context();
  CHECK_THROWS_AS(ctx.mont_mul(ctx.one(), other.one()), ContextMismatchError);
  CHECK_THROWS_AS(ctx.from_mont(MontInt{}), ContextMismatchError);
}

TEST_CASE("random moduli against the reference arithmetic") {
  std::mt19937_64 rng(2);
  for (std::size_t bits : {64, 521, 1024, 2048}) {
    for (auto back : {ExtensionMethod::crt_extra, ExtensionMethod::mrs}) {
      Bignum n = random_odd_exact_bits(rng, bits);
      MontContext ctx(n, MontContext::channels_for(bits), 32, back);
      for (int i = 0; i < 40; ++i) {
        Bignum a = random_below(rng, n), b = random_below(rng, n);
        auto za = ctx.to_mont(a), zb = ctx.to_mont(b);
        CHECK(ctx.from_mont(za) == a);
        auto p = ctx.mont_mul(za, zb);
        CHECK(ctx.value(p) < mul(n, Bignum{2}));
        CHECK(ctx.value(p) == ctx.aux_value(p));
        CHECK(ctx.from_mont(p) == mod(mul(a, b), n));
      }
      Bignum x = random_below(rng, n), k = random_below_bits(rng, bits);
      CHECK(ctx.mont_exp(x, k) == modexp(x, k, n));
    }
  }
}

TEST_CASE("other word sizes") {
  std::mt19937_64 rng(3);
  for (unsigned w : {16u, 64u}) {
    Bignum n = random_odd_exact_bits(rng, 700);
    MontContext ctx(n, MontContext::channels_for(700, w), w);
    for (int i = 0; i < 20; ++i) {
      Bignum a = random_below(rng, n), b = random_below(rng, n);
      CHECK(ctx.from_mont(ctx.mont_mul(ctx.to_mont(a), ctx.to_mont(b))) == mod(mul(a, b), n));
    }
  }
}

TEST_CASE("reference exponentiation vectors") {
  for (const auto& v : oracle::kModexp) {
    const Bignum n = Bignum::from_hex(v.n);
    auto ctx = MontContext::for_modulus(n);
    CHECK(ctx.mont_exp(Bignum::from_hex(v.x), Bignum::from_hex(v.k)) == Bignum::from_hex(v.result));
  }
  auto toy_rsa = MontContext::for_modulus(Bignum{3233});
  CHECK(toy_rsa.mont_exp(Bignum{65}, Bignum{17}) == Bignum{2790});
  CHECK(toy_rsa.mont_exp(Bignum{2790}, Bignum{2753}) == Bignum{65});
}

TEST_CASE("channel-parallel product matches the fused kernel") {
  std::mt19937_64 rng(4);
  for (auto back : {ExtensionMethod::crt_extra, ExtensionMethod::mrs}) {
    Bignum n = random_odd_exact_bits(rng, 3072);
    MontContext ctx(n, 128, 32, back);
    auto za = ctx.to_mont(random_below(rng, n)), zb = ctx.to_mont(random_below(rng, n));
    auto fused = ctx.mont_mul(za, zb);
    for (unsigned workers : {1u, 2u, exec::hardware_workers()}) {
      exec::ParallelPlan plan;
      plan.workers = workers;
      auto split = ctx.mont_mul_channels(za, zb, plan);
      CHECK(std::ranges::equal(split.main_residues(), fused.main_residues()));
      CHECK(std::ranges::equal(split.aux_residues(), fused.aux_residues()));
    }
  }
}

TEST_CASE("RNS input to the domain") {
  auto ctx = toy_context();
  auto r = to_rns(Bignum{9}, ctx.main_base());
  CHECK(ctx.from_mont(ctx.to_mont(r)) == Bignum{9});
  CHECK_THROWS_AS(ctx.to_mont(to_rns(Bignum{9}, RnsBase::from_moduli({11, 13}))), BaseMismatchError);
}
