#include "rnscrypt/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <optional>

#include "rnscrypt/errors.hpp"
#include "rnscrypt/mont.hpp"
#include "rnscrypt/rbg.hpp"
#include "rnscrypt/rsa.hpp"

namespace rnscrypt::bench {

Op parse_op(std::string_view name) {
  if (name == "modmul") return Op::modmul;
  if (name == "modexp") return Op::modexp;
  if (name == "keygen") return Op::keygen;
  if (name == "rand") return Op::rand;
  throw ParseError("unknown benchmark op '" + std::string(name) + "'");
}

std::string op_name(Op op) {
  switch (op) {
    case Op::modmul: return "modmul";
    case Op::modexp: return "modexp";
    case Op::keygen: return "keygen";
    case Op::rand: return "rand";
  }
  return "?";
}

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

std::uint64_t digest(const Bignum& x) {
  std::uint64_t h = 0;
  for (auto w : x.words()) h = mix(h, w);
  return h;
}

std::uint64_t digest(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0;
  for (auto b : bytes) h = mix(h, b);
  return h;
}

std::string seed_spec(std::uint64_t seed) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "seed:%016llx", static_cast<unsigned long long>(seed));
  return buf;
}

// Runs `job` once per block index, in parallel or serially, returning the
// per-block digests in block order.
std::vector<std::uint64_t> dispatch(const BenchConfig& c, std::size_t blocks,
                                    const std::function<std::uint64_t(std::size_t)>& job) {
  std::vector<std::size_t> ids(blocks);
  for (std::size_t i = 0; i < blocks; ++i) ids[i] = i;
  const std::span<const std::size_t> span(ids);
  if (c.mode == Mode::serial) return exec::serial::run_blocks(job, span);
  return exec::run_blocks(job, span, c.workers);
}

}  // namespace

std::vector<BenchRecord> run(const BenchConfig& c) {
  if (c.block_counts.empty()) throw RangeError("no block counts given");
  if (c.repeat == 0) throw RangeError("repeat must be at least 1");
  if (c.workers == 0) throw RangeError("workers must be at least 1");
  if (c.bits < 16) throw RangeError("bits must be at least 16");
  for (std::size_t b : c.block_counts) {
    if (b == 0) throw RangeError("block counts must be positive");
  }

  auto source = rbg::make_source(seed_spec(c.seed));
  rbg::Drbg root = rbg::Drbg::instantiate(source);

  // Inputs shared by every run: one modulus, operands and exponent.
  std::optional<MontContext> ctx;
  std::vector<MontInt> operands;
  Bignum exponent;
  Bignum modexp_base;
  if (c.op == Op::modmul || c.op == Op::modexp) {
    Bignum n = add(root.random_bits(c.bits - 1), Bignum::power_of_two(c.bits - 1));
    if (!n.is_odd()) n = add(n, Bignum{1});
    const std::size_t channels = c.channels != 0 ? c.channels : MontContext::channels_for(c.bits);
    ctx.emplace(n, channels);
    for (int i = 0; i < 2; ++i) operands.push_back(ctx->to_mont(root.uniform_below(n)));
    exponent = root.random_bits(c.bits);
    modexp_base = root.uniform_below(n);
  }
  if (c.op == Op::keygen && c.bits % 2 != 0) throw RangeError("keygen needs an even bit size");

  std::size_t reps = 1;
  std::function<std::uint64_t(std::size_t)> job;
  switch (c.op) {
    case Op::modmul:
      reps = c.products_per_block;
      job = [&](std::size_t id) {
        MontInt acc = operands[id % 2];
        for (std::size_t k = 0; k < reps; ++k) acc = ctx->mont_mul(acc, operands[(id + k) % 2]);
        return digest(ctx->value(acc));
      };
      break;
    case Op::modexp:
      job = [&](std::size_t) { return digest(ctx->mont_exp(modexp_base, exponent)); };
      break;
    case Op::keygen:
      job = [&](std::size_t id) {
        rbg::Drbg rng = rbg::Drbg::instantiate(rbg::make_source(seed_spec(c.seed * 1000003 + id)));
        const auto k = rsa::keygen(c.bits, rng, {rsa::kDefaultExponent, 64, true});
        return digest(k.n());
      };
      break;
    case Op::rand:
      job = [&](std::size_t id) {
        rbg::Drbg rng = rbg::Drbg::instantiate(rbg::make_source(seed_spec(c.seed * 7919 + id)));
        return digest(rng.generate(c.rand_block_bytes));
      };
      break;
  }

  std::vector<BenchRecord> out;
  for (std::size_t blocks : c.block_counts) {
    std::vector<double> times;
    std::uint64_t checksum = 0;
    for (unsigned r = 0; r <= c.repeat; ++r) {
      const auto t0 = Clock::now();
      const auto digests = dispatch(c, blocks, job);
      const auto t1 = Clock::now();
      if (r == 0) continue;  // warm-up
      times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
      checksum = 0;
      for (auto d : digests) checksum = mix(checksum, d);
    }
    std::nth_element(times.begin(), times.begin() + static_cast<std::ptrdiff_t>(times.size() / 2),
                     times.end());
    double median = times[times.size() / 2];
    if (times.size() % 2 == 0) {
      median = (median + *std::max_element(times.begin(),
                                           times.begin() + static_cast<std::ptrdiff_t>(times.size() / 2))) /
               2;
    }
    median = std::max(median, 1e-6);

    BenchRecord rec;
    rec.op = c.op;
    rec.bits = c.bits;
    rec.block_count = blocks;
    rec.workers = c.mode == Mode::serial ? 1 : c.workers;
    rec.wall_time_ms = median;
    rec.repetitions = c.op == Op::rand ? c.rand_block_bytes : reps;
    rec.throughput = c.op == Op::rand
                         ? static_cast<double>(blocks * c.rand_block_bytes) / (median / 1000.0)
                         : static_cast<double>(reps * blocks) / median;
    rec.checksum = checksum;
    out.push_back(rec);
  }
  return out;
}

std::string to_csv(const BenchRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%u,%.6g,%.6g", op_name(r.op).c_str(), r.bits, r.block_count,
                r.workers, r.throughput, r.wall_time_ms);
  return buf;
}

}  // namespace rnscrypt::bench
