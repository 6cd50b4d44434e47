#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rnscrypt/bignum.hpp"

namespace rnscrypt::rbg {

struct FillResult {
  std::size_t bytes = 0;
  bool healthy = true;  ///< false once the continuous repetition test tripped
};

/// Continuous repetition-count test with cutoff 1 + ceil(20 / H) for an
/// assessed H = 1 bit per byte, i.e. 21 identical bytes in a row.
inline constexpr std::size_t kRepetitionCutoff = 21;
/// Adaptive-proportion test: within a 512-sample window the first sample's
/// value may occur at most 310 times (binomial 1 - 2^-20 quantile at p = 1/2).
inline constexpr std::size_t kProportionWindow = 512;
inline constexpr std::size_t kProportionCutoff = 311;
/// Samples inspected by the startup test.
inline constexpr std::size_t kStartupSamples = 1024;

/// Raw entropy input. fill() is serialized by an internal mutex, so one
/// source may be shared by several generators.
class EntropySource {
 public:
  virtual ~EntropySource() = default;

  FillResult fill(std::span<std::uint8_t> out);
  virtual std::string name() const = 0;
  /// Output is a pure function of configuration (fixed seed, file).
  virtual bool deterministic() const noexcept { return false; }
  /// A fixed test seed; key generation refuses it unless explicitly allowed.
  virtual bool test_only() const noexcept { return false; }

  /// Draws kStartupSamples raw samples and runs the repetition-count and
  /// adaptive-proportion tests on them. Throws InsufficientEntropyError.
  void startup_test();

 protected:
  virtual FillResult do_fill(std::span<std::uint8_t> out) = 0;
  /// Samples for the startup test; by default just fill() output.
  virtual std::vector<std::uint8_t> raw_samples(std::size_t count);

 private:
  std::mutex mutex_;
  std::uint8_t last_ = 0;
  std::size_t run_ = 0;
  bool tripped_ = false;
};

/// Timing jitter around a memory-walking loop: one parity bit per delta,
/// von Neumann debiased, 512 debiased bits hashed to every 32 output bytes.
class JitterSource final : public EntropySource {
 public:
  JitterSource();
  std::string name() const override { return "jitter"; }

 protected:
  FillResult do_fill(std::span<std::uint8_t> out) override;
  std::vector<std::uint8_t> raw_samples(std::size_t count) override;

 private:
  std::vector<std::uint8_t> debiased_bytes(std::size_t count);
  std::uint8_t delta_parity();

  std::vector<std::uint8_t> arena_;
  std::size_t cursor_ = 0;
};

/// getrandom(2).
class OsSource final : public EntropySource {
 public:
  std::string name() const override { return "os"; }

 protected:
  FillResult do_fill(std::span<std::uint8_t> out) override;
};

/// SHA-256(seed || counter) blocks, counter as 8 big-endian bytes. Test use only.
class SeedSource final : public EntropySource {
 public:
  explicit SeedSource(std::vector<std::uint8_t> seed);
  std::string name() const override { return "seed"; }
  bool deterministic() const noexcept override { return true; }
  bool test_only() const noexcept override { return true; }

 protected:
  FillResult do_fill(std::span<std::uint8_t> out) override;

 private:
  std::vector<std::uint8_t> seed_;
  std::uint64_t counter_ = 0;
  std::vector<std::uint8_t> pending_;
};

/// Bytes read sequentially from a file; a short read reports fewer bytes.
class FileSource final : public EntropySource {
 public:
  explicit FileSource(std::string path);
  std::string name() const override { return "file:" + path_; }
  bool deterministic() const noexcept override { return true; }

 protected:
  FillResult do_fill(std::span<std::uint8_t> out) override;

 private:
  std::string path_;
  std::uint64_t offset_ = 0;
};

/// "jitter", "os", "seed:<hex>" or "file:<path>". Throws ParseError.
std::shared_ptr<EntropySource> make_source(std::string_view spec);
/// Spec from MR_RBG_SOURCE, falling back to "os".
std::string default_source_spec();

/// HMAC-SHA-256 deterministic generator (K, V update/generate loop) with
/// automatic reseeding from its source.
class Drbg {
 public:
  static constexpr std::uint64_t kDefaultReseedInterval = std::uint64_t{1} << 20;
  static constexpr std::size_t kMaxRequest = 65536;

  /// Runs the source's startup test, then seeds from 32 bytes of entropy,
  /// a 16-byte nonce and `personalization`. Throws SourceFailureError or
  /// InsufficientEntropyError.
  static Drbg instantiate(std::shared_ptr<EntropySource> source,
                          std::span<const std::uint8_t> personalization = {},
                          std::uint64_t reseed_interval = kDefaultReseedInterval);

  /// Any length; long requests are served in kMaxRequest pieces, each of
  /// which is one generate call. A zero-length request still advances the
  /// state and the request counter.
  std::vector<std::uint8_t> generate(std::size_t nbytes);
  void generate_into(std::span<std::uint8_t> out);

  /// Mixes fresh source entropy into the state. Throws ReseedFailureError.
  void reseed(std::span<const std::uint8_t> additional = {});

  /// Child generator seeded from 48 bytes of this stream plus a domain
  /// label and the child's index. The child shares the entropy source.
  Drbg split();

  /// Uniform integer with exactly `bits` random bits (top bit may be zero).
  Bignum random_bits(std::size_t bits);
  /// Uniform in [0, bound) by rejection. Throws RangeError on zero bound.
  Bignum uniform_below(const Bignum& bound);
  std::uint64_t uniform_u64(std::uint64_t bound);

  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t reseed_counter() const noexcept { return reseed_counter_; }
  const EntropySource& source() const noexcept { return *source_; }

 private:
  Drbg() = default;
  void update(std::span<const std::uint8_t> data);
  void seed(std::span<const std::uint8_t> material);
  void generate_block(std::span<std::uint8_t> out);

  std::shared_ptr<EntropySource> source_;
  std::array<std::uint8_t, 32> key_{};
  std::array<std::uint8_t, 32> v_{};
  std::uint64_t reseed_counter_ = 0;
  std::uint64_t reseed_interval_ = kDefaultReseedInterval;
  std::uint64_t stream_id_ = 0;
  std::uint64_t children_ = 0;
};

}  // namespace rnscrypt::rbg
