#include <openssl/sha.h>
#include <sys/random.h>

#include <cerrno>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include "rnscrypt/errors.hpp"
#include "rnscrypt/rbg.hpp"

namespace rnscrypt::rbg {

FillResult EntropySource::fill(std::span<std::uint8_t> out) {
  std::lock_guard lock(mutex_);
  FillResult r = do_fill(out);
  for (std::size_t i = 0; i < r.bytes; ++i) {
    if (run_ > 0 && out[i] == last_) {
      if (++run_ >= kRepetitionCutoff) tripped_ = true;
    } else {
      last_ = out[i];
      run_ = 1;
    }
  }
  r.healthy = r.healthy && !tripped_;
  return r;
}

std::vector<std::uint8_t> EntropySource::raw_samples(std::size_t count) {
  std::vector<std::uint8_t> s(count);
  const FillResult r = fill(s);
  if (r.bytes != count) throw SourceFailureError(name() + ": short read during startup test");
  return s;
}

void EntropySource::startup_test() {
  const std::vector<std::uint8_t> s = raw_samples(kStartupSamples);
  std::size_t run = 1;
  for (std::size_t i = 1; i < s.size(); ++i) {
    run = s[i] == s[i - 1] ? run + 1 : 1;
    if (run >= kRepetitionCutoff) {
      throw InsufficientEntropyError(name() + ": repetition count test failed");
    }
  }
  for (std::size_t start = 0; start + kProportionWindow <= s.size(); start += kProportionWindow) {
    const auto first = s[start];
    std::size_t hits = 0;
    for (std::size_t i = start; i < start + kProportionWindow; ++i) hits += s[i] == first;
    if (hits >= kProportionCutoff) {
      throw InsufficientEntropyError(name() + ": adaptive proportion test failed");
    }
  }
}

// --- jitter ------------------------------------------------------------------

namespace {
constexpr std::size_t kArenaBytes = std::size_t{1} << 20;
constexpr std::size_t kDebiasedPerBlock = 64;  // 512 bits per 32-byte output
constexpr std::size_t kMaxRawPerBit = 4096;
}  // namespace

JitterSource::JitterSource() : arena_(kArenaBytes, 0) {}

std::uint8_t JitterSource::delta_parity() {
  const auto t0 = std::chrono::steady_clock::now();
  // Data-dependent walk over a buffer larger than L2 to provoke cache and
  // scheduler noise.
  std::size_t idx = cursor_;
  for (int i = 0; i < 64; ++i) {
    idx = (idx * 2654435761u + arena_[idx] + 1) % arena_.size();
    arena_[idx] = static_cast<std::uint8_t>(arena_[idx] + i);
  }
  cursor_ = idx;
  const auto t1 = std::chrono::steady_clock::now();
  auto delta = static_cast<std::uint64_t>((t1 - t0).count());
  delta ^= delta >> 32;
  delta ^= delta >> 16;
  delta ^= delta >> 8;
  delta ^= delta >> 4;
  delta ^= delta >> 2;
  delta ^= delta >> 1;
  return static_cast<std::uint8_t>(delta & 1U);
}

std::vector<std::uint8_t> JitterSource::debiased_bytes(std::size_t count) {
  std::vector<std::uint8_t> out(count, 0);
  for (std::size_t bit = 0; bit < count * 8; ++bit) {
    std::size_t tries = 0;
    for (;;) {
      const std::uint8_t a = delta_parity();
      const std::uint8_t b = delta_parity();
      if (a != b) {
        out[bit / 8] = static_cast<std::uint8_t>(out[bit / 8] | (a << (7 - bit % 8)));
        break;
      }
      if (++tries > kMaxRawPerBit) throw SourceFailureError("jitter: timer shows no variation");
    }
  }
  return out;
}

std::vector<std::uint8_t> JitterSource::raw_samples(std::size_t count) {
  return debiased_bytes(count);
}

FillResult JitterSource::do_fill(std::span<std::uint8_t> out) {
  std::size_t done = 0;
  while (done < out.size()) {
    const std::vector<std::uint8_t> raw = debiased_bytes(kDebiasedPerBlock);
    std::uint8_t digest[SHA256_DIGEST_LENGTH];
    SHA256(raw.data(), raw.size(), digest);
    const std::size_t take = std::min(out.size() - done, sizeof digest);
    std::memcpy(out.data() + done, digest, take);
    done += take;
  }
  return {done, true};
}

// --- os ----------------------------------------------------------------------

FillResult OsSource::do_fill(std::span<std::uint8_t> out) {
  std::size_t done = 0;
  while (done < out.size()) {
    const ssize_t n = getrandom(out.data() + done, out.size() - done, 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw SourceFailureError(std::string("getrandom: ") + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
  return {done, true};
}

// --- fixed seed --------------------------------------------------------------

SeedSource::SeedSource(std::vector<std::uint8_t> seed) : seed_(std::move(seed)) {
  if (seed_.empty()) throw ParseError("seed must not be empty");
}

FillResult SeedSource::do_fill(std::span<std::uint8_t> out) {
  std::size_t done = 0;
  while (done < out.size()) {
    if (pending_.empty()) {
      std::vector<std::uint8_t> msg = seed_;
      for (int i = 7; i >= 0; --i) msg.push_back(static_cast<std::uint8_t>(counter_ >> (8 * i)));
      ++counter_;
      pending_.resize(SHA256_DIGEST_LENGTH);
      SHA256(msg.data(), msg.size(), pending_.data());
    }
    const std::size_t take = std::min(out.size() - done, pending_.size());
    std::memcpy(out.data() + done, pending_.data(), take);
    pending_.erase(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(take));
    done += take;
  }
  return {done, true};
}

// --- file --------------------------------------------------------------------

FileSource::FileSource(std::string path) : path_(std::move(path)) {
  std::ifstream probe(path_, std::ios::binary);
  if (!probe) throw SourceFailureError("cannot open entropy file " + path_);
}

FillResult FileSource::do_fill(std::span<std::uint8_t> out) {
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw SourceFailureError("cannot open entropy file " + path_);
  in.seekg(static_cast<std::streamoff>(offset_));
  in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(out.size()));
  const auto got = static_cast<std::size_t>(in.gcount());
  offset_ += got;
  return {got, true};
}

// --- factory -----------------------------------------------------------------

namespace {

std::vector<std::uint8_t> parse_hex_bytes(std::string_view hex) {
  if (hex.empty() || hex.size() % 2 != 0) throw ParseError("seed hex must have an even, non-zero length");
  std::vector<std::uint8_t> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const char* first = hex.data() + 2 * i;
    auto [ptr, ec] = std::from_chars(first, first + 2, out[i], 16);
    if (ec != std::errc{} || ptr != first + 2) throw ParseError("bad hex digit in seed");
  }
  return out;
}

}  // namespace

std::shared_ptr<EntropySource> make_source(std::string_view spec) {
  if (spec == "jitter") return std::make_shared<JitterSource>();
  if (spec == "os") return std::make_shared<OsSource>();
  if (spec.starts_with("seed:")) return std::make_shared<SeedSource>(parse_hex_bytes(spec.substr(5)));
  if (spec.starts_with("file:") && spec.size() > 5) {
    return std::make_shared<FileSource>(std::string(spec.substr(5)));
  }
  throw ParseError("unknown entropy source '" + std::string(spec) +
                   "' (expected jitter, os, seed:<hex> or file:<path>)");
}

std::string default_source_spec() {
  const char* env = std::getenv("MR_RBG_SOURCE");
  return env != nullptr && *env != '\0' ? std::string(env) : std::string("os");
}

}  // namespace rnscrypt::rbg
