#pragma once

// Power-up style statistical checks over one 20,000-bit block, with the
// fixed acceptance bands of the FIPS 140-2 generator tests. Bits are read
// most significant first within each byte.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>

#include "rnscrypt/rbg.hpp"

namespace rnscrypt::rbg {

inline constexpr std::size_t kHealthBlockBits = 20000;
inline constexpr std::size_t kHealthBlockBytes = kHealthBlockBits / 8;

inline constexpr std::size_t kMonobitLow = 9725;    // exclusive
inline constexpr std::size_t kMonobitHigh = 10275;  // exclusive
inline constexpr double kPokerLow = 2.16;           // exclusive
inline constexpr double kPokerHigh = 46.17;         // exclusive
inline constexpr std::size_t kLongRun = 26;         // a run this long fails

struct RunBand {
  std::size_t low;   // inclusive
  std::size_t high;  // inclusive
};
/// Bands for run lengths 1..5 and 6+, applied to 0-runs and 1-runs alike.
inline constexpr std::array<RunBand, 6> kRunBands{{
    {2315, 2685}, {1114, 1386}, {527, 723}, {240, 384}, {103, 209}, {103, 209}}};

struct HealthReport {
  struct {
    bool pass = false;
    std::size_t ones = 0;
  } monobit;
  struct {
    bool pass = false;
    double statistic = 0.0;
  } poker;
  struct {
    bool pass = false;
    std::array<std::size_t, 6> zero_runs{};  // index k counts runs of length k+1 (6+ in the last)
    std::array<std::size_t, 6> one_runs{};
    std::array<bool, 6> zero_pass{};
    std::array<bool, 6> one_pass{};
    std::size_t failing_buckets = 0;
  } runs;
  struct {
    bool pass = false;
    std::size_t max_run = 0;
  } long_run;

  bool all_pass() const noexcept {
    return monobit.pass && poker.pass && runs.pass && long_run.pass;
  }
};

/// Throws WrongLengthError unless the block is exactly 2,500 bytes.
HealthReport health_check(std::span<const std::uint8_t> block);

/// Four lines `test=<name> verdict=<pass|fail> stat=<value>`; the runs
/// statistic is the number of failing buckets.
std::string format_report(const HealthReport& report);

/// Writes `nbytes` of generator output to `sink` as raw bytes, in
/// 2,500-byte generate calls. Throws SinkWriteError.
void export_stream(Drbg& drbg, std::size_t nbytes, std::ostream& sink);

}  // namespace rnscrypt::rbg
