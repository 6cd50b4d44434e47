#include "rnscrypt/health.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "rnscrypt/errors.hpp"

namespace rnscrypt::rbg {

HealthReport health_check(std::span<const std::uint8_t> block) {
  if (block.size() != kHealthBlockBytes) {
    throw WrongLengthError("health block must be exactly " + std::to_string(kHealthBlockBytes) +
                           " bytes, got " + std::to_string(block.size()));
  }
  HealthReport r;

  std::array<std::size_t, 16> nibbles{};
  for (std::uint8_t b : block) {
    r.monobit.ones += static_cast<std::size_t>(__builtin_popcount(b));
    ++nibbles[b >> 4];
    ++nibbles[b & 0xF];
  }
  r.monobit.pass = r.monobit.ones > kMonobitLow && r.monobit.ones < kMonobitHigh;

  double sum_sq = 0.0;
  for (std::size_t f : nibbles) sum_sq += static_cast<double>(f) * static_cast<double>(f);
  const double segments = kHealthBlockBits / 4.0;
  r.poker.statistic = 16.0 / segments * sum_sq - segments;
  r.poker.pass = r.poker.statistic > kPokerLow && r.poker.statistic < kPokerHigh;

  auto bit_at = [&](std::size_t i) { return (block[i / 8] >> (7 - i % 8)) & 1U; };
  auto close_run = [&](unsigned bit, std::size_t len) {
    auto& counts = bit != 0 ? r.runs.one_runs : r.runs.zero_runs;
    ++counts[std::min<std::size_t>(len, 6) - 1];
    r.long_run.max_run = std::max(r.long_run.max_run, len);
  };
  unsigned current = bit_at(0);
  std::size_t len = 1;
  for (std::size_t i = 1; i < kHealthBlockBits; ++i) {
    const unsigned b = bit_at(i);
    if (b == current) {
      ++len;
    } else {
      close_run(current, len);
      current = b;
      len = 1;
    }
  }
  close_run(current, len);

  for (std::size_t k = 0; k < kRunBands.size(); ++k) {
    const RunBand band = kRunBands[k];
    r.runs.zero_pass[k] = r.runs.zero_runs[k] >= band.low && r.runs.zero_runs[k] <= band.high;
    r.runs.one_pass[k] = r.runs.one_runs[k] >= band.low && r.runs.one_runs[k] <= band.high;
    r.runs.failing_buckets += !r.runs.zero_pass[k];
    r.runs.failing_buckets += !r.runs.one_pass[k];
  }
  r.runs.pass = r.runs.failing_buckets == 0;
  r.long_run.pass = r.long_run.max_run < kLongRun;
  return r;
}

std::string format_report(const HealthReport& report) {
  auto verdict = [](bool pass) { return pass ? "pass" : "fail"; };
  char poker[64];
  std::snprintf(poker, sizeof poker, "%.2f", report.poker.statistic);
  std::string out;
  out += "test=monobit verdict=" + std::string(verdict(report.monobit.pass)) +
         " stat=" + std::to_string(report.monobit.ones) + "\n";
  out += "test=poker verdict=" + std::string(verdict(report.poker.pass)) + " stat=" + poker + "\n";
  out += "test=runs verdict=" + std::string(verdict(report.runs.pass)) +
         " stat=" + std::to_string(report.runs.failing_buckets) + "\n";
  out += "test=long_run verdict=" + std::string(verdict(report.long_run.pass)) +
         " stat=" + std::to_string(report.long_run.max_run) + "\n";
  return out;
}

void export_stream(Drbg& drbg, std::size_t nbytes, std::ostream& sink) {
  std::vector<std::uint8_t> chunk;
  for (std::size_t done = 0; done < nbytes;) {
    const std::size_t take = std::min(kHealthBlockBytes, nbytes - done);
    chunk.resize(take);
    drbg.generate_into(chunk);
    sink.write(reinterpret_cast<const char*>(chunk.data()), static_cast<std::streamsize>(take));
    if (!sink) throw SinkWriteError("write to output stream failed");
    done += take;
  }
  sink.flush();
  if (!sink) throw SinkWriteError("flush of output stream failed");
}

}  // namespace rnscrypt::rbg
