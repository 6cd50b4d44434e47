#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rnscrypt/exec.hpp"

namespace rnscrypt::bench {

enum class Op { modmul, modexp, keygen, rand };

/// Throws ParseError.
Op parse_op(std::string_view name);
std::string op_name(Op op);

enum class Mode { parallel, serial };

struct BenchConfig {
  Op op = Op::modmul;
  std::size_t bits = 3072;
  std::vector<std::size_t> block_counts{1};
  unsigned repeat = 3;
  unsigned workers = exec::hardware_workers();
  Mode mode = Mode::parallel;
  /// Montgomery products chained inside one modmul block.
  std::size_t products_per_block = 16;
  /// Bytes drawn per rand block (one health-test block).
  std::size_t rand_block_bytes = 2500;
  /// RNS channels for modmul/modexp; 0 sizes the base to `bits`.
  std::size_t channels = 128;
  std::uint64_t seed = 1;
};

/// One point: the median wall time of `repeat` timed runs after one
/// discarded warm-up run.
struct BenchRecord {
  Op op = Op::modmul;
  std::size_t bits = 0;
  std::size_t block_count = 0;
  unsigned workers = 0;
  /// Operations per millisecond, or bytes per second for rand.
  double throughput = 0.0;
  double wall_time_ms = 0.0;
  /// Operations per block; throughput = repetitions * block_count / wall_time_ms.
  std::size_t repetitions = 0;
  /// Order-sensitive digest of every block result, for comparing schedules.
  std::uint64_t checksum = 0;
};

/// Throws RangeError for an empty block list, zero repeat or unsupported bits.
std::vector<BenchRecord> run(const BenchConfig& config);

inline constexpr std::string_view kCsvHeader = "op,bits,block_count,workers,throughput,wall_time_ms";
std::string to_csv(const BenchRecord& record);

}  // namespace rnscrypt::bench
