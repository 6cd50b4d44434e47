#pragma once

// Data-parallel executor standing in for GPU kernels. Channels map to
// loop iterations of an OpenMP parallel-for, blocks map to independent jobs.
// Every entry point has a serial twin in `exec::serial` with identical
// semantics; tests hold the parallel versions to bit-equality with it.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <limits>
#include <mutex>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "rnscrypt/errors.hpp"

namespace rnscrypt::exec {

/// Processors visible to the OpenMP runtime.
unsigned hardware_workers();

inline constexpr std::size_t kMaxChannelsPerBlock = 256;

struct ParallelPlan {
  std::size_t channels_per_block = 128;
  std::size_t block_count = 1;
  unsigned workers = hardware_workers();

  /// Throws RangeError unless 1 <= channels_per_block <= 256, block_count >= 1
  /// and workers >= 1.
  void validate() const;
};

namespace detail {

inline std::string describe(std::exception_ptr error) {
  try {
    std::rethrow_exception(error);
  } catch (const std::exception& e) {
    return e.what();
  } catch (...) {
    return "unknown exception";
  }
}

template <class F, class In>
using result_t = std::decay_t<std::invoke_result_t<F&, const In&>>;

// Results are written concurrently, one element per iteration; vector<bool>
// packs elements into shared words and would race.
template <class T>
inline constexpr bool storable_v = !std::is_same_v<T, bool>;

}  // namespace detail

/// output[i] = task(data[i]). The task must not touch shared mutable state.
/// If any channel throws, the lowest failing index is reported as ExecError.
template <class In, class F>
auto run_channels(F&& task, const ParallelPlan& plan, std::span<const In> data)
    -> std::vector<detail::result_t<F, In>> {
  static_assert(detail::storable_v<detail::result_t<F, In>>, "bool results race; return char");
  plan.validate();
  std::vector<detail::result_t<F, In>> out(data.size());
  std::size_t failed = std::numeric_limits<std::size_t>::max();
  std::string message;
  std::mutex guard;
  const auto count = static_cast<std::ptrdiff_t>(data.size());

#pragma omp parallel for num_threads(plan.workers) schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = task(data[static_cast<std::size_t>(i)]);
    } catch (...) {
      std::lock_guard lock(guard);
      if (static_cast<std::size_t>(i) < failed) {
        failed = static_cast<std::size_t>(i);
        message = detail::describe(std::current_exception());
      }
    }
  }
  if (failed != std::numeric_limits<std::size_t>::max()) throw ExecError(failed, message);
  return out;
}

/// results[i] = job(blocks[i]), in input order whatever order jobs finish in.
/// Failing blocks are collected and reported together as BlockFailure after
/// every other block has completed.
template <class In, class F>
auto run_blocks(F&& job, std::span<const In> blocks, unsigned workers = hardware_workers())
    -> std::vector<detail::result_t<F, In>> {
  static_assert(detail::storable_v<detail::result_t<F, In>>, "bool results race; return char");
  if (workers == 0) throw RangeError("workers must be at least 1");
  std::vector<detail::result_t<F, In>> out(blocks.size());
  std::vector<BlockFailure::Failure> failures;
  std::mutex guard;
  const auto count = static_cast<std::ptrdiff_t>(blocks.size());

#pragma omp parallel for num_threads(workers) schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = job(blocks[static_cast<std::size_t>(i)]);
    } catch (...) {
      std::lock_guard lock(guard);
      failures.emplace_back(static_cast<std::size_t>(i), detail::describe(std::current_exception()));
    }
  }
  if (!failures.empty()) {
    std::sort(failures.begin(), failures.end());
    throw BlockFailure(std::move(failures));
  }
  return out;
}

/// Serial reference implementations.
namespace serial {

template <class In, class F>
auto run_channels(F&& task, const ParallelPlan& plan, std::span<const In> data)
    -> std::vector<detail::result_t<F, In>> {
  plan.validate();
  std::vector<detail::result_t<F, In>> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    try {
      out[i] = task(data[i]);
    } catch (...) {
      throw ExecError(i, detail::describe(std::current_exception()));
    }
  }
  return out;
}

template <class In, class F>
auto run_blocks(F&& job, std::span<const In> blocks) -> std::vector<detail::result_t<F, In>> {
  std::vector<detail::result_t<F, In>> out(blocks.size());
  std::vector<BlockFailure::Failure> failures;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    try {
      out[i] = job(blocks[i]);
    } catch (...) {
      failures.emplace_back(i, detail::describe(std::current_exception()));
    }
  }
  if (!failures.empty()) throw BlockFailure(std::move(failures));
  return out;
}

}  // namespace serial
}  // namespace rnscrypt::exec
