#include "rnscrypt/exec.hpp"

#include <omp.h>

namespace rnscrypt::exec {

unsigned hardware_workers() {
  const int procs = omp_get_num_procs();
  return procs > 0 ? static_cast<unsigned>(procs) : 1U;
}

void ParallelPlan::validate() const {
  if (channels_per_block == 0 || channels_per_block > kMaxChannelsPerBlock) {
    throw RangeError("channels_per_block must be in [1, 256]");
  }
  if (block_count == 0) throw RangeError("block_count must be at least 1");
  if (workers == 0) throw RangeError("workers must be at least 1");
}

}  // namespace rnscrypt::exec
