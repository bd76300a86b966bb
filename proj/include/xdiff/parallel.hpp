#ifndef XDIFF_PARALLEL_HPP
#define XDIFF_PARALLEL_HPP

#include <functional>

namespace xdiff {

// Resolve a worker count: a positive request wins, otherwise the
// XDIFF_THREADS environment variable, otherwise 1.
int resolve_threads(int requested = 0);

// Run fn over [0,n) split into contiguous shards, one per worker. Each item
// is processed by a pure function writing to its own slot, so results are
// independent of the shard layout.
void parallel_for(int n, int threads, const std::function<void(int begin, int end)>& fn);

}  // namespace xdiff

#endif
