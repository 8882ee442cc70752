#include "avol/parallel.hpp"

#include <atomic>

namespace avol {

namespace {
std::atomic<int> g_workers{1};
}

int worker_count() { return g_workers.load(std::memory_order_relaxed); }

void set_worker_count(int n) {
    if (n < 1) n = 1;
    if (n > 256) n = 256;
    g_workers.store(n, std::memory_order_relaxed);
}

}  // namespace avol
