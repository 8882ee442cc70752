#ifndef AVOL_PARALLEL_HPP
#define AVOL_PARALLEL_HPP

#include <cstddef>
#include <thread>
#include <vector>

namespace avol {

// Process-wide worker count, set once by the CLI (--workers). Results must be
// identical for any value: chunks are fixed by index and merged in index order.
int worker_count();
void set_worker_count(int n);

// Runs fn(chunk_index, begin, end) over [0,n) split into worker-count chunks.
// fn must only write to per-chunk state; the caller merges in chunk order.
template <typename Fn>
void parallel_chunks(std::size_t n, Fn&& fn) {
    const int workers = worker_count();
    if (n == 0) return;
    const std::size_t nw = static_cast<std::size_t>(workers);
    if (workers <= 1 || n < 2 * nw) {
        fn(0, std::size_t{0}, n);
        return;
    }
    const std::size_t chunk = (n + nw - 1) / nw;
    std::vector<std::thread> pool;
    pool.reserve(nw);
    for (std::size_t c = 0; c * chunk < n; ++c) {
        std::size_t b = c * chunk, e = std::min(n, b + chunk);
        pool.emplace_back([&fn, c, b, e] { fn(c, b, e); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace avol

#endif
