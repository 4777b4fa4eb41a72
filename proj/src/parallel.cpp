#include "parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace flatlab {

namespace {
std::atomic<int> g_threads{0};  // 0 = auto

int resolve_threads() {
  int n = g_threads.load();
  if (n > 0) return n;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : int(hw);
}
}  // namespace

void set_num_threads(int n) { g_threads.store(n); }
int num_threads() { return resolve_threads(); }

void parallel_for(std::size_t size, const std::function<void(std::size_t, std::size_t)>& fn) {
  if (size == 0) return;
  const std::size_t nchunks = (size + kChunk - 1) / kChunk;
  // thread spawn costs more than a few chunks of work
  const int nthreads = nchunks < 4 ? 1 : std::min<std::size_t>(resolve_threads(), nchunks);
  if (nthreads <= 1) {
    for (std::size_t c = 0; c < nchunks; ++c)
      fn(c * kChunk, std::min(size, (c + 1) * kChunk));
    return;
  }
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      std::size_t c = next.fetch_add(1);
      if (c >= nchunks) break;
      fn(c * kChunk, std::min(size, (c + 1) * kChunk));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nthreads - 1);
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
}

namespace {
double pairwise_range(const double* data, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += data[i];
    return s;
  }
  std::size_t half = n / 2;
  return pairwise_range(data, half) + pairwise_range(data + half, n - half);
}
}  // namespace

double pairwise_sum(const double* data, std::size_t size) { return pairwise_range(data, size); }

double pairwise_sum(std::size_t size, const std::function<double(std::size_t)>& fn) {
  if (size == 0) return 0.0;
  const std::size_t nchunks = (size + kChunk - 1) / kChunk;
  std::vector<double> partial(nchunks, 0.0);
  parallel_for(size, [&](std::size_t b, std::size_t e) {
    double buf[kChunk];
    std::size_t n = e - b;
    for (std::size_t i = 0; i < n; ++i) buf[i] = fn(b + i);
    partial[b / kChunk] = pairwise_range(buf, n);
  });
  return pairwise_range(partial.data(), nchunks);
}

}  // namespace flatlab
