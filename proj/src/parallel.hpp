#ifndef FLATLAB_PARALLEL_HPP
#define FLATLAB_PARALLEL_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace flatlab {

// Worker count used by parallel_for. Results never depend on it: work is split
// into chunks of a fixed size and reductions combine chunk partials in index
// order, so outputs are bit-identical for any thread count.
void set_num_threads(int n);
int num_threads();

// Fixed chunk width for grid loops and reductions.
inline constexpr std::size_t kChunk = 4096;

// fn(begin, end) over [0, size) in chunks of kChunk.
void parallel_for(std::size_t size, const std::function<void(std::size_t, std::size_t)>& fn);

// Deterministic pairwise sum of fn(i) over [0, size): per-chunk pairwise
// partials, then a pairwise pass over the chunk partials.
double pairwise_sum(std::size_t size, const std::function<double(std::size_t)>& fn);

// Deterministic pairwise sum of a contiguous buffer.
double pairwise_sum(const double* data, std::size_t size);

// Splitmix-based generator: identical streams on every platform.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }
  // uniform in [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // uniform integer in [0, n)
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }
  int uniform_int(int lo, int hi) { return lo + int(below(std::uint64_t(hi - lo + 1))); }

private:
  std::uint64_t state_;
};

}  // namespace flatlab

#endif
