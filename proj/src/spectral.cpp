#include "spectral.hpp"

#include <fftw3.h>

#include <atomic>
#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>
#include <vector>

#include "parallel.hpp"

namespace flatlab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// All plans are created FFTW_UNALIGNED so they can be executed on any buffer.
class PlanCache {
public:
  using Key = std::tuple<int, int, int, int, int, int, int>;  // kind,N,howmany,is,id,os,od
  enum Kind { R2C = 0, C2R = 1, C2C_F = 2, C2C_B = 3 };

  fftw_plan get(Kind kind, int N, int howmany, int istride, int idist, int ostride, int odist) {
    Key key{kind, N, howmany, istride, idist, ostride, odist};
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;

    fftw_plan plan = nullptr;
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    int n[1] = {N};
    if (kind == R2C) {
      std::vector<double> in(std::size_t(idist) * howmany + std::size_t(istride) * N + 8, 0.0);
      std::vector<cplx> out(std::size_t(odist) * howmany + std::size_t(ostride) * (N / 2 + 1) + 8);
      plan = fftw_plan_many_dft_r2c(1, n, howmany, in.data(), nullptr, istride, idist,
                                    reinterpret_cast<fftw_complex*>(out.data()), nullptr, ostride,
                                    odist, flags);
    } else if (kind == C2R) {
      std::vector<cplx> in(std::size_t(idist) * howmany + std::size_t(istride) * (N / 2 + 1) + 8);
      std::vector<double> out(std::size_t(odist) * howmany + std::size_t(ostride) * N + 8, 0.0);
      plan = fftw_plan_many_dft_c2r(1, n, howmany, reinterpret_cast<fftw_complex*>(in.data()),
                                    nullptr, istride, idist, out.data(), nullptr, ostride, odist,
                                    flags);
    } else {
      std::vector<cplx> in(std::size_t(idist) * howmany + std::size_t(istride) * N + 8);
      std::vector<cplx> out(in.size());
      plan = fftw_plan_many_dft(1, n, howmany, reinterpret_cast<fftw_complex*>(in.data()), nullptr,
                                istride, idist, reinterpret_cast<fftw_complex*>(out.data()),
                                nullptr, ostride, odist,
                                kind == C2C_F ? FFTW_FORWARD : FFTW_BACKWARD, flags);
    }
    cache_.emplace(key, plan);
    return plan;
  }

  static PlanCache& instance() {
    static PlanCache c;
    return c;
  }

private:
  std::mutex mu_;
  std::map<Key, fftw_plan> cache_;
};

struct LineGroup {
  std::size_t in_offset;
  int howmany;
};

// Splits the lines along `axis` into groups sharing one batched plan shape.
// group_len is the batch width (fixed, independent of thread count).
std::vector<LineGroup> line_groups(const TorusGrid& grid, int axis, int& istride, int& idist,
                                   int& group_len) {
  const std::size_t S = grid.stride(axis);
  const std::size_t npoints = grid.npoints();
  std::vector<LineGroup> groups;
  if (S == 1) {
    istride = 1;
    idist = grid.N;
    const std::size_t nlines = npoints / std::size_t(grid.N);
    group_len = int(std::min<std::size_t>(nlines, 256));
    for (std::size_t l = 0; l < nlines; l += std::size_t(group_len))
      groups.push_back({l * std::size_t(grid.N), int(std::min<std::size_t>(group_len, nlines - l))});
  } else {
    istride = int(S);
    idist = 1;
    group_len = int(std::min<std::size_t>(S, 1024));
    const std::size_t block = S * std::size_t(grid.N);
    for (std::size_t base = 0; base < npoints; base += block)
      for (std::size_t o = 0; o < S; o += std::size_t(group_len))
        groups.push_back({base + o, int(std::min<std::size_t>(group_len, S - o))});
  }
  return groups;
}

void run_groups(std::size_t ngroups, const std::function<void(std::size_t)>& fn) {
  const int nthreads = ngroups < 4 ? 1 : std::min<std::size_t>(num_threads(), ngroups);
  if (nthreads <= 1) {
    for (std::size_t g = 0; g < ngroups; ++g) fn(g);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      std::size_t g = next.fetch_add(1);
      if (g >= ngroups) break;
      fn(g);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
}

}  // namespace

void spectral_derivative(const TorusGrid& grid, const double* in, double* out, int axis) {
  const int N = grid.N;
  const int nmodes = N / 2 + 1;
  int istride = 0, idist = 0, group_len = 0;
  auto groups = line_groups(grid, axis, istride, idist, group_len);
  auto& cache = PlanCache::instance();
  // spectra stored mode-major: scratch[mode*batch + line]
  fftw_plan fwd_full = cache.get(PlanCache::R2C, N, group_len, istride, idist, group_len, 1);
  fftw_plan bwd_full = cache.get(PlanCache::C2R, N, group_len, group_len, 1, istride, idist);
  const double scale = 1.0 / double(N);

  run_groups(groups.size(), [&](std::size_t g) {
    const auto& grp = groups[g];
    fftw_plan fwd = grp.howmany == group_len
                        ? fwd_full
                        : cache.get(PlanCache::R2C, N, grp.howmany, istride, idist, grp.howmany, 1);
    fftw_plan bwd = grp.howmany == group_len
                        ? bwd_full
                        : cache.get(PlanCache::C2R, N, grp.howmany, grp.howmany, 1, istride, idist);
    std::vector<cplx> scratch(std::size_t(nmodes) * std::size_t(grp.howmany));
    fftw_execute_dft_r2c(fwd, const_cast<double*>(in + grp.in_offset),
                         reinterpret_cast<fftw_complex*>(scratch.data()));
    for (int mode = 0; mode < nmodes; ++mode) {
      const double freq = (mode == N / 2) ? 0.0 : kTwoPi * double(mode) * scale;
      cplx* row = scratch.data() + std::size_t(mode) * std::size_t(grp.howmany);
      for (int l = 0; l < grp.howmany; ++l) {
        // multiply by i*freq (normalization folded in)
        row[l] = cplx(-freq * row[l].imag(), freq * row[l].real());
      }
    }
    fftw_execute_dft_c2r(bwd, reinterpret_cast<fftw_complex*>(scratch.data()),
                         out + grp.in_offset);
  });
}

void spectral_derivative(const TorusGrid& grid, const cplx* in, cplx* out, int axis) {
  const int N = grid.N;
  int istride = 0, idist = 0, group_len = 0;
  auto groups = line_groups(grid, axis, istride, idist, group_len);
  auto& cache = PlanCache::instance();
  fftw_plan fwd_full = cache.get(PlanCache::C2C_F, N, group_len, istride, idist, group_len, 1);
  fftw_plan bwd_full = cache.get(PlanCache::C2C_B, N, group_len, group_len, 1, istride, idist);
  const double scale = 1.0 / double(N);

  run_groups(groups.size(), [&](std::size_t g) {
    const auto& grp = groups[g];
    fftw_plan fwd =
        grp.howmany == group_len
            ? fwd_full
            : cache.get(PlanCache::C2C_F, N, grp.howmany, istride, idist, grp.howmany, 1);
    fftw_plan bwd =
        grp.howmany == group_len
            ? bwd_full
            : cache.get(PlanCache::C2C_B, N, grp.howmany, grp.howmany, 1, istride, idist);
    std::vector<cplx> scratch(std::size_t(N) * std::size_t(grp.howmany));
    fftw_execute_dft(fwd,
                     reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in + grp.in_offset)),
                     reinterpret_cast<fftw_complex*>(scratch.data()));
    for (int mode = 0; mode < N; ++mode) {
      double k = (mode <= N / 2) ? double(mode) : double(mode - N);
      if (mode == N / 2) k = 0.0;
      const double freq = kTwoPi * k * scale;
      cplx* row = scratch.data() + std::size_t(mode) * std::size_t(grp.howmany);
      for (int l = 0; l < grp.howmany; ++l)
        row[l] = cplx(-freq * row[l].imag(), freq * row[l].real());
    }
    fftw_execute_dft(bwd, reinterpret_cast<fftw_complex*>(scratch.data()),
                     reinterpret_cast<fftw_complex*>(out + grp.in_offset));
  });
}

double fourier_tail_fraction(const TorusGrid& grid, const cplx* field) {
  const std::size_t npoints = grid.npoints();
  std::vector<cplx> work(field, field + npoints);
  std::vector<cplx> tmp(npoints);
  auto& cache = PlanCache::instance();
  for (int axis = 0; axis < grid.n; ++axis) {
    int istride = 0, idist = 0, group_len = 0;
    auto groups = line_groups(grid, axis, istride, idist, group_len);
    for (const auto& grp : groups) {
      fftw_plan fwd =
          cache.get(PlanCache::C2C_F, grid.N, grp.howmany, istride, idist, istride, idist);
      fftw_execute_dft(fwd, reinterpret_cast<fftw_complex*>(work.data() + grp.in_offset),
                       reinterpret_cast<fftw_complex*>(tmp.data() + grp.in_offset));
    }
    std::swap(work, tmp);
  }
  double total = 0.0, tail = 0.0;
  std::vector<int> idx(std::size_t(grid.n));
  for (std::size_t p = 0; p < npoints; ++p) {
    grid.coords(p, idx.data());
    bool in_tail = false;
    for (int a = 0; a < grid.n; ++a) {
      int mode = idx[std::size_t(a)];
      int k = (mode <= grid.N / 2) ? mode : mode - grid.N;
      if (std::abs(k) >= grid.N / 4) in_tail = true;
    }
    double e = std::norm(work[p]);
    total += e;
    if (in_tail) tail += e;
  }
  return total == 0.0 ? 0.0 : tail / total;
}

}  // namespace flatlab
