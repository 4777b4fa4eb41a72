#ifndef FLATLAB_GRID_HPP
#define FLATLAB_GRID_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "error.hpp"

namespace flatlab {

// Flat torus [0,1)^n sampled on a regular N^n grid, row-major with axis 0
// slowest. N is a power of two so band-limited trig data is represented
// exactly by the DFT.
struct TorusGrid {
  int n = 0;
  int N = 0;

  TorusGrid() = default;
  TorusGrid(int n_, int N_) : n(n_), N(N_) {
    FLATLAB_REQUIRE(n >= 1 && n <= 4, ErrorCode::dimension_mismatch,
                    "torus dimension must be 1..4, got " << n);
    FLATLAB_REQUIRE(N >= 8 && (N & (N - 1)) == 0, ErrorCode::config_error,
                    "grid points per axis must be a power of two >= 8, got " << N);
  }

  std::size_t npoints() const {
    std::size_t p = 1;
    for (int i = 0; i < n; ++i) p *= std::size_t(N);
    return p;
  }
  std::size_t stride(int axis) const {
    std::size_t s = 1;
    for (int i = axis + 1; i < n; ++i) s *= std::size_t(N);
    return s;
  }
  void coords(std::size_t p, int* idx) const {
    for (int a = n - 1; a >= 0; --a) {
      idx[a] = int(p % std::size_t(N));
      p /= std::size_t(N);
    }
  }
  double x(int grid_index) const { return double(grid_index) / double(N); }
  bool operator==(const TorusGrid& o) const { return n == o.n && N == o.N; }
  bool operator!=(const TorusGrid& o) const { return !(*this == o); }
};

// Strictly increasing multi-indices and the sign tables for wedge/derivative
// assembly, cached per dimension.
class ComboTables {
public:
  struct Merge {
    int target;  // component index in degree a+b, or -1 if not disjoint
    int sign;    // Koszul merge sign
  };
  struct DTerm {
    int axis;
    int target;  // component index in degree k+1
    int sign;    // (-1)^{#elements of I below axis}
  };

  static const ComboTables& get(int n);

  int count(int degree) const { return int(comps_[std::size_t(degree)].size()); }
  const std::vector<int>& axes(int degree, int comp) const {
    return comps_[std::size_t(degree)][std::size_t(comp)];
  }
  std::uint32_t mask(int degree, int comp) const {
    return masks_[std::size_t(degree)][std::size_t(comp)];
  }
  int comp_of_mask(int degree, std::uint32_t mask) const;
  // merge of component ca (degree a) with cb (degree b)
  const Merge& merge(int a, int b, int ca, int cb) const;
  // terms of d applied to degree-k component c: one per axis not in c
  const std::vector<DTerm>& d_terms(int k, int c) const;

private:
  explicit ComboTables(int n);
  int n_;
  std::vector<std::vector<std::vector<int>>> comps_;    // [degree][comp] -> axes
  std::vector<std::vector<std::uint32_t>> masks_;       // [degree][comp]
  std::vector<std::vector<std::vector<Merge>>> merge_;  // [a*(n+1)+b][ca][cb]
  std::vector<std::vector<std::vector<DTerm>>> dterms_;  // [k][comp]
};

}  // namespace flatlab

#endif
