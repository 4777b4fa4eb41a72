#include "forms.hpp"

#include <algorithm>
#include <cmath>

#include "spectral.hpp"

namespace flatlab {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

double abs_of(double v) { return std::abs(v); }
double abs_of(const cplx& v) { return std::abs(v); }

double sum_buffer_real(const double* data, std::size_t n) { return pairwise_sum(data, n); }

template <class S>
S deterministic_sum(const std::vector<S>& buf);

template <>
double deterministic_sum<double>(const std::vector<double>& buf) {
  return sum_buffer_real(buf.data(), buf.size());
}

template <>
cplx deterministic_sum<cplx>(const std::vector<cplx>& buf) {
  std::vector<double> re(buf.size()), im(buf.size());
  for (std::size_t i = 0; i < buf.size(); ++i) {
    re[i] = buf[i].real();
    im[i] = buf[i].imag();
  }
  return cplx(sum_buffer_real(re.data(), re.size()), sum_buffer_real(im.data(), im.size()));
}
}  // namespace

template <class S>
S GridForm<S>::value_at(int c, int a, const std::vector<int>& idx) const {
  std::size_t p = 0;
  for (int i = 0; i < grid.n; ++i) p = p * std::size_t(grid.N) + std::size_t(idx[std::size_t(i)]);
  return field(c, a)[p];
}

template <class S>
void check_same_grid(const GridForm<S>& a, const GridForm<S>& b) {
  FLATLAB_REQUIRE(a.grid == b.grid, ErrorCode::dimension_mismatch, "grid mismatch");
  FLATLAB_REQUIRE(a.lie_dim == b.lie_dim && a.algebra == b.algebra, ErrorCode::dimension_mismatch,
                  "value type mismatch");
}

template <class S>
void add_scaled(GridForm<S>& dst, const GridForm<S>& src, S factor) {
  FLATLAB_REQUIRE(dst.grid == src.grid && dst.degree == src.degree &&
                      dst.lie_dim == src.lie_dim,
                  ErrorCode::dimension_mismatch, "form shape mismatch in add");
  for (int c = 0; c < dst.ncomp(); ++c) {
    auto& d = dst.comp[std::size_t(c)];
    const auto& s = src.comp[std::size_t(c)];
    parallel_for(d.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) d[i] += factor * s[i];
    });
  }
}

template <class S>
GridForm<S> operator+(const GridForm<S>& a, const GridForm<S>& b) {
  GridForm<S> out = a;
  add_scaled(out, b, S(1));
  return out;
}

template <class S>
GridForm<S> operator-(const GridForm<S>& a, const GridForm<S>& b) {
  GridForm<S> out = a;
  add_scaled(out, b, S(-1));
  return out;
}

template <class S>
GridForm<S> scaled(const GridForm<S>& a, S factor) {
  GridForm<S> out = a;
  for (auto& c : out.comp)
    parallel_for(c.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) c[i] *= factor;
    });
  return out;
}

namespace {

// result_field += factor * x * y, pointwise over the grid
template <class S>
void axpy_product(S* result, const S* x, const S* y, S factor, std::size_t n) {
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) result[i] += factor * x[i] * y[i];
  });
}

}  // namespace

template <class S>
GridForm<S> wedge(const GridForm<S>& a, const GridForm<S>& b) {
  FLATLAB_REQUIRE(a.grid == b.grid, ErrorCode::dimension_mismatch, "grid mismatch in wedge");
  FLATLAB_REQUIRE(a.is_scalar() || b.is_scalar(), ErrorCode::dimension_mismatch,
                  "wedge of two lie-valued forms needs a bilinear combiner");
  FLATLAB_REQUIRE(a.degree + b.degree <= a.grid.n, ErrorCode::degree_error,
                  "wedge degree " << a.degree + b.degree << " exceeds dimension " << a.grid.n);
  const auto& tab = ComboTables::get(a.grid.n);
  AlgebraPtr alg = a.is_scalar() ? b.algebra : a.algebra;
  GridForm<S> out(a.grid, a.degree + b.degree, alg);
  const std::size_t np = a.grid.npoints();
  for (int ca = 0; ca < a.ncomp(); ++ca)
    for (int cb = 0; cb < b.ncomp(); ++cb) {
      const auto& mg = tab.merge(a.degree, b.degree, ca, cb);
      if (mg.target < 0) continue;
      const S sign = S(double(mg.sign));
      for (int co = 0; co < out.ncoeff(); ++co) {
        const S* xa = a.field(ca, a.is_scalar() ? 0 : co);
        const S* xb = b.field(cb, b.is_scalar() ? 0 : co);
        axpy_product(out.field(mg.target, co), xa, xb, sign, np);
      }
    }
  return out;
}

template <class S>
GridForm<S> wedge_bracket(const GridForm<S>& a, const GridForm<S>& b) {
  check_same_grid(a, b);
  FLATLAB_REQUIRE(!a.is_scalar(), ErrorCode::dimension_mismatch,
                  "bracket wedge needs lie-valued forms");
  FLATLAB_REQUIRE(a.degree + b.degree <= a.grid.n, ErrorCode::degree_error,
                  "wedge degree exceeds dimension");
  const auto& tab = ComboTables::get(a.grid.n);
  GridForm<S> out(a.grid, a.degree + b.degree, a.algebra);
  const std::size_t np = a.grid.npoints();
  const auto& cs = a.algebra->structure();
  for (int ca = 0; ca < a.ncomp(); ++ca)
    for (int cb = 0; cb < b.ncomp(); ++cb) {
      const auto& mg = tab.merge(a.degree, b.degree, ca, cb);
      if (mg.target < 0) continue;
      for (const auto& e : cs) {
        S factor;
        if constexpr (std::is_same_v<S, double>)
          factor = e.v.real() * double(mg.sign);
        else
          factor = e.v * double(mg.sign);
        axpy_product(out.field(mg.target, e.a), a.field(ca, e.b), b.field(cb, e.g), factor, np);
      }
    }
  return out;
}

template <class S>
GridForm<S> wedge_pair(const InvariantPolynomial& pairing, const GridForm<S>& a,
                       const GridForm<S>& b) {
  check_same_grid(a, b);
  FLATLAB_REQUIRE(pairing.degree() == 2, ErrorCode::arity_error, "pairing must have degree 2");
  FLATLAB_REQUIRE(a.degree + b.degree <= a.grid.n, ErrorCode::degree_error,
                  "wedge degree exceeds dimension");
  const auto& tab = ComboTables::get(a.grid.n);
  GridForm<S> out(a.grid, a.degree + b.degree, nullptr);
  const std::size_t np = a.grid.npoints();
  for (int ca = 0; ca < a.ncomp(); ++ca)
    for (int cb = 0; cb < b.ncomp(); ++cb) {
      const auto& mg = tab.merge(a.degree, b.degree, ca, cb);
      if (mg.target < 0) continue;
      for (const auto& e : pairing.entries()) {
        S factor;
        if constexpr (std::is_same_v<S, double>)
          factor = e.v.real() * double(mg.sign);
        else
          factor = e.v * double(mg.sign);
        axpy_product(out.field(mg.target, 0), a.field(ca, e.idx[0]), b.field(cb, e.idx[1]),
                     factor, np);
      }
    }
  return out;
}

namespace {

// Wedge one coefficient slice of a lie form onto a scalar partial product.
template <class S>
GridForm<S> wedge_slice(const GridForm<S>& partial, const GridForm<S>& f, int coeff) {
  const auto& tab = ComboTables::get(partial.grid.n);
  GridForm<S> out(partial.grid, partial.degree + f.degree, nullptr);
  const std::size_t np = partial.grid.npoints();
  for (int ca = 0; ca < partial.ncomp(); ++ca)
    for (int cb = 0; cb < f.ncomp(); ++cb) {
      const auto& mg = tab.merge(partial.degree, f.degree, ca, cb);
      if (mg.target < 0) continue;
      axpy_product(out.field(mg.target, 0), partial.field(ca, 0), f.field(cb, coeff),
                   S(double(mg.sign)), np);
    }
  return out;
}

template <class S>
struct PolyRecursion {
  const std::vector<const GridForm<S>*>& slots;
  const std::vector<InvariantPolynomial::Entry>& entries;
  int r;
  GridForm<S>* out;

  // entries are sorted lexicographically, so every group [lo,grp) below shares
  // the index prefix up to `level`.
  void run(std::size_t lo, std::size_t hi, int level, const GridForm<S>& partial) {
    if (level + 1 == r) {
      const auto& tab = ComboTables::get(out->grid.n);
      const GridForm<S>& f = *slots[std::size_t(level)];
      for (std::size_t k = lo; k < hi; ++k) {
        int aa = entries[k].idx[std::size_t(level)];
        S v;
        if constexpr (std::is_same_v<S, double>)
          v = entries[k].v.real();
        else
          v = entries[k].v;
        for (int ca = 0; ca < partial.ncomp(); ++ca)
          for (int cb = 0; cb < f.ncomp(); ++cb) {
            const auto& mg = tab.merge(partial.degree, f.degree, ca, cb);
            if (mg.target < 0) continue;
            axpy_product(out->field(mg.target, 0), partial.field(ca, 0), f.field(cb, aa),
                         v * S(double(mg.sign)), out->grid.npoints());
          }
      }
      return;
    }
    while (lo < hi) {
      int a = entries[lo].idx[std::size_t(level)];
      std::size_t grp = lo;
      while (grp < hi && entries[grp].idx[std::size_t(level)] == a) ++grp;
      GridForm<S> next = wedge_slice(partial, *slots[std::size_t(level)], a);
      if (next.ncomp() > 0) run(lo, grp, level + 1, next);
      lo = grp;
    }
  }
};

}  // namespace

template <class S>
GridForm<S> poly_eval_forms(const InvariantPolynomial& p,
                            const std::vector<const GridForm<S>*>& slots) {
  FLATLAB_REQUIRE(int(slots.size()) == p.degree(), ErrorCode::arity_error,
                  "polynomial of degree " << p.degree() << " applied to " << slots.size()
                                          << " form slots");
  const TorusGrid grid = slots[0]->grid;
  int total = 0;
  for (const auto* f : slots) {
    FLATLAB_REQUIRE(f->grid == grid, ErrorCode::dimension_mismatch, "grid mismatch in poly slots");
    FLATLAB_REQUIRE(!f->is_scalar() && f->algebra == p.algebra(), ErrorCode::dimension_mismatch,
                    "poly slots must be lie-valued over the polynomial's algebra");
    total += f->degree;
  }
  GridForm<S> out(grid, total, nullptr);
  if (total > grid.n || p.entries().empty()) return out;  // identically zero
  if constexpr (std::is_same_v<S, double>) {
    FLATLAB_REQUIRE(p.real_tensor(), ErrorCode::dimension_mismatch,
                    "complex tensor applied to real forms; complexify first");
  }
  GridForm<S> one(grid, 0, nullptr);
  for (auto& v : one.comp[0]) v = S(1);
  PolyRecursion<S> rec{slots, p.entries(), p.degree(), &out};
  rec.run(0, p.entries().size(), 0, one);
  return out;
}

template <class S>
GridForm<S> exterior_derivative(const GridForm<S>& w) {
  FLATLAB_REQUIRE(w.degree < w.grid.n, ErrorCode::degree_error,
                  "exterior derivative needs degree below " << w.grid.n << ", got " << w.degree);
  return d_or_zero(w);
}

template <class S>
GridForm<S> d_or_zero(const GridForm<S>& w) {
  GridForm<S> out(w.grid, w.degree + 1, w.algebra);
  if (w.degree >= w.grid.n) return out;
  const auto& tab = ComboTables::get(w.grid.n);
  const std::size_t np = w.grid.npoints();
  std::vector<S> deriv(np);
  for (int c = 0; c < w.ncomp(); ++c)
    for (const auto& term : tab.d_terms(w.degree, c))
      for (int a = 0; a < w.ncoeff(); ++a) {
        spectral_derivative(w.grid, w.field(c, a), deriv.data(), term.axis);
        S* dst = out.field(term.target, a);
        const S sign = S(double(term.sign));
        parallel_for(np, [&](std::size_t b, std::size_t e) {
          for (std::size_t i = b; i < e; ++i) dst[i] += sign * deriv[i];
        });
      }
  return out;
}

template <class S>
S integrate(const GridForm<S>& w) {
  FLATLAB_REQUIRE(w.degree == w.grid.n, ErrorCode::degree_error,
                  "integrate needs a top-degree form");
  FLATLAB_REQUIRE(w.is_scalar(), ErrorCode::dimension_mismatch, "integrate needs a scalar form");
  const std::size_t np = w.grid.npoints();
  S total = deterministic_sum(w.comp[0]);
  return total / S(double(np));
}

template <class S>
double max_norm(const GridForm<S>& w) {
  double m = 0.0;
  for (const auto& c : w.comp)
    for (const auto& v : c) m = std::max(m, abs_of(v));
  return m;
}

template <class S>
double closure_residual(const GridForm<S>& w) {
  if (w.degree >= w.grid.n) return 0.0;
  return max_norm(d_or_zero(w));
}

template <class S>
PeriodVector<S> period_vector(const GridForm<S>& w, const std::vector<int>* base,
                              bool check_closed) {
  FLATLAB_REQUIRE(w.is_scalar(), ErrorCode::dimension_mismatch,
                  "period vector needs a scalar form");
  if (check_closed) {
    double res = closure_residual(w);
    double tol = closedness_tolerance(max_norm(w));
    FLATLAB_REQUIRE(res <= tol, ErrorCode::non_closed_form,
                    "form is not closed: derivative max-norm " << res << " above " << tol);
  }
  const auto& tab = ComboTables::get(w.grid.n);
  const int q = w.degree;
  PeriodVector<S> out;
  out.n = w.grid.n;
  out.degree = q;
  std::vector<int> idx(std::size_t(w.grid.n), 0);
  if (base) idx = *base;
  std::size_t slice_count = 1;
  for (int i = 0; i < q; ++i) slice_count *= std::size_t(w.grid.N);
  std::vector<S> buf(slice_count);
  for (int c = 0; c < (q <= w.grid.n ? tab.count(q) : 0); ++c) {
    const auto& axes = tab.axes(q, c);
    std::vector<int> point = idx;
    for (std::size_t s = 0; s < slice_count; ++s) {
      std::size_t rest = s;
      for (int j = q - 1; j >= 0; --j) {
        point[std::size_t(axes[std::size_t(j)])] = int(rest % std::size_t(w.grid.N));
        rest /= std::size_t(w.grid.N);
      }
      std::size_t p = 0;
      for (int i = 0; i < w.grid.n; ++i)
        p = p * std::size_t(w.grid.N) + std::size_t(point[std::size_t(i)]);
      buf[s] = w.field(c, 0)[p];
    }
    out.entries.push_back(deterministic_sum(buf) / S(double(slice_count)));
  }
  return out;
}

ComplexForm complexify(const RealForm& w) {
  ComplexForm out(w.grid, w.degree, w.algebra);
  for (int c = 0; c < w.ncomp(); ++c) {
    const auto& src = w.comp[std::size_t(c)];
    auto& dst = out.comp[std::size_t(c)];
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = cplx(src[i], 0.0);
  }
  return out;
}

RealForm real_part(const ComplexForm& w, double* max_imag) {
  RealForm out(w.grid, w.degree, w.algebra);
  double mi = 0.0;
  for (int c = 0; c < w.ncomp(); ++c) {
    const auto& src = w.comp[std::size_t(c)];
    auto& dst = out.comp[std::size_t(c)];
    for (std::size_t i = 0; i < src.size(); ++i) {
      dst[i] = src[i].real();
      mi = std::max(mi, std::abs(src[i].imag()));
    }
  }
  if (max_imag) *max_imag = mi;
  return out;
}

namespace {
template <class S>
void fill_cosine_mode(const TorusGrid& grid, S* field, const std::vector<int>& mode, double amp,
                      double phase) {
  // amp * cos(2 pi mode.x + phase) accumulated via per-axis phase tables
  std::vector<std::vector<cplx>> tables(std::size_t(grid.n));
  for (int a = 0; a < grid.n; ++a) {
    tables[std::size_t(a)].resize(std::size_t(grid.N));
    for (int i = 0; i < grid.N; ++i) {
      double ang = kTwoPi * double(mode[std::size_t(a)]) * grid.x(i);
      tables[std::size_t(a)][std::size_t(i)] = cplx(std::cos(ang), std::sin(ang));
    }
  }
  const cplx ph(std::cos(phase), std::sin(phase));
  // row-major: the phase along the last axis repeats every N points
  const std::size_t rows = grid.npoints() / std::size_t(grid.N);
  const auto& last = tables[std::size_t(grid.n - 1)];
  parallel_for(rows, [&](std::size_t b, std::size_t e) {
    std::vector<int> ix(std::size_t(grid.n), 0);
    for (std::size_t row = b; row < e; ++row) {
      std::size_t rest = row;
      for (int a = grid.n - 2; a >= 0; --a) {
        ix[std::size_t(a)] = int(rest % std::size_t(grid.N));
        rest /= std::size_t(grid.N);
      }
      cplx z = ph;
      for (int a = 0; a < grid.n - 1; ++a)
        z *= tables[std::size_t(a)][std::size_t(ix[std::size_t(a)])];
      S* out = field + row * std::size_t(grid.N);
      for (int i = 0; i < grid.N; ++i) {
        const cplx v = z * last[std::size_t(i)];
        out[i] += S(amp * v.real());
      }
    }
  });
}
}  // namespace

template <class S>
GridForm<S> random_band_limited(const TorusGrid& grid, int degree, AlgebraPtr algebra, Rng& rng,
                                int max_mode, double amplitude, int terms) {
  FLATLAB_REQUIRE(max_mode < grid.N / 2, ErrorCode::config_error,
                  "band limit must stay below N/2");
  GridForm<S> out(grid, degree, std::move(algebra));
  std::vector<int> mode(std::size_t(grid.n));
  for (int c = 0; c < out.ncomp(); ++c)
    for (int a = 0; a < out.ncoeff(); ++a)
      for (int t = 0; t < terms; ++t) {
        for (int i = 0; i < grid.n; ++i) mode[std::size_t(i)] = rng.uniform_int(-max_mode, max_mode);
        double amp = amplitude * rng.uniform(0.2, 1.0);
        double phase = rng.uniform(0.0, kTwoPi);
        fill_cosine_mode(grid, out.field(c, a), mode, amp, phase);
      }
  return out;
}

template <class S>
GridForm<S> basis_form(const TorusGrid& grid, const std::vector<int>& axes) {
  const auto& tab = ComboTables::get(grid.n);
  GridForm<S> out(grid, int(axes.size()), nullptr);
  std::uint32_t mask = 0;
  for (int a : axes) mask |= 1u << a;
  int c = tab.comp_of_mask(int(axes.size()), mask);
  for (auto& v : out.comp[std::size_t(c)]) v = S(1);
  return out;
}

// explicit instantiations
#define FLATLAB_INSTANTIATE(S)                                                                   \
  template struct GridForm<S>;                                                                   \
  template void check_same_grid<S>(const GridForm<S>&, const GridForm<S>&);                      \
  template GridForm<S> operator+<S>(const GridForm<S>&, const GridForm<S>&);                     \
  template GridForm<S> operator-<S>(const GridForm<S>&, const GridForm<S>&);                     \
  template GridForm<S> scaled<S>(const GridForm<S>&, S);                                         \
  template void add_scaled<S>(GridForm<S>&, const GridForm<S>&, S);                              \
  template GridForm<S> wedge<S>(const GridForm<S>&, const GridForm<S>&);                         \
  template GridForm<S> wedge_bracket<S>(const GridForm<S>&, const GridForm<S>&);                 \
  template GridForm<S> wedge_pair<S>(const InvariantPolynomial&, const GridForm<S>&,             \
                                     const GridForm<S>&);                                        \
  template GridForm<S> poly_eval_forms<S>(const InvariantPolynomial&,                            \
                                          const std::vector<const GridForm<S>*>&);               \
  template GridForm<S> exterior_derivative<S>(const GridForm<S>&);                               \
  template GridForm<S> d_or_zero<S>(const GridForm<S>&);                                         \
  template S integrate<S>(const GridForm<S>&);                                                   \
  template double max_norm<S>(const GridForm<S>&);                                               \
  template double closure_residual<S>(const GridForm<S>&);                                       \
  template PeriodVector<S> period_vector<S>(const GridForm<S>&, const std::vector<int>*, bool);  \
  template GridForm<S> random_band_limited<S>(const TorusGrid&, int, AlgebraPtr, Rng&, int,      \
                                              double, int);                                     \
  template GridForm<S> basis_form<S>(const TorusGrid&, const std::vector<int>&);

FLATLAB_INSTANTIATE(double)
FLATLAB_INSTANTIATE(cplx)
#undef FLATLAB_INSTANTIATE

}  // namespace flatlab
