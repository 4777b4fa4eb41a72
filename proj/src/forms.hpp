#ifndef FLATLAB_FORMS_HPP
#define FLATLAB_FORMS_HPP

#include <complex>
#include <string>
#include <vector>

#include "algebra.hpp"
#include "grid.hpp"
#include "parallel.hpp"

namespace flatlab {

// Differential form on the torus grid, scalar- or algebra-valued. Components
// follow the strictly increasing multi-index order of ComboTables; each
// component stores its coefficient fields back to back (coefficient-major).
// A degree above n carries no components and is the zero form.
template <class S>
struct GridForm {
  TorusGrid grid;
  int degree = 0;
  int lie_dim = 0;  // 0 = scalar-valued
  AlgebraPtr algebra;
  std::vector<std::vector<S>> comp;

  GridForm() = default;
  GridForm(const TorusGrid& g, int deg, AlgebraPtr alg = nullptr)
      : grid(g), degree(deg), lie_dim(alg ? alg->dim() : 0), algebra(std::move(alg)) {
    FLATLAB_REQUIRE(degree >= 0, ErrorCode::degree_error, "negative form degree");
    int nc = degree <= g.n ? ComboTables::get(g.n).count(degree) : 0;
    comp.assign(std::size_t(nc),
                std::vector<S>(std::size_t(ncoeff()) * g.npoints(), S(0)));
  }

  int ncoeff() const { return lie_dim == 0 ? 1 : lie_dim; }
  int ncomp() const { return int(comp.size()); }
  bool is_scalar() const { return lie_dim == 0; }
  S* field(int c, int a) { return comp[std::size_t(c)].data() + std::size_t(a) * grid.npoints(); }
  const S* field(int c, int a) const {
    return comp[std::size_t(c)].data() + std::size_t(a) * grid.npoints();
  }
  S value_at(int c, int a, const std::vector<int>& idx) const;
};

using RealForm = GridForm<double>;
using ComplexForm = GridForm<cplx>;

// Integrals of a closed scalar form over the coordinate subtori through a base
// point; the computable stand-in for its cohomology class.
template <class S>
struct PeriodVector {
  int n = 0;
  int degree = 0;
  std::vector<S> entries;  // indexed like degree-q components
};

template <class S>
void check_same_grid(const GridForm<S>& a, const GridForm<S>& b);

template <class S>
GridForm<S> operator+(const GridForm<S>& a, const GridForm<S>& b);
template <class S>
GridForm<S> operator-(const GridForm<S>& a, const GridForm<S>& b);
template <class S>
GridForm<S> scaled(const GridForm<S>& a, S factor);
template <class S>
void add_scaled(GridForm<S>& dst, const GridForm<S>& src, S factor);

// Pointwise wedge with Koszul signs. At most one factor may be lie-valued.
template <class S>
GridForm<S> wedge(const GridForm<S>& a, const GridForm<S>& b);

// Graded bracket wedge of two lie-valued forms: [w ^ e]_K = sum sign [w_I, e_J].
template <class S>
GridForm<S> wedge_bracket(const GridForm<S>& a, const GridForm<S>& b);

// Bilinear pairing wedge: scalar form sum_{ab} P(a,b) w^a ^ e^b.
template <class S>
GridForm<S> wedge_pair(const InvariantPolynomial& pairing, const GridForm<S>& a,
                       const GridForm<S>& b);

// Multilinear evaluation of an invariant polynomial on lie-valued form slots,
// wedging the scalar parts: sum_T T(a_1..a_r) w_1^{a_1} ^ ... ^ w_r^{a_r}.
template <class S>
GridForm<S> poly_eval_forms(const InvariantPolynomial& p,
                            const std::vector<const GridForm<S>*>& slots);

// Spectral exterior derivative. Degree must be below n.
template <class S>
GridForm<S> exterior_derivative(const GridForm<S>& w);

// d, extended by zero on degrees >= n (every such dw is identically zero).
template <class S>
GridForm<S> d_or_zero(const GridForm<S>& w);

// Riemann sum of a top-degree scalar form; exact for band-limited integrands.
template <class S>
S integrate(const GridForm<S>& w);

template <class S>
double max_norm(const GridForm<S>& w);

// max_norm(d w), zero for top degree.
template <class S>
double closure_residual(const GridForm<S>& w);

inline double closedness_tolerance(double max_norm_w) { return 1e-7 * (1.0 + max_norm_w); }

// Periods over coordinate subtori through grid point `base` (default 0).
// Requires a closed scalar form; the defect is reported in the error.
template <class S>
PeriodVector<S> period_vector(const GridForm<S>& w, const std::vector<int>* base = nullptr,
                              bool check_closed = true);

ComplexForm complexify(const RealForm& w);
RealForm real_part(const ComplexForm& w, double* max_imag = nullptr);

// Sum of `terms` random cosine modes with |kappa| <= max_mode per axis.
template <class S>
GridForm<S> random_band_limited(const TorusGrid& grid, int degree, AlgebraPtr algebra, Rng& rng,
                                int max_mode, double amplitude, int terms = 3);

// dx^{i1} ^ ... (constant coefficient 1 on one component)
template <class S>
GridForm<S> basis_form(const TorusGrid& grid, const std::vector<int>& axes);

}  // namespace flatlab

#endif
