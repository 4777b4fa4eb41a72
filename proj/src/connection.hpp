#ifndef FLATLAB_CONNECTION_HPP
#define FLATLAB_CONNECTION_HPP

#include <functional>
#include <vector>

#include "forms.hpp"

namespace flatlab {

// Connection on the trivialized bundle T^n x G: an algebra-valued 1-form.
template <class S>
struct Connection {
  GridForm<S> form;  // degree 1, lie-valued

  Connection() = default;
  explicit Connection(GridForm<S> f) : form(std::move(f)) {
    FLATLAB_REQUIRE(form.degree == 1 && !form.is_scalar(), ErrorCode::dimension_mismatch,
                    "a connection is a lie-valued 1-form");
  }
  const TorusGrid& grid() const { return form.grid; }
  const AlgebraPtr& algebra() const { return form.algebra; }
};

using RealConnection = Connection<double>;
using ComplexConnection = Connection<cplx>;

// Grid of group matrices, entry-major (each matrix entry is a scalar field).
struct GaugeField {
  TorusGrid grid;
  AlgebraPtr algebra;
  std::vector<cplx> data;  // (d*d) fields of npoints each

  GaugeField() = default;
  GaugeField(const TorusGrid& g, AlgebraPtr alg);
  int d() const { return algebra->mat_dim(); }
  cplx* entry(int r, int c) {
    return data.data() + (std::size_t(r) * d() + std::size_t(c)) * grid.npoints();
  }
  const cplx* entry(int r, int c) const {
    return data.data() + (std::size_t(r) * d() + std::size_t(c)) * grid.npoints();
  }
  void get(std::size_t p, cplx* m) const;   // m[d*d]
  void set(std::size_t p, const cplx* m);

  double unitarity_defect() const;       // max over nodes of ||Phi^dag Phi - I||_F
  double fourier_tail() const;           // max tail fraction over entries
  void validate(double unitary_tol = 1e-10, double tail_tol = 1e-8) const;
};

GaugeField identity_gauge(const TorusGrid& grid, const AlgebraPtr& algebra);
GaugeField gauge_product(const GaugeField& a, const GaugeField& b);   // pointwise a*b
GaugeField gauge_inverse(const GaugeField& a);                        // adjoint (unitary)
// Phi(x) = exp(f(x) H) for an anti-Hermitian H; f sampled per node.
GaugeField gauge_exp_profile(const TorusGrid& grid, const AlgebraPtr& algebra, const Matrix& h,
                             const std::function<double(const double*)>& profile);
// Phi = exp(X) for a lie-valued 0-form X (compact real algebras).
GaugeField gauge_exp(const RealForm& x0form);
// Entries supplied directly (matrix must be unitary per node for compact algebras).
GaugeField gauge_from_matrices(const TorusGrid& grid, const AlgebraPtr& algebra,
                               const std::function<void(const double*, cplx*)>& eval);
GaugeField random_gauge_field(const TorusGrid& grid, const AlgebraPtr& algebra, Rng& rng,
                              int max_mode, double amplitude);

// Serialization bridge: a gauge field is a gl(d)-valued 0-form whose
// coefficients in the E_kl basis are the matrix entries.
ComplexForm gauge_to_form(const GaugeField& phi);
GaugeField gauge_from_form(const ComplexForm& form, const AlgebraPtr& algebra);

// F^A = dA + (1/2)[A ^ A]; components F_ij = d_i A_j - d_j A_i + [A_i, A_j].
template <class S>
GridForm<S> curvature(const Connection<S>& a);

// nabla^A xi = d xi + [A ^ xi]
template <class S>
GridForm<S> covariant_derivative(const Connection<S>& a, const GridForm<S>& xi);

template <class S>
double flatness_residual(const Connection<S>& a);

inline constexpr double kFlatnessTol = 1e-7;

template <class S>
bool is_flat(const Connection<S>& a) {
  return flatness_residual(a) <= kFlatnessTol;
}

// A -> Phi A Phi^{-1} - (d Phi) Phi^{-1}
template <class S>
Connection<S> gauge_transform(const GaugeField& phi, const Connection<S>& a,
                              bool validate_field = true);

// Pointwise adjoint action Phi w Phi^{-1} on a lie-valued form.
template <class S>
GridForm<S> gauge_adjoint(const GaugeField& phi, const GridForm<S>& w);

// Constant connection sum theta_i dx^i from pairwise commuting elements.
template <class S>
Connection<S> cartan_flat(const TorusGrid& grid, const AlgebraPtr& algebra,
                          const std::vector<std::vector<S>>& theta_coeffs);

// Phi(x) = exp((w . x) H) with exp(H) = I, single-valued on the torus.
GaugeField winding_gauge(const TorusGrid& grid, const AlgebraPtr& algebra,
                         const std::vector<int>& w, const Matrix& h);

// Winding numbers from the logarithmic derivative, one per axis:
// integral of tr(H^dag (d_i Phi) Phi^{-1}) / tr(H^dag H).
std::vector<double> recover_windings(const GaugeField& phi, const Matrix& h);

template <class S>
Connection<S> zero_connection(const TorusGrid& grid, const AlgebraPtr& algebra);

template <class S>
Connection<S> pure_gauge(const GaugeField& phi);

template <class S>
Connection<S> random_connection(const TorusGrid& grid, const AlgebraPtr& algebra, Rng& rng,
                                int max_mode, double amplitude);

}  // namespace flatlab

#endif
