#ifndef FLATLAB_FAMILIES_HPP
#define FLATLAB_FAMILIES_HPP

#include <functional>
#include <string>
#include <vector>

#include "connection.hpp"

namespace flatlab {

// One quadrature axis: composite Gauss-Legendre on [0,1], or uniform
// (trapezoid = spectral) nodes on a periodic axis.
struct QuadAxis {
  bool periodic = false;
  int order = 8;    // Gauss points per panel; node count when periodic
  int panels = 1;
  std::vector<double> nodes;
  std::vector<double> weights;

  static QuadAxis gauss(int order, int panels = 1);
  static QuadAxis periodic_uniform(int nodes);
};

// Oriented parameter manifold T realized as an interval or a cylinder
// (t in [0,1] Gauss axis first, periodic s axis second; orientation dt ^ ds).
struct ParameterDomain {
  enum class Shape { interval, cylinder };
  Shape shape = Shape::interval;
  int k = 1;
  std::vector<QuadAxis> axes;

  static ParameterDomain interval(int order = 8, int panels = 2);
  static ParameterDomain cylinder(int gauss_order = 8, int gauss_panels = 2, int loop_nodes = 32);

  std::size_t node_count() const;
  // flattened node index -> coordinates + weight (axis 0 slowest)
  void node(std::size_t i, double* u, double* weight) const;
  double volume() const;
};

// Gauss-Legendre integral of f over [0,1].
double gauss01(const std::function<double(double)>& f, int order = 8, int panels = 2);

// Smooth map from the parameter domain into connections, with analytic
// partial derivatives per axis.
template <class S>
struct ConnectionFamily {
  std::string kind;
  int k = 1;
  ParameterDomain domain;
  std::function<Connection<S>(const double*)> at;
  std::function<GridForm<S>(const double*, int)> partial;
  std::vector<std::vector<double>> boundary_samples;  // parameter points on S = dT

  Connection<S> at_node(const std::vector<double>& u) const { return at(u.data()); }
};

// Loop of connections A(s), s in [0,1], A(1) = A(0), with derivative dA/ds.
template <class S>
struct ConnectionLoop {
  std::function<Connection<S>(double)> at;
  std::function<GridForm<S>(double)> derivative;
};

// Loop of gauge transformations with its right logarithmic s-derivative
// W(s) = (d_s Phi) Phi^{-1} as a lie-valued 0-form.
struct GaugeLoop {
  std::function<GaugeField(double)> at;
  std::function<RealForm(double)> log_derivative;
};

// f(t) = (1-t) A0 + t A1
template <class S>
ConnectionFamily<S> straight_line_family(const Connection<S>& a0, const Connection<S>& a1,
                                         int gauss_order = 8, int gauss_panels = 2);

// f(t,s) = (1-t) A0 + t L(s), the cone over a loop (A0 defaults to L(0)).
template <class S>
ConnectionFamily<S> cone_family(const ConnectionLoop<S>& loop, const Connection<S>& a0,
                                int gauss_order = 8, int gauss_panels = 2, int loop_nodes = 32);

// Same boundary, different interior: t -> sigma(t) plus an interior bump
// vanishing on the boundary. Used for extension-independence checks.
template <class S>
ConnectionFamily<S> reparametrized_family(const ConnectionFamily<S>& f,
                                          const GridForm<S>* bump_direction = nullptr,
                                          double bump_amp = 0.0);

// k=1 family from M+1 uniform snapshots with 4th-order finite-difference
// partials (one-sided at the ends).
template <class S>
ConnectionFamily<S> tabulated_path_family(const std::vector<Connection<S>>& snapshots,
                                          int gauss_order = 8, int gauss_panels = 2);

// Loop inside a fixed commuting (Cartan) set: A(s) = sum_i theta_i(s) dx^i,
// theta_i(s) = base_i + cos(2 pi s) cos_i + sin(2 pi s) sin_i, all coefficients
// multiples of pairwise-commuting directions.
template <class S>
ConnectionLoop<S> cartan_circle_loop(const TorusGrid& grid, const AlgebraPtr& algebra,
                                     const std::vector<std::vector<S>>& base,
                                     const std::vector<std::vector<S>>& cos_part,
                                     const std::vector<std::vector<S>>& sin_part,
                                     bool flatten_ends = false);

// A(s) = Phi(s) . A0 (gauge orbit; flat whenever A0 is flat).
template <class S>
ConnectionLoop<S> gauge_orbit_loop(const GaugeLoop& loop, const Connection<S>& a0);

// Concatenation running l1 on [0,1/2] and l2 on [1/2,1]. Loops should be
// built with flattened parametrization so the seam stays smooth.
template <class S>
ConnectionLoop<S> concatenate_loops(const ConnectionLoop<S>& l1, const ConnectionLoop<S>& l2);

// s -> L(2s mod 1): the loop traversed twice.
template <class S>
ConnectionLoop<S> double_traversal(const ConnectionLoop<S>& loop);

// Pointwise sum of two loops. Flatness of the sum is the caller's concern
// (it holds when the summands commute, e.g. one of them is central).
template <class S>
ConnectionLoop<S> sum_loops(const ConnectionLoop<S>& l1, const ConnectionLoop<S>& l2);

// s -> Phi(s) . L(s): the loop moved by a parameter-dependent gauge loop.
template <class S>
ConnectionLoop<S> gauge_transformed_loop(const GaugeLoop& phi, const ConnectionLoop<S>& loop);

// Loop reparametrized by a smooth circle map fixing the basepoint:
// s -> L(s + amp sin(2 pi s) / (2 pi)).
template <class S>
ConnectionLoop<S> reparametrized_loop(const ConnectionLoop<S>& loop, double amp = 0.5);

// Smooth step with flat ends used to glue loops: psi(psi(s)),
// psi(s) = s - sin(2 pi s)/(2 pi). Returns value and derivative.
void flatten_map(double s, double* value, double* deriv);

// Conjugation rotor loop in the su(2) block of u(2) (or su(2) itself):
// Phi(s,x) = exp(c s B) V(x) exp(-c s B), V a product of axis windings,
// c = 4 pi. Entries are finite trig polynomials, so small grids represent
// the loop exactly. rotor_axis picks the conjugation direction.
GaugeLoop rotor_gauge_loop(const TorusGrid& grid, const AlgebraPtr& algebra,
                           int rotor_axis = 0, int x_start = 0, int x_count = -1);

// Pointwise product loop s -> l1(s) l2(s), with
// W = W1 + Ad_{Phi1} W2.
GaugeLoop product_gauge_loop(const GaugeLoop& l1, const GaugeLoop& l2);

// Degree loop on T^2: Phi(s,x) built from the normalized quaternion
// q = (sin 2 pi s, sin 2 pi x1, sin 2 pi x2, c - cos 2 pi s - cos 2 pi x1 -
// cos 2 pi x2); as a map S^1 x T^2 -> SU(2) it has mapping degree +-1.
GaugeLoop quaternion_degree_loop(const TorusGrid& grid, const AlgebraPtr& algebra,
                                 double c = 2.0);

// Loop of winding gauges exp((w.x + m s) H) with exp(H) = I.
GaugeLoop winding_gauge_loop(const TorusGrid& grid, const AlgebraPtr& algebra,
                             const std::vector<int>& w, int m_loops, const Matrix& h);

// Product of axis windings along rotating su(2) directions,
// Phi(x) = prod_i exp(4 pi w_i x^i B_{i mod 3}): single-valued, exactly
// band-limited, and pure-gauge transforms of flat connections stay exactly
// representable on coarse grids.
GaugeField su2_winding_product_gauge(const TorusGrid& grid, const AlgebraPtr& algebra,
                                     const std::vector<int>& w);

// Mapping degree of (s,x) -> Phi as a map T^3 -> S^3, for 2x2 unitary loops
// with constant determinant phase: (1/2 pi^2) integral of the pulled-back
// volume, computed with spectral derivatives. Independent route used to
// validate integer loop degrees.
double su2_mapping_degree(const GaugeLoop& loop, const TorusGrid& grid, int s_nodes = 64);

}  // namespace flatlab

#endif
