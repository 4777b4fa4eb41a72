#ifndef FLATLAB_INVARIANTS_HPP
#define FLATLAB_INVARIANTS_HPP

#include "families.hpp"
#include "mixed_forms.hpp"

namespace flatlab {

// Degree-r invariant polynomial with k tangent slots and r-k curvature slots,
// scaled by N_{r,k} = r!/(r-k)!. Identically zero when k > r, and represented
// by the empty form when 2r-k exceeds the torus dimension.
template <class S>
GridForm<S> curvature_contraction(const InvariantPolynomial& p, const Connection<S>& a,
                                  const std::vector<const GridForm<S>*>& tangents);

// Same contraction without the N_{r,k} factor.
template <class S>
GridForm<S> curvature_contraction_raw(const InvariantPolynomial& p, const Connection<S>& a,
                                      const std::vector<const GridForm<S>*>& tangents);

struct ConvergenceRow {
  std::vector<double> u;
  double weight = 0.0;
  double integrand_norm = 0.0;
};

template <class S>
struct FamilyInvariant {
  GridForm<S> form;  // scalar, degree 2r-k on the torus
  double closure_residual = 0.0;
  double worst_boundary_residual = 0.0;
  bool boundary_flat = false;
  bool closure_validated = false;  // boundary flat and residual within tolerance
  PeriodVector<S> periods;
  bool periods_valid = false;
  std::vector<ConvergenceRow> convergence;
};

struct InvariantOptions {
  bool check_boundary = true;
  bool collect_convergence = false;
};

// Quadrature of the pulled-back contraction over the parameter domain
// (tangent slots in axis order, orientation du^1 ^ ... ^ du^k).
template <class S>
FamilyInvariant<S> family_invariant(const InvariantPolynomial& p, const ConnectionFamily<S>& fam,
                                    const InvariantOptions& opt = {});

// Independent route through the product-space curvature: its mixed blocks are
// assembled explicitly and the parameter directions are contracted out of
// p(F-hat) before quadrature.
template <class S>
GridForm<S> family_invariant_product_route(const InvariantPolynomial& p,
                                           const ConnectionFamily<S>& fam);

template <class S>
struct TransgressionResult {
  GridForm<S> boundary_integral;  // degree 2r-k form on the torus
  double max_d_residual = 0.0;    // worst per-node defect of p(F_u) - p(F_ref) - d theta
};

// Path transgression theta(u) = r * int_0^1 p(A_u - A_ref, F_tau, ...) dtau on
// the product space, reported through its boundary integral over S = dT.
// With A_ref equal to the family base the boundary integral reproduces the
// invariant exactly as a form (the repeated 1-form slots kill the fiber term);
// for other references the two agree in cohomology.
template <class S>
TransgressionResult<S> transgression_route(const InvariantPolynomial& p,
                                           const ConnectionFamily<S>& fam,
                                           const Connection<S>& a_ref, int tau_order = 8,
                                           int tau_panels = 1);

// Closed form of the segment invariant (k=1) between flat endpoints:
// N_{r,1} * c_r * p(xi, C, ..., C), C_ij = [xi_i, xi_j],
// c_r = int_0^1 (t^2-t)^{r-1} dt evaluated by quadrature.
template <class S>
GridForm<S> segment_invariant_closed_form(const InvariantPolynomial& p, const Connection<S>& a0,
                                          const Connection<S>& a1);

// Closed form of the loop-cone invariant (k=2) for a loop of flat connections:
// N_{r,2} * J_r * int_0^1 p(xi, xi', C, ..., C) ds, J_r = int_0^1 t(t^2-t)^{r-2} dt.
template <class S>
GridForm<S> loop_invariant_closed_form(const InvariantPolynomial& p,
                                       const ConnectionLoop<S>& loop, const Connection<S>& a0,
                                       int s_nodes = 32);

// int_M int_0^1 p(A(s), dA/ds) ds for a loop of gauge transformations acting
// on a flat base over T^2; integer-valued for integral-class metrics.
template <class S>
double gauge_loop_degree(const InvariantPolynomial& p, const GaugeLoop& loop,
                         const Connection<S>& a0, int s_nodes = 64);

// omega(x1, x2) = int_{T^2} tr(x1 ^ x2)
template <class S>
S atiyah_bott_pairing(const GridForm<S>& xi1, const GridForm<S>& xi2);

// Entrywise reduction into [0,1).
PeriodVector<double> mod_z_reduce(const PeriodVector<double>& periods);

// max distance of the entries to the nearest integer
double integer_defect(const PeriodVector<double>& periods);

// max |a_i - b_i|
template <class S>
double period_distance(const PeriodVector<S>& a, const PeriodVector<S>& b);

}  // namespace flatlab

#endif
