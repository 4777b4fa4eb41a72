#ifndef FLATLAB_DOLBEAULT_HPP
#define FLATLAB_DOLBEAULT_HPP

#include "invariants.hpp"

namespace flatlab {

// Standard complex structure on T^{2m}: z^j = x^{2j-1} + i x^{2j} (pairs of
// consecutive real axes).
struct ComplexStructure {
  TorusGrid grid;
  int m = 0;  // complex dimension

  explicit ComplexStructure(const TorusGrid& g) : grid(g), m(g.n / 2) {
    FLATLAB_REQUIRE(g.n % 2 == 0, ErrorCode::dimension_mismatch,
                    "a complex structure needs an even-dimensional torus");
  }
};

// Projection onto the (a,b) part in the dz/dzbar frame, returned in the real
// frame with complex coefficients. Idempotent; summing over a+b = deg gives
// the identity.
ComplexForm bidegree_project(const ComplexStructure& cs, const ComplexForm& w, int a, int b);

// Labeled bidegree pieces of a form: the list of ((a,b), projection).
struct BigradedPart {
  int a = 0, b = 0;
  ComplexForm part;
};
std::vector<BigradedPart> bidegree_split(const ComplexStructure& cs, const ComplexForm& w);

// rho^{a,b+1} o d summed over the bidegree pieces of w.
ComplexForm dbar(const ComplexStructure& cs, const ComplexForm& w);
// rho^{a+1,b} o d summed over the bidegree pieces of w.
ComplexForm del(const ComplexStructure& cs, const ComplexForm& w);

// max-norm of the (0,2) part of the curvature; membership in the vanishing
// set uses the flatness threshold.
double f02_residual(const ComplexStructure& cs, const ComplexConnection& a);

// (0, 2r-k) projection of the curvature contraction.
ComplexForm dolbeault_contraction(const ComplexStructure& cs, const InvariantPolynomial& p,
                                  const ComplexConnection& a,
                                  const std::vector<const ComplexForm*>& tangents);

struct DolbeaultInvariant {
  ComplexForm form;  // (0, 2r-k) part, real frame
  double dbar_residual = 0.0;
  double worst_boundary_f02 = 0.0;
  bool boundary_in_f02 = false;
  bool class_level_window = false;  // 1 < k < r
  PeriodVector<cplx> periods;
};

// Quadrature of the projected contraction over the family, with the boundary
// checked against the vanishing-(0,2) set instead of flatness.
DolbeaultInvariant dolbeault_family_invariant(const ComplexStructure& cs,
                                              const InvariantPolynomial& p,
                                              const ConnectionFamily<cplx>& fam);

// Period vectors of the (0,q) projections of the integer generators dx^S;
// the image lattice of integral classes in the projected period space.
std::vector<PeriodVector<cplx>> dolbeault_integer_lattice(const ComplexStructure& cs, int q);

// Distance from v to the integer span of the lattice generators (Babai
// rounding on the least-squares coefficients).
double reduce_mod_lattice(const PeriodVector<cplx>& v,
                          const std::vector<PeriodVector<cplx>>& lattice);

ComplexConnection complexify_connection(const RealConnection& a);
ConnectionFamily<cplx> complexify_family(const ConnectionFamily<double>& fam);

}  // namespace flatlab

#endif
