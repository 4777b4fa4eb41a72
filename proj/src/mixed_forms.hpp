#ifndef FLATLAB_MIXED_FORMS_HPP
#define FLATLAB_MIXED_FORMS_HPP

#include <cstdint>
#include <map>

#include "forms.hpp"

namespace flatlab {

// Form on (parameter space) x (torus), evaluated at one parameter point:
// sum over subsets S of the k parameter axes of du^S ^ w_S, with the du
// factors written first. Only the torus dependence is stored; parameter
// derivatives never enter the operations below.
template <class S>
struct MixedForm {
  int pdim = 0;          // number of parameter axes
  int total_degree = 0;  // |mask| + w_S.degree for every part
  TorusGrid grid;
  AlgebraPtr algebra;    // null for scalar parts
  std::map<std::uint32_t, GridForm<S>> parts;

  MixedForm() = default;
  MixedForm(int pdim_, int degree, const TorusGrid& g, AlgebraPtr alg)
      : pdim(pdim_), total_degree(degree), grid(g), algebra(std::move(alg)) {}

  void set_part(std::uint32_t mask, GridForm<S> w);
  const GridForm<S>* part(std::uint32_t mask) const;
};

// Multilinear slot evaluation with du bookkeeping: expands every slot over its
// parts, contracts the tensor on the torus factors, and prefixes du^{union}.
template <class S>
MixedForm<S> mixed_poly_eval(const InvariantPolynomial& p,
                             const std::vector<const MixedForm<S>*>& slots);

// i_{du^1} ... i_{du^k} applied to the full-mask part: (-1)^{k(k-1)/2} w_full.
template <class S>
GridForm<S> contract_all_parameters(const MixedForm<S>& w);

int parameter_merge_sign(int pdim, std::uint32_t a, std::uint32_t b);

}  // namespace flatlab

#endif
