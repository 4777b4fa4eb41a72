#ifndef FLATLAB_PRESETS_HPP
#define FLATLAB_PRESETS_HPP

#include <string>
#include <vector>

#include "algebra.hpp"

namespace flatlab {

// Named polynomial presets per algebra. Integral-class presets carry the
// i/(2 pi) Chern-Weil factor per curvature slot, so winding backgrounds pair
// to integers.
struct PolynomialPreset {
  std::string name;        // e.g. "su2_inner_product", "u2_p2p1"
  std::string algebra;     // algebra the preset lives on
  int degree = 0;
  bool integral_class = false;
};

std::vector<std::string> algebra_catalog();
std::vector<PolynomialPreset> polynomial_catalog();
std::vector<std::string> family_kind_catalog();
std::vector<std::string> generator_catalog();

// Instantiate a preset by its catalog name ("<algebra>_<poly>").
InvariantPolynomial make_polynomial(const AlgebraPtr& algebra, const std::string& name);

// Stable, human-readable catalog (one entry per line, fixed order).
std::string render_catalog();

}  // namespace flatlab

#endif
