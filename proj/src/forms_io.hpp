#ifndef FLATLAB_FORMS_IO_HPP
#define FLATLAB_FORMS_IO_HPP

#include <string>

#include "forms.hpp"

namespace flatlab {

// Binary layout: magic "FLFORM01", then u32 fields n, N, degree, value_type
// (0 scalar / 1 lie), scalar_kind (0 real / 1 complex), algebra-name length,
// the algebra name bytes, u32 lie_dim; then the component arrays in
// lexicographic multi-index order, coefficient-major, grid points row-major,
// native little-endian doubles (re,im pairs when complex).
void save_form(const std::string& path, const RealForm& w);
void save_form(const std::string& path, const ComplexForm& w);

struct LoadedForm {
  bool is_complex = false;
  RealForm real;
  ComplexForm complex_;
};

LoadedForm load_form(const std::string& path);

void form_to_csv(const LoadedForm& form, const std::string& csv_path);

}  // namespace flatlab

#endif
