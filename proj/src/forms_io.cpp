#include "forms_io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

namespace flatlab {

namespace {
constexpr char kMagic[8] = {'F', 'L', 'F', 'O', 'R', 'M', '0', '1'};

void write_u32(std::ofstream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::ifstream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

template <class S>
void save_impl(const std::string& path, const GridForm<S>& w, bool complex_kind) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  FLATLAB_REQUIRE(os.good(), ErrorCode::io_error, "cannot open '" << path << "' for writing");
  os.write(kMagic, sizeof(kMagic));
  write_u32(os, std::uint32_t(w.grid.n));
  write_u32(os, std::uint32_t(w.grid.N));
  write_u32(os, std::uint32_t(w.degree));
  write_u32(os, w.is_scalar() ? 0u : 1u);
  write_u32(os, complex_kind ? 1u : 0u);
  std::string alg = w.algebra ? w.algebra->name() : "";
  write_u32(os, std::uint32_t(alg.size()));
  os.write(alg.data(), std::streamsize(alg.size()));
  write_u32(os, std::uint32_t(w.lie_dim));
  for (const auto& c : w.comp)
    os.write(reinterpret_cast<const char*>(c.data()), std::streamsize(c.size() * sizeof(S)));
  FLATLAB_REQUIRE(os.good(), ErrorCode::io_error, "write to '" << path << "' failed");
}
}  // namespace

void save_form(const std::string& path, const RealForm& w) { save_impl(path, w, false); }
void save_form(const std::string& path, const ComplexForm& w) { save_impl(path, w, true); }

LoadedForm load_form(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  FLATLAB_REQUIRE(is.good(), ErrorCode::io_error, "cannot open '" << path << "'");
  char magic[8];
  is.read(magic, sizeof(magic));
  FLATLAB_REQUIRE(is.good() && std::memcmp(magic, kMagic, 8) == 0, ErrorCode::io_error,
                  "'" << path << "' is not a form dump");
  int n = int(read_u32(is));
  int N = int(read_u32(is));
  int degree = int(read_u32(is));
  std::uint32_t value_type = read_u32(is);
  std::uint32_t scalar_kind = read_u32(is);
  std::uint32_t alg_len = read_u32(is);
  std::string alg(alg_len, '\0');
  is.read(alg.data(), std::streamsize(alg_len));
  std::uint32_t lie_dim = read_u32(is);
  FLATLAB_REQUIRE(is.good(), ErrorCode::io_error, "truncated form header in '" << path << "'");

  AlgebraPtr algebra;
  if (value_type == 1) {
    algebra = LieAlgebraBasis::make(alg);
    FLATLAB_REQUIRE(std::uint32_t(algebra->dim()) == lie_dim, ErrorCode::io_error,
                    "algebra dimension mismatch in '" << path << "'");
  }
  LoadedForm out;
  out.is_complex = scalar_kind == 1;
  TorusGrid grid(n, N);
  if (out.is_complex) {
    out.complex_ = ComplexForm(grid, degree, algebra);
    for (auto& c : out.complex_.comp)
      is.read(reinterpret_cast<char*>(c.data()), std::streamsize(c.size() * sizeof(cplx)));
  } else {
    out.real = RealForm(grid, degree, algebra);
    for (auto& c : out.real.comp)
      is.read(reinterpret_cast<char*>(c.data()), std::streamsize(c.size() * sizeof(double)));
  }
  FLATLAB_REQUIRE(is.good(), ErrorCode::io_error, "truncated form data in '" << path << "'");
  return out;
}

void form_to_csv(const LoadedForm& form, const std::string& csv_path) {
  const TorusGrid grid = form.is_complex ? form.complex_.grid : form.real.grid;
  const int degree = form.is_complex ? form.complex_.degree : form.real.degree;
  const int ncomp = form.is_complex ? form.complex_.ncomp() : form.real.ncomp();
  const int ncoeff = form.is_complex ? form.complex_.ncoeff() : form.real.ncoeff();
  const auto& tab = ComboTables::get(grid.n);

  std::FILE* f = std::fopen(csv_path.c_str(), "w");
  FLATLAB_REQUIRE(f != nullptr, ErrorCode::io_error, "cannot open '" << csv_path << "'");
  std::fprintf(f, "component,coeff,point");
  for (int a = 0; a < grid.n; ++a) std::fprintf(f, ",x%d", a + 1);
  std::fprintf(f, ",re,im\n");
  std::vector<int> idx(std::size_t(grid.n));
  for (int c = 0; c < ncomp; ++c) {
    std::string comp_name = "d";
    for (int a : tab.axes(degree, c)) comp_name += "x" + std::to_string(a + 1);
    if (degree == 0) comp_name = "1";
    for (int a = 0; a < ncoeff; ++a)
      for (std::size_t p = 0; p < grid.npoints(); ++p) {
        grid.coords(p, idx.data());
        double re, im;
        if (form.is_complex) {
          cplx v = form.complex_.field(c, a)[p];
          re = v.real();
          im = v.imag();
        } else {
          re = form.real.field(c, a)[p];
          im = 0.0;
        }
        std::fprintf(f, "%s,%d,%zu", comp_name.c_str(), a, p);
        for (int i = 0; i < grid.n; ++i)
          std::fprintf(f, ",%.17g", grid.x(idx[std::size_t(i)]));
        std::fprintf(f, ",%.17g,%.17g\n", re, im);
      }
  }
  std::fclose(f);
}

}  // namespace flatlab
