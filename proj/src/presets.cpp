#include "presets.hpp"

#include <sstream>

namespace flatlab {

namespace {
constexpr double kPi = 3.1415926535897932384626433832795;

const std::vector<std::string>& kinds_for(const std::string& algebra) {
  static const std::vector<std::string> su2 = {"inner_product", "tr2", "c2_int"};
  static const std::vector<std::string> u1 = {"tr", "c1_int", "p1p1", "c1c1_int"};
  static const std::vector<std::string> un = {"tr",       "c1_int",   "tr2",
                                              "p1p1",     "c2_int",   "c1c1_int",
                                              "p1_cubed", "p2p1",     "c1_cubed_int",
                                              "c2c1_int"};
  static const std::vector<std::string> gl = {"tr", "tr2", "p1p1", "p1_cubed", "p2p1"};
  if (algebra == "su2") return su2;
  if (algebra == "u1") return u1;
  if (algebra == "gl1" || algebra == "gl2") return gl;
  return un;
}

InvariantPolynomial make_kind(const AlgebraPtr& alg, const std::string& kind,
                              const std::string& full_name) {
  const cplx cw = cplx(0.0, 1.0) / (2.0 * kPi);  // Chern-Weil slot factor
  // On the compact algebras, odd trace patterns pick up one factor of i per
  // slot; evaluating them on the Hermitian generator -iX keeps real
  // coefficient data real. gl presets stay raw.
  const cplx mi = alg->real_coeffs() ? cplx(0.0, -1.0) : cplx(1.0, 0.0);
  if (kind == "inner_product") return su2_inner_product(alg);
  if (kind == "tr") return build_trace_polynomial(alg, {1}, mi, full_name);
  if (kind == "c1_int") return build_trace_polynomial(alg, {1}, cw, full_name, true);
  if (kind == "tr2") return build_trace_polynomial(alg, {2}, 1.0, full_name);
  if (kind == "p1p1") return build_trace_polynomial(alg, {1, 1}, 1.0, full_name);
  if (kind == "c1c1_int")
    return build_trace_polynomial(alg, {1, 1}, cw * cw, full_name, true);
  if (kind == "c2_int") {
    InvariantPolynomial p11 = build_trace_polynomial(alg, {1, 1}, 1.0, "tmp");
    InvariantPolynomial p2 = build_trace_polynomial(alg, {2}, 1.0, "tmp");
    return InvariantPolynomial::sum(p11, p2, 0.5 * cw * cw, -0.5 * cw * cw, full_name, true);
  }
  if (kind == "p1_cubed")
    return build_trace_polynomial(alg, {1, 1, 1}, mi * mi * mi, full_name);
  if (kind == "c1_cubed_int")
    return build_trace_polynomial(alg, {1, 1, 1}, cw * cw * cw, full_name, true);
  if (kind == "p2p1") {
    InvariantPolynomial p111 = build_trace_polynomial(alg, {1, 1, 1}, 1.0, "tmp");
    InvariantPolynomial p21 = build_trace_polynomial(alg, {2, 1}, 1.0, "tmp");
    const cplx f = mi * mi * mi;
    return InvariantPolynomial::sum(p111, p21, 0.5 * f, -0.5 * f, full_name, false);
  }
  if (kind == "c2c1_int") {
    InvariantPolynomial p111 = build_trace_polynomial(alg, {1, 1, 1}, 1.0, "tmp");
    InvariantPolynomial p21 = build_trace_polynomial(alg, {2, 1}, 1.0, "tmp");
    const cplx f = cw * cw * cw;
    return InvariantPolynomial::sum(p111, p21, 0.5 * f, -0.5 * f, full_name, true);
  }
  fail(ErrorCode::config_error, "unknown polynomial preset '" + full_name + "'");
}
}  // namespace

std::vector<std::string> algebra_catalog() { return {"su2", "u1", "u2", "u3", "gl1", "gl2"}; }

std::vector<PolynomialPreset> polynomial_catalog() {
  std::vector<PolynomialPreset> out;
  for (const auto& alg_name : algebra_catalog()) {
    AlgebraPtr alg = LieAlgebraBasis::make(alg_name);
    for (const auto& kind : kinds_for(alg_name)) {
      InvariantPolynomial p = make_kind(alg, kind, alg_name + "_" + kind);
      out.push_back({alg_name + "_" + kind, alg_name, p.degree(), p.integral_class()});
    }
  }
  return out;
}

std::vector<std::string> family_kind_catalog() { return {"straight_line", "cone", "tabulated"}; }

std::vector<std::string> generator_catalog() {
  return {"zero",          "cartan",        "pure_gauge",   "random_band_limited",
          "winding_gauge", "su2_winding_product", "random_smooth", "cartan_circle",
          "gauge_orbit",   "rotor_loop",    "quaternion_degree_loop", "winding_gauge_loop"};
}

InvariantPolynomial make_polynomial(const AlgebraPtr& algebra, const std::string& name) {
  std::string kind = name;
  const std::string prefix = algebra->name() + "_";
  if (name.rfind(prefix, 0) == 0) kind = name.substr(prefix.size());
  for (const auto& k : kinds_for(algebra->name()))
    if (k == kind) return make_kind(algebra, kind, algebra->name() + "_" + kind);
  fail(ErrorCode::config_error,
       "polynomial '" + name + "' is not available for algebra '" + algebra->name() + "'");
}

std::string render_catalog() {
  std::ostringstream os;
  os << "algebras:\n";
  for (const auto& a : algebra_catalog()) os << "  " << a << "\n";
  os << "polynomials:\n";
  for (const auto& p : polynomial_catalog())
    os << "  " << p.name << " (r=" << p.degree << (p.integral_class ? ", integral" : "")
       << ")\n";
  os << "families:\n";
  for (const auto& f : family_kind_catalog()) os << "  " << f << "\n";
  os << "generators:\n";
  for (const auto& g : generator_catalog()) os << "  " << g << "\n";
  return os.str();
}

}  // namespace flatlab
