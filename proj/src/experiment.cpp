#include "experiment.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "forms_io.hpp"

namespace flatlab {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {
constexpr double kPi = 3.1415926535897932384626433832795;

void reject_unknown(const json& obj, const std::set<std::string>& known,
                    const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    FLATLAB_REQUIRE(known.count(it.key()) > 0, ErrorCode::config_error,
                    "unknown key '" << path << it.key() << "'");
}

double get_num(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  FLATLAB_REQUIRE(obj[key].is_number(), ErrorCode::config_error,
                  "'" << key << "' must be a number");
  return obj[key].get<double>();
}

// ---- generator construction ---------------------------------------------

Matrix direction_matrix(const AlgebraPtr& alg, const std::string& name) {
  const cplx I(0.0, 1.0);
  if (alg->name() == "su2") {
    FLATLAB_REQUIRE(name == "su2_b3" || name == "default", ErrorCode::config_error,
                    "unknown direction '" << name << "' for su2");
    Matrix s3(2, 2);
    s3 << 1, 0, 0, -1;
    return Matrix(4.0 * kPi * s3 / (2.0 * I));  // exp closes at 4 pi in this normalization
  }
  // u_m: diag<k> picks 2 pi i E_kk
  std::string base = name == "default" ? "diag0" : name;
  FLATLAB_REQUIRE(base.rfind("diag", 0) == 0, ErrorCode::config_error,
                  "unknown direction '" << name << "' for " << alg->name());
  int k = std::stoi(base.substr(4));
  const int d = alg->mat_dim();
  FLATLAB_REQUIRE(k >= 0 && k < d, ErrorCode::config_error,
                  "direction index " << k << " out of range for " << alg->name());
  Matrix h = Matrix::Zero(d, d);
  h(k, k) = 2.0 * kPi * I;
  return h;
}

std::vector<std::vector<double>> parse_axis_coeffs(const json& j, int n, int m,
                                                   const std::string& what) {
  FLATLAB_REQUIRE(j.is_array() && int(j.size()) == n, ErrorCode::config_error,
                  what << " must be an array with one row per axis");
  std::vector<std::vector<double>> out;
  for (const auto& row : j) {
    FLATLAB_REQUIRE(row.is_array() && int(row.size()) == m, ErrorCode::config_error,
                    what << " rows must have one entry per algebra coefficient");
    out.push_back(row.get<std::vector<double>>());
  }
  return out;
}

GaugeField build_gauge(const json& spec, const TorusGrid& grid, const AlgebraPtr& alg, Rng& rng);

RealConnection build_connection(const json& spec, const TorusGrid& grid, const AlgebraPtr& alg,
                                Rng& rng) {
  FLATLAB_REQUIRE(spec.is_object() && spec.contains("generator"), ErrorCode::config_error,
                  "connection spec needs a 'generator'");
  std::string gen = spec["generator"].get<std::string>();
  if (gen == "zero") {
    reject_unknown(spec, {"generator"}, "family.*.");
    return zero_connection<double>(grid, alg);
  }
  if (gen == "cartan") {
    reject_unknown(spec, {"generator", "theta"}, "family.*.");
    FLATLAB_REQUIRE(spec.contains("theta"), ErrorCode::config_error,
                    "cartan generator needs 'theta'");
    return cartan_flat<double>(grid, alg,
                               parse_axis_coeffs(spec["theta"], grid.n, alg->dim(), "theta"));
  }
  if (gen == "pure_gauge") {
    reject_unknown(spec, {"generator", "gauge"}, "family.*.");
    FLATLAB_REQUIRE(spec.contains("gauge"), ErrorCode::config_error,
                    "pure_gauge generator needs 'gauge'");
    return pure_gauge<double>(build_gauge(spec["gauge"], grid, alg, rng));
  }
  if (gen == "random_band_limited") {
    reject_unknown(spec, {"generator", "max_mode", "amplitude"}, "family.*.");
    int max_mode = int(get_num(spec, "max_mode", 2));
    double amp = get_num(spec, "amplitude", 0.3);
    return random_connection<double>(grid, alg, rng, max_mode, amp);
  }
  fail(ErrorCode::config_error, "unknown connection generator '" + gen + "'");
}

GaugeField build_gauge(const json& spec, const TorusGrid& grid, const AlgebraPtr& alg, Rng& rng) {
  FLATLAB_REQUIRE(spec.is_object() && spec.contains("generator"), ErrorCode::config_error,
                  "gauge spec needs a 'generator'");
  std::string gen = spec["generator"].get<std::string>();
  if (gen == "winding_gauge") {
    reject_unknown(spec, {"generator", "w", "direction"}, "family.*.gauge.");
    FLATLAB_REQUIRE(spec.contains("w"), ErrorCode::config_error, "winding gauge needs 'w'");
    std::vector<int> w = spec["w"].get<std::vector<int>>();
    Matrix h = direction_matrix(alg, spec.value("direction", std::string("default")));
    return winding_gauge(grid, alg, w, h);
  }
  if (gen == "su2_winding_product") {
    reject_unknown(spec, {"generator", "w"}, "family.*.gauge.");
    std::vector<int> w =
        spec.contains("w") ? spec["w"].get<std::vector<int>>() : std::vector<int>(grid.n, 1);
    return su2_winding_product_gauge(grid, alg, w);
  }
  if (gen == "random_smooth") {
    reject_unknown(spec, {"generator", "max_mode", "amplitude"}, "family.*.gauge.");
    return random_gauge_field(grid, alg, rng, int(get_num(spec, "max_mode", 2)),
                              get_num(spec, "amplitude", 0.4));
  }
  fail(ErrorCode::config_error, "unknown gauge generator '" + gen + "'");
}

GaugeLoop build_gauge_loop(const json& spec, const TorusGrid& grid, const AlgebraPtr& alg) {
  FLATLAB_REQUIRE(spec.is_object() && spec.contains("generator"), ErrorCode::config_error,
                  "gauge loop spec needs a 'generator'");
  std::string gen = spec["generator"].get<std::string>();
  if (gen == "rotor_loop") {
    reject_unknown(spec, {"generator"}, "family.loop.gauge_loop.");
    return rotor_gauge_loop(grid, alg);
  }
  if (gen == "quaternion_degree_loop") {
    reject_unknown(spec, {"generator", "c"}, "family.loop.gauge_loop.");
    return quaternion_degree_loop(grid, alg, get_num(spec, "c", 2.0));
  }
  if (gen == "winding_gauge_loop") {
    reject_unknown(spec, {"generator", "w", "m", "direction"}, "family.loop.gauge_loop.");
    std::vector<int> w =
        spec.contains("w") ? spec["w"].get<std::vector<int>>() : std::vector<int>(grid.n, 0);
    Matrix h = direction_matrix(alg, spec.value("direction", std::string("default")));
    return winding_gauge_loop(grid, alg, w, int(get_num(spec, "m", 1)), h);
  }
  fail(ErrorCode::config_error, "unknown gauge loop generator '" + gen + "'");
}

ConnectionLoop<double> build_loop(const json& spec, const TorusGrid& grid, const AlgebraPtr& alg,
                                  Rng& rng) {
  FLATLAB_REQUIRE(spec.is_object() && spec.contains("generator"), ErrorCode::config_error,
                  "loop spec needs a 'generator'");
  std::string gen = spec["generator"].get<std::string>();
  if (gen == "cartan_circle") {
    reject_unknown(spec, {"generator", "base", "cos", "sin", "flatten"}, "family.loop.");
    const int n = grid.n, m = alg->dim();
    std::vector<std::vector<double>> zero(std::size_t(n), std::vector<double>(std::size_t(m), 0.0));
    auto base = spec.contains("base") ? parse_axis_coeffs(spec["base"], n, m, "base") : zero;
    auto cosp = spec.contains("cos") ? parse_axis_coeffs(spec["cos"], n, m, "cos") : zero;
    auto sinp = spec.contains("sin") ? parse_axis_coeffs(spec["sin"], n, m, "sin") : zero;
    return cartan_circle_loop<double>(grid, alg, base, cosp, sinp, spec.value("flatten", false));
  }
  if (gen == "gauge_orbit") {
    reject_unknown(spec, {"generator", "gauge_loop", "base"}, "family.loop.");
    FLATLAB_REQUIRE(spec.contains("gauge_loop"), ErrorCode::config_error,
                    "gauge_orbit loop needs 'gauge_loop'");
    RealConnection base = spec.contains("base")
                              ? build_connection(spec["base"], grid, alg, rng)
                              : zero_connection<double>(grid, alg);
    return gauge_orbit_loop(build_gauge_loop(spec["gauge_loop"], grid, alg), base);
  }
  fail(ErrorCode::config_error, "unknown loop generator '" + gen + "'");
}

struct BuiltFamily {
  ConnectionFamily<double> family;
  bool has_loop = false;
  ConnectionLoop<double> loop;
  RealConnection base;
};

BuiltFamily build_family(const ExperimentConfig& cfg, const TorusGrid& grid,
                         const AlgebraPtr& alg, Rng& rng) {
  json spec = json::parse(cfg.family_json);
  FLATLAB_REQUIRE(spec.is_object() && spec.contains("kind"), ErrorCode::config_error,
                  "family spec needs a 'kind'");
  std::string kind = spec["kind"].get<std::string>();
  BuiltFamily out;
  if (kind == "straight_line") {
    reject_unknown(spec, {"kind", "a0", "a1"}, "family.");
    FLATLAB_REQUIRE(spec.contains("a0") && spec.contains("a1"), ErrorCode::config_error,
                    "straight_line needs 'a0' and 'a1'");
    RealConnection a0 = build_connection(spec["a0"], grid, alg, rng);
    RealConnection a1 = build_connection(spec["a1"], grid, alg, rng);
    out.base = a0;
    out.family = straight_line_family(a0, a1, cfg.gauss_order, cfg.gauss_panels);
    return out;
  }
  if (kind == "cone") {
    reject_unknown(spec, {"kind", "loop", "base"}, "family.");
    FLATLAB_REQUIRE(spec.contains("loop"), ErrorCode::config_error, "cone needs 'loop'");
    out.loop = build_loop(spec["loop"], grid, alg, rng);
    out.has_loop = true;
    out.base = spec.contains("base") ? build_connection(spec["base"], grid, alg, rng)
                                     : out.loop.at(0.0);
    out.family =
        cone_family(out.loop, out.base, cfg.gauss_order, cfg.gauss_panels, cfg.loop_nodes);
    return out;
  }
  if (kind == "tabulated") {
    reject_unknown(spec, {"kind", "a0", "a1", "snapshots"}, "family.");
    FLATLAB_REQUIRE(spec.contains("a0") && spec.contains("a1"), ErrorCode::config_error,
                    "tabulated needs 'a0' and 'a1' endpoints");
    RealConnection a0 = build_connection(spec["a0"], grid, alg, rng);
    RealConnection a1 = build_connection(spec["a1"], grid, alg, rng);
    int count = int(get_num(spec, "snapshots", 17));
    FLATLAB_REQUIRE(count >= 5, ErrorCode::config_error, "tabulated needs >= 5 snapshots");
    std::vector<RealConnection> snaps;
    for (int j = 0; j < count; ++j) {
      double t = double(j) / double(count - 1);
      GridForm<double> f = a0.form;
      GridForm<double> xi = a1.form - a0.form;
      add_scaled(f, xi, t);
      snaps.push_back(RealConnection(std::move(f)));
    }
    out.base = a0;
    out.family = tabulated_path_family(snaps, cfg.gauss_order, cfg.gauss_panels);
    return out;
  }
  fail(ErrorCode::config_error, "unknown family kind '" + kind + "'");
}

// ---- checks ---------------------------------------------------------------

json outcome_json(const CheckOutcome& c) {
  json j;
  j["name"] = c.name;
  j["passed"] = c.passed;
  j["measured"] = c.measured;
  j["allowed"] = c.allowed;
  if (!c.note.empty()) j["note"] = c.note;
  if (!c.extra_json.empty()) j["detail"] = json::parse(c.extra_json);
  return j;
}

CheckOutcome check_closure(const FamilyInvariant<double>& lam, const Tolerances& tol) {
  CheckOutcome out;
  out.name = "closure";
  out.measured = lam.closure_residual;
  out.allowed = tol.closure;
  out.passed = lam.closure_residual <= tol.closure;
  if (!lam.boundary_flat) out.note = "boundary not flat; closure not expected";
  return out;
}

CheckOutcome check_triple_route(const InvariantPolynomial& p, const BuiltFamily& bf,
                                const FamilyInvariant<double>& lam, const Tolerances& tol) {
  GridForm<double> prod = family_invariant_product_route(p, bf.family);
  TransgressionResult<double> tr = transgression_route(p, bf.family, bf.base);
  double d1 = max_norm(lam.form - prod);
  double d2 = max_norm(lam.form - tr.boundary_integral);
  double d3 = max_norm(prod - tr.boundary_integral);
  CheckOutcome out;
  out.name = "triple_route";
  out.measured = std::max({d1, d2, d3});
  out.allowed = tol.triple_route;
  out.passed = out.measured <= out.allowed;
  return out;
}

CheckOutcome check_extension_independence(const InvariantPolynomial& p, const BuiltFamily& bf,
                                          const FamilyInvariant<double>& lam,
                                          const Tolerances& tol, Rng& rng) {
  const TorusGrid grid = bf.base.grid();
  GridForm<double> bump =
      random_band_limited<double>(grid, 1, bf.base.algebra(), rng, 1, 0.15);
  ConnectionFamily<double> fam2 = reparametrized_family(bf.family, &bump, 1.0);
  InvariantOptions opt;
  opt.check_boundary = false;
  FamilyInvariant<double> lam2 = family_invariant(p, fam2, opt);
  CheckOutcome out;
  out.name = "extension_independence";
  out.allowed = tol.extension_independence;
  if (!lam.periods_valid || !lam2.periods_valid) {
    out.measured = std::max(lam.closure_residual, lam2.closure_residual);
    out.passed = false;
    out.note = "periods unavailable (form not closed)";
    return out;
  }
  out.measured = period_distance(lam.periods, lam2.periods);
  out.passed = out.measured <= out.allowed;
  return out;
}

CheckOutcome check_global_gauge(const InvariantPolynomial& p, const BuiltFamily& bf,
                                const FamilyInvariant<double>& lam, const Tolerances& tol,
                                Rng& rng) {
  const TorusGrid grid = bf.base.grid();
  // mode-1, small amplitude: the exponential stays well inside the grid band
  GaugeField phi = random_gauge_field(grid, bf.base.algebra(), rng, 1, 0.2);
  auto inner = std::make_shared<ConnectionFamily<double>>(bf.family);
  auto phi_ptr = std::make_shared<GaugeField>(phi);
  ConnectionFamily<double> moved;
  moved.kind = bf.family.kind + "_gauged";
  moved.k = bf.family.k;
  moved.domain = bf.family.domain;
  moved.boundary_samples = bf.family.boundary_samples;
  moved.at = [inner, phi_ptr](const double* u) {
    return gauge_transform(*phi_ptr, inner->at(u), false);
  };
  moved.partial = [inner, phi_ptr](const double* u, int axis) {
    return gauge_adjoint(*phi_ptr, inner->partial(u, axis));
  };
  InvariantOptions opt;
  opt.check_boundary = false;
  FamilyInvariant<double> lam2 = family_invariant(p, moved, opt);
  CheckOutcome out;
  out.name = "global_gauge";
  out.allowed = tol.global_gauge;
  if (!lam.periods_valid || !lam2.periods_valid) {
    out.measured = 1.0;
    out.passed = false;
    out.note = "periods unavailable";
    return out;
  }
  out.measured = period_distance(lam.periods, lam2.periods);
  out.passed = out.measured <= out.allowed;
  return out;
}

CheckOutcome check_pointwise_gauge(const InvariantPolynomial& p, const ExperimentConfig& cfg,
                                   const BuiltFamily& bf, const FamilyInvariant<double>& lam,
                                   const Tolerances& tol) {
  CheckOutcome out;
  out.name = "pointwise_gauge";
  out.allowed = tol.pointwise_gauge;
  if (!bf.has_loop) {
    out.passed = false;
    out.note = "check requires a cone family";
    return out;
  }
  if (!p.integral_class()) {
    out.passed = false;
    out.note = "polynomial is not integral-class";
    return out;
  }
  const TorusGrid grid = bf.base.grid();
  Matrix h = direction_matrix(bf.base.algebra(), "default");
  std::vector<int> w(std::size_t(grid.n), 0);
  w[0] = 1;
  GaugeLoop phi = winding_gauge_loop(grid, bf.base.algebra(), w, 1, h);
  ConnectionLoop<double> moved_loop = gauge_transformed_loop(phi, bf.loop);
  ConnectionFamily<double> fam2 = cone_family(moved_loop, moved_loop.at(0.0), cfg.gauss_order,
                                              cfg.gauss_panels, cfg.loop_nodes);
  InvariantOptions opt;
  opt.check_boundary = false;
  FamilyInvariant<double> lam2 = family_invariant(p, fam2, opt);
  if (!lam.periods_valid || !lam2.periods_valid) {
    out.passed = false;
    out.note = "periods unavailable";
    return out;
  }
  PeriodVector<double> diff = lam.periods;
  for (std::size_t i = 0; i < diff.entries.size(); ++i)
    diff.entries[i] -= lam2.periods.entries[i];
  out.measured = integer_defect(diff);
  out.passed = out.measured <= out.allowed;
  return out;
}

CheckOutcome check_homotopy(const InvariantPolynomial& p, const ExperimentConfig& cfg,
                            const BuiltFamily& bf, const FamilyInvariant<double>& lam,
                            const Tolerances& tol) {
  CheckOutcome out;
  out.name = "homotopy";
  out.allowed = tol.homotopy;
  if (!bf.has_loop) {
    out.passed = false;
    out.note = "check requires a cone family";
    return out;
  }
  ConnectionLoop<double> shifted = reparametrized_loop(bf.loop, 0.5);
  ConnectionFamily<double> fam2 = cone_family(shifted, bf.base, cfg.gauss_order,
                                              cfg.gauss_panels, cfg.loop_nodes);
  InvariantOptions opt;
  opt.check_boundary = false;
  FamilyInvariant<double> lam2 = family_invariant(p, fam2, opt);
  if (!lam.periods_valid || !lam2.periods_valid) {
    out.passed = false;
    out.note = "periods unavailable";
    return out;
  }
  out.measured = period_distance(lam.periods, lam2.periods);
  out.passed = out.measured <= out.allowed;
  if (fam2.k >= p.degree())
    out.note = "k >= r: invariance outside the proven range, reported as observed";
  return out;
}

CheckOutcome check_dolbeault(const InvariantPolynomial& p, const BuiltFamily& bf,
                             const FamilyInvariant<double>& lam, const Tolerances& tol) {
  CheckOutcome out;
  out.name = "dolbeault";
  out.allowed = tol.dolbeault_dbar;
  const TorusGrid grid = bf.base.grid();
  if (grid.n % 2 != 0) {
    out.passed = false;
    out.note = "torus dimension is odd; no complex structure";
    return out;
  }
  ComplexStructure cs(grid);
  ConnectionFamily<cplx> cfam = complexify_family(bf.family);
  DolbeaultInvariant dl = dolbeault_family_invariant(cs, p, cfam);
  // projection must commute with the quadrature
  const int deg = lam.form.degree;
  double commute = 0.0;
  if (deg <= cs.m) {
    ComplexForm projected = bidegree_project(cs, complexify(lam.form), 0, deg);
    commute = max_norm(projected - dl.form);
  }
  out.measured = std::max(dl.dbar_residual, commute);
  out.passed = out.measured <= out.allowed;
  if (!dl.boundary_in_f02) out.note = "boundary outside the vanishing-(0,2) set";
  json extra;
  extra["bidegree"] = {0, deg};
  extra["dbar_residual"] = dl.dbar_residual;
  extra["boundary_f02_residual"] = dl.worst_boundary_f02;
  extra["class_level_window"] = dl.class_level_window;
  json periods = json::array();
  for (const auto& v : dl.periods.entries) periods.push_back({v.real(), v.imag()});
  extra["periods_re_im"] = periods;
  out.extra_json = extra.dump();
  return out;
}

json periods_json(const PeriodVector<double>& periods, const TorusGrid& grid) {
  const auto& tab = ComboTables::get(grid.n);
  json j = json::object();
  for (std::size_t c = 0; c < periods.entries.size(); ++c) {
    std::string key;
    for (int a : tab.axes(periods.degree, int(c))) key += std::to_string(a + 1);
    if (key.empty()) key = "point";
    j[key] = periods.entries[c];
  }
  return j;
}

void atomic_write(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    FLATLAB_REQUIRE(os.good(), ErrorCode::io_error, "cannot write '" << tmp << "'");
    os.write(content.data(), std::streamsize(content.size()));
  }
  fs::rename(tmp, path);
}

}  // namespace

// ---- config ----------------------------------------------------------------

namespace {
ExperimentConfig parse_object(const json& j);
}

ExperimentConfig ExperimentConfig::parse(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    fail(ErrorCode::config_error, std::string("config is not valid JSON: ") + e.what());
  }
  try {
    return parse_object(j);
  } catch (const Error&) {
    throw;
  } catch (const json::exception& e) {
    fail(ErrorCode::config_error, std::string("config field has the wrong type: ") + e.what());
  }
}

namespace {
ExperimentConfig parse_object(const json& j) {
  FLATLAB_REQUIRE(j.is_object(), ErrorCode::config_error, "config must be a JSON object");
  reject_unknown(j,
                 {"schema", "algebra", "polynomial", "torus", "family", "quadrature", "checks",
                  "tolerances", "seed", "output"},
                 "");
  ExperimentConfig cfg;
  FLATLAB_REQUIRE(j.contains("schema") && j["schema"].is_number_integer(),
                  ErrorCode::config_error, "config needs an integer 'schema'");
  cfg.schema = j["schema"].get<int>();
  FLATLAB_REQUIRE(cfg.schema == 1, ErrorCode::config_error,
                  "unsupported schema version " << cfg.schema);
  FLATLAB_REQUIRE(j.contains("algebra"), ErrorCode::config_error, "config needs 'algebra'");
  cfg.algebra = j["algebra"].get<std::string>();
  FLATLAB_REQUIRE(j.contains("polynomial"), ErrorCode::config_error,
                  "config needs 'polynomial'");
  cfg.polynomial = j["polynomial"].get<std::string>();
  FLATLAB_REQUIRE(j.contains("torus") && j["torus"].is_object(), ErrorCode::config_error,
                  "config needs a 'torus' object");
  reject_unknown(j["torus"], {"n", "points"}, "torus.");
  cfg.n = int(get_num(j["torus"], "n", 3));
  cfg.N = int(get_num(j["torus"], "points", 16));
  FLATLAB_REQUIRE(j.contains("family"), ErrorCode::config_error, "config needs 'family'");
  cfg.family_json = j["family"].dump();
  if (j.contains("quadrature")) {
    reject_unknown(j["quadrature"], {"gauss_order", "gauss_panels", "loop_nodes"}, "quadrature.");
    cfg.gauss_order = int(get_num(j["quadrature"], "gauss_order", 8));
    cfg.gauss_panels = int(get_num(j["quadrature"], "gauss_panels", 2));
    cfg.loop_nodes = int(get_num(j["quadrature"], "loop_nodes", 32));
  }
  if (j.contains("checks")) {
    FLATLAB_REQUIRE(j["checks"].is_array(), ErrorCode::config_error,
                    "'checks' must be an array");
    cfg.checks = j["checks"].get<std::vector<std::string>>();
  }
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    reject_unknown(t,
                   {"flatness", "closure", "triple_route", "extension_independence",
                    "global_gauge", "pointwise_gauge", "homotopy", "dolbeault_dbar",
                    "closed_form"},
                   "tolerances.");
    cfg.tol.flatness = get_num(t, "flatness", cfg.tol.flatness);
    cfg.tol.closure = get_num(t, "closure", cfg.tol.closure);
    cfg.tol.triple_route = get_num(t, "triple_route", cfg.tol.triple_route);
    cfg.tol.extension_independence =
        get_num(t, "extension_independence", cfg.tol.extension_independence);
    cfg.tol.global_gauge = get_num(t, "global_gauge", cfg.tol.global_gauge);
    cfg.tol.pointwise_gauge = get_num(t, "pointwise_gauge", cfg.tol.pointwise_gauge);
    cfg.tol.homotopy = get_num(t, "homotopy", cfg.tol.homotopy);
    cfg.tol.dolbeault_dbar = get_num(t, "dolbeault_dbar", cfg.tol.dolbeault_dbar);
    cfg.tol.closed_form = get_num(t, "closed_form", cfg.tol.closed_form);
  }
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("output")) {
    reject_unknown(j["output"], {"form", "convergence_csv"}, "output.");
    cfg.write_form = j["output"].value("form", false);
    cfg.write_convergence = j["output"].value("convergence_csv", false);
  }
  return cfg;
}
}  // namespace

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream is(path);
  FLATLAB_REQUIRE(is.good(), ErrorCode::io_error, "cannot open config '" << path << "'");
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return parse(text);
}

void ExperimentConfig::validate() const {
  AlgebraPtr alg = LieAlgebraBasis::make(algebra);
  FLATLAB_REQUIRE(alg->real_coeffs(), ErrorCode::config_error,
                  "experiment configs drive compact real algebras; complex algebras are "
                  "reachable through the library API");
  InvariantPolynomial p = make_polynomial(alg, polynomial);
  TorusGrid grid(n, N);
  json spec = json::parse(family_json);
  FLATLAB_REQUIRE(spec.is_object() && spec.contains("kind"), ErrorCode::config_error,
                  "family spec needs a 'kind'");
  std::string kind = spec["kind"].get<std::string>();
  int k = kind == "cone" ? 2 : 1;
  FLATLAB_REQUIRE(2 * p.degree() - k <= n, ErrorCode::config_error,
                  "constraint 2r-k <= n violated: 2*" << p.degree() << "-" << k << " > " << n);
  const std::set<std::string> known_checks = {
      "closure",         "triple_route", "extension_independence",
      "global_gauge",    "pointwise_gauge", "homotopy", "dolbeault"};
  for (const auto& c : checks)
    FLATLAB_REQUIRE(known_checks.count(c) > 0, ErrorCode::config_error,
                    "unknown check '" << c << "'");
  FLATLAB_REQUIRE(gauss_order >= 4, ErrorCode::config_error,
                  "quadrature gauss_order must be >= 4");
  FLATLAB_REQUIRE(loop_nodes >= 4, ErrorCode::config_error, "loop_nodes must be >= 4");
  // exercise the family builder so generator names and shapes are validated
  Rng rng(seed);
  build_family(*this, grid, alg, rng);
}

std::string ExperimentConfig::canonical_json() const {
  json j;
  j["schema"] = schema;
  j["algebra"] = algebra;
  j["polynomial"] = polynomial;
  j["torus"] = {{"n", n}, {"points", N}};
  j["family"] = json::parse(family_json);
  j["quadrature"] = {{"gauss_order", gauss_order},
                     {"gauss_panels", gauss_panels},
                     {"loop_nodes", loop_nodes}};
  j["checks"] = checks;
  j["tolerances"] = {{"flatness", tol.flatness},
                     {"closure", tol.closure},
                     {"triple_route", tol.triple_route},
                     {"extension_independence", tol.extension_independence},
                     {"global_gauge", tol.global_gauge},
                     {"pointwise_gauge", tol.pointwise_gauge},
                     {"homotopy", tol.homotopy},
                     {"dolbeault_dbar", tol.dolbeault_dbar},
                     {"closed_form", tol.closed_form}};
  j["seed"] = seed;
  j["output"] = {{"form", write_form}, {"convergence_csv", write_convergence}};
  return j.dump(2);
}

RunResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  AlgebraPtr alg = LieAlgebraBasis::make(cfg.algebra);
  InvariantPolynomial p = make_polynomial(alg, cfg.polynomial);
  TorusGrid grid(cfg.n, cfg.N);
  Rng rng(cfg.seed);
  BuiltFamily bf = build_family(cfg, grid, alg, rng);

  InvariantOptions opt;
  opt.check_boundary = true;
  opt.collect_convergence = cfg.write_convergence;
  FamilyInvariant<double> lam = family_invariant(p, bf.family, opt);

  std::vector<CheckOutcome> outcomes;
  for (const auto& name : cfg.checks) {
    if (name == "closure") outcomes.push_back(check_closure(lam, cfg.tol));
    else if (name == "triple_route") outcomes.push_back(check_triple_route(p, bf, lam, cfg.tol));
    else if (name == "extension_independence")
      outcomes.push_back(check_extension_independence(p, bf, lam, cfg.tol, rng));
    else if (name == "global_gauge")
      outcomes.push_back(check_global_gauge(p, bf, lam, cfg.tol, rng));
    else if (name == "pointwise_gauge")
      outcomes.push_back(check_pointwise_gauge(p, cfg, bf, lam, cfg.tol));
    else if (name == "homotopy") outcomes.push_back(check_homotopy(p, cfg, bf, lam, cfg.tol));
    else if (name == "dolbeault") outcomes.push_back(check_dolbeault(p, bf, lam, cfg.tol));
  }

  bool all = true;
  for (const auto& o : outcomes) all = all && o.passed;

  json report;
  report["schema"] = 1;
  report["config"] = json::parse(cfg.canonical_json());
  report["seed"] = cfg.seed;
  json inv;
  inv["polynomial"] = p.descriptor();
  inv["integral_class"] = p.integral_class();
  inv["r"] = p.degree();
  inv["k"] = bf.family.k;
  inv["family"] = bf.family.kind;
  inv["degree"] = lam.form.degree;
  inv["max_norm"] = max_norm(lam.form);
  inv["closure_residual"] = lam.closure_residual;
  inv["boundary_flat"] = lam.boundary_flat;
  inv["worst_boundary_residual"] = lam.worst_boundary_residual;
  inv["closure_validated"] = lam.closure_validated;
  if (lam.periods_valid) inv["periods"] = periods_json(lam.periods, grid);
  if (lam.periods_valid && p.integral_class())
    inv["periods_mod_z"] = periods_json(mod_z_reduce(lam.periods), grid);
  report["invariant"] = inv;
  json checks = json::array();
  for (const auto& o : outcomes) checks.push_back(outcome_json(o));
  report["checks"] = checks;
  report["all_passed"] = all;

  RunResult result;
  result.all_passed = all;
  result.report_json = report.dump(2) + "\n";

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::string report_path = (fs::path(out_dir) / "report.json").string();
    atomic_write(report_path, result.report_json);
    result.files_written.push_back(report_path);
    if (cfg.write_form) {
      std::string form_path = (fs::path(out_dir) / "invariant_form.bin").string();
      save_form(form_path + ".tmp", lam.form);
      fs::rename(form_path + ".tmp", form_path);
      result.files_written.push_back(form_path);
    }
    if (cfg.write_convergence) {
      std::string csv;
      csv += "node";
      for (int a = 0; a < bf.family.k; ++a) csv += ",u" + std::to_string(a + 1);
      csv += ",weight,integrand_max_norm\n";
      char buf[256];
      for (std::size_t i = 0; i < lam.convergence.size(); ++i) {
        const auto& row = lam.convergence[i];
        csv += std::to_string(i);
        for (double u : row.u) {
          std::snprintf(buf, sizeof(buf), ",%.17g", u);
          csv += buf;
        }
        std::snprintf(buf, sizeof(buf), ",%.17g,%.17g\n", row.weight, row.integrand_norm);
        csv += buf;
      }
      std::string csv_path = (fs::path(out_dir) / "convergence.csv").string();
      atomic_write(csv_path, csv);
      result.files_written.push_back(csv_path);
    }
  }
  return result;
}

std::string list_presets_text() { return render_catalog(); }

}  // namespace flatlab
