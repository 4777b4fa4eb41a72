#include <doctest.h>

#include <cmath>

#include "families.hpp"

using namespace flatlab;

namespace {
constexpr double kTau = 6.283185307179586476925286766559;
constexpr double kPi = 3.1415926535897932384626433832795;
}

TEST_CASE("curvature of trivial and commuting-constant connections") {
  auto su2 = LieAlgebraBasis::make("su2");
  TorusGrid g(2, 8);
  CHECK(flatness_residual(zero_connection<double>(g, su2)) == 0.0);

  // A = B1 dx1 + B1 dx2: dA = 0 and the components commute
  RealConnection a(GridForm<double>(g, 1, su2));
  for (std::size_t p = 0; p < g.npoints(); ++p) {
    a.form.field(0, 0)[p] = 1.0;
    a.form.field(1, 0)[p] = 1.0;
  }
  CHECK(flatness_residual(a) <= 1e-13);
}

TEST_CASE("curvature against the analytic formula") {
  auto su2 = LieAlgebraBasis::make("su2");
  TorusGrid g(2, 16);
  // A = B1 dx1 + B2 sin(2 pi x1) dx2
  RealConnection a(GridForm<double>(g, 1, su2));
  std::vector<int> idx(2);
  for (std::size_t p = 0; p < g.npoints(); ++p) {
    g.coords(p, idx.data());
    a.form.field(0, 0)[p] = 1.0;
    a.form.field(1, 1)[p] = std::sin(kTau * g.x(idx[0]));
  }
  RealForm f = curvature(a);
  // F = 2 pi cos(2 pi x1) B2 dx1^dx2 + sin(2 pi x1) B3 dx1^dx2
  for (std::size_t p = 0; p < g.npoints(); ++p) {
    g.coords(p, idx.data());
    const double x1 = g.x(idx[0]);
    CHECK(std::abs(f.field(0, 1)[p] - kTau * std::cos(kTau * x1)) <= 1e-12);
    CHECK(std::abs(f.field(0, 2)[p] - std::sin(kTau * x1)) <= 1e-12);
    CHECK(std::abs(f.field(0, 0)[p]) <= 1e-14);
  }
}

TEST_CASE("covariant derivative reduces to d at the trivial connection") {
  auto su2 = LieAlgebraBasis::make("su2");
  TorusGrid g(3, 16);
  Rng rng(7);
  RealConnection zero = zero_connection<double>(g, su2);
  RealForm xi = random_band_limited<double>(g, 1, su2, rng, 2, 1.0);
  CHECK(max_norm(covariant_derivative(zero, xi) - exterior_derivative(xi)) == 0.0);
}

TEST_CASE("Bianchi identity on random band-limited connections") {
  Rng rng(19);
  for (const auto* name : {"su2", "u2"}) {
    auto alg = LieAlgebraBasis::make(name);
    TorusGrid g(3, 16);
    for (int trial = 0; trial < 4; ++trial) {
      RealConnection a = random_connection<double>(g, alg, rng, 2, 0.5);
      CHECK(max_norm(covariant_derivative(a, curvature(a))) <= 1e-8);
    }
  }
}

TEST_CASE("curvature derivative: finite differences against nabla") {
  auto su2 = LieAlgebraBasis::make("su2");
  TorusGrid g(3, 16);
  Rng rng(23);
  RealConnection a = random_connection<double>(g, su2, rng, 2, 0.3);
  RealForm xi = random_band_limited<double>(g, 1, su2, rng, 2, 0.02);
  const double t = 1e-4;
  RealConnection at(a.form + scaled(xi, t));
  RealForm fd = curvature(at) - curvature(a);
  fd = scaled(fd, 1.0 / t);
  RealForm nab = covariant_derivative(a, xi);
  CHECK(max_norm(fd - nab) <= 1e-6);
  // the centered difference is exact for the quadratic curvature map
  RealConnection am(a.form - scaled(xi, t));
  RealForm cd = curvature(at) - curvature(am);
  cd = scaled(cd, 0.5 / t);
  CHECK(max_norm(cd - nab) <= 1e-9);
}

TEST_CASE("gauge transform basics") {
  auto su2 = LieAlgebraBasis::make("su2");
  TorusGrid g(2, 32);
  Rng rng(29);
  RealConnection a = random_connection<double>(g, su2, rng, 2, 0.5);

  GaugeField id = identity_gauge(g, su2);
  CHECK(max_norm(gauge_transform(id, a).form - a.form) == 0.0);

  GaugeField phi = random_gauge_field(g, su2, rng, 1, 0.4);
  RealConnection pg = pure_gauge<double>(phi);
  CHECK(flatness_residual(pg) <= 1e-8);

  // composition law
  GaugeField psi = random_gauge_field(g, su2, rng, 1, 0.4);
  RealConnection two_step = gauge_transform(psi, gauge_transform(phi, a));
  RealConnection combined = gauge_transform(gauge_product(psi, phi), a);
  CHECK(max_norm(two_step.form - combined.form) <= 1e-9);
}

TEST_CASE("curvature is equivariant under gauge transformations") {
  auto su2 = LieAlgebraBasis::make("su2");
  TorusGrid g(2, 32);
  Rng rng(31);
  for (int trial = 0; trial < 3; ++trial) {
    RealConnection a = random_connection<double>(g, su2, rng, 1, 0.5);
    GaugeField phi = random_gauge_field(g, su2, rng, 1, 0.5);
    RealForm lhs = curvature(gauge_transform(phi, a));
    RealForm rhs = gauge_adjoint(phi, curvature(a));
    CHECK(max_norm(lhs - rhs) <= 1e-8);
  }
}

TEST_CASE("gauge transforms preserve flatness") {
  auto u2 = LieAlgebraBasis::make("u2");
  TorusGrid g(2, 32);
  Rng rng(37);
  std::vector<std::vector<double>> theta(2, std::vector<double>(4, 0.0));
  theta[0][0] = 0.3;
  theta[1][0] = -0.8;  // central direction commutes
  RealConnection flat = cartan_flat<double>(g, u2, theta);
  CHECK(flatness_residual(flat) <= 1e-10);
  GaugeField phi = random_gauge_field(g, u2, rng, 1, 0.4);
  CHECK(flatness_residual(gauge_transform(phi, flat)) <= 1e-7);
}

TEST_CASE("gauge field validation") {
  auto su2 = LieAlgebraBasis::make("su2");
  TorusGrid g(2, 32);
  Rng rng(41);
  GaugeField good = random_gauge_field(g, su2, rng, 1, 0.4);
  CHECK_NOTHROW(good.validate());

  GaugeField bad = good;
  for (auto& v : bad.data) v *= 1.5;  // breaks unitarity
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK_THROWS_AS(gauge_transform(bad, zero_connection<double>(g, su2)), Error);
}

TEST_CASE("cartan generator") {
  auto su2 = LieAlgebraBasis::make("su2");
  auto u2 = LieAlgebraBasis::make("u2");
  TorusGrid g(2, 8);

  std::vector<std::vector<double>> zero(2, std::vector<double>(3, 0.0));
  CHECK(flatness_residual(cartan_flat<double>(g, su2, zero)) == 0.0);

  std::vector<std::vector<double>> span_b3(2, std::vector<double>(3, 0.0));
  span_b3[0][2] = 0.7;
  span_b3[1][2] = -1.3;
  CHECK(flatness_residual(cartan_flat<double>(g, su2, span_b3)) <= 1e-10);

  // u(2) diagonal matrices commute (basis entries 0,1 are i E00, i E11)
  std::vector<std::vector<double>> diag(2, std::vector<double>(4, 0.0));
  diag[0][0] = 0.5;
  diag[0][1] = 0.2;
  diag[1][0] = -0.1;
  diag[1][1] = 0.9;
  CHECK(flatness_residual(cartan_flat<double>(g, u2, diag)) <= 1e-10);

  // non-commuting input is rejected, naming the offending pair
  std::vector<std::vector<double>> bad(2, std::vector<double>(3, 0.0));
  bad[0][0] = 1.0;
  bad[1][1] = 1.0;
  try {
    cartan_flat<double>(g, su2, bad);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::non_commuting);
    CHECK(std::string(e.what()).find("0 and 1") != std::string::npos);
  }
}

TEST_CASE("non-flat connection has positive residual") {
  auto su2 = LieAlgebraBasis::make("su2");
  TorusGrid g(2, 16);
  RealConnection a(GridForm<double>(g, 1, su2));
  std::vector<int> idx(2);
  for (std::size_t p = 0; p < g.npoints(); ++p) {
    g.coords(p, idx.data());
    a.form.field(1, 1)[p] = std::sin(kTau * g.x(idx[0]));  // B2 sin(2 pi x1) dx2
  }
  // analytic curvature norm: max |2 pi cos| = 2 pi
  CHECK(flatness_residual(a) == doctest::Approx(kTau).epsilon(1e-10));
}

TEST_CASE("winding gauge and recovery") {
  const cplx I(0.0, 1.0);

  // U(1) on the circle: Phi = e^{2 pi i x}, winding 1
  auto u1 = LieAlgebraBasis::make("u1");
  TorusGrid circle(1, 16);
  Matrix h(1, 1);
  h(0, 0) = kTau * I;
  GaugeField phi1 = winding_gauge(circle, u1, {1}, h);
  auto w1 = recover_windings(phi1, h);
  CHECK(w1[0] == doctest::Approx(1.0).epsilon(1e-12));

  // w = 0 gives the constant identity field
  GaugeField phi0 = winding_gauge(circle, u1, {0}, h);
  RealConnection triv = pure_gauge<double>(phi0);
  CHECK(max_norm(triv.form) <= 1e-14);

  // su2: H = 4 pi B3 closes; recover (1, 0)
  auto su2 = LieAlgebraBasis::make("su2");
  TorusGrid g(2, 16);
  Matrix s3(2, 2);
  s3 << 1, 0, 0, -1;
  Matrix h3 = 4.0 * kPi * s3 / (2.0 * I);
  GaugeField phi = winding_gauge(g, su2, {1, 0}, h3);
  auto w = recover_windings(phi, h3);
  CHECK(std::abs(w[0] - 1.0) <= 1e-9);
  CHECK(std::abs(w[1]) <= 1e-9);

  // non-closing direction is rejected
  Matrix open_dir = 1.7 * s3 / (2.0 * I);
  CHECK_THROWS_AS(winding_gauge(g, su2, {1, 0}, open_dir), Error);
}

TEST_CASE("winding product gauge is exactly band-limited and flat") {
  auto su2 = LieAlgebraBasis::make("su2");
  TorusGrid g(3, 16);
  GaugeField phi = su2_winding_product_gauge(g, su2, {1, 1, 1});
  CHECK(phi.fourier_tail() <= 1e-20);
  CHECK(phi.unitarity_defect() <= 1e-12);
  RealConnection a = pure_gauge<double>(phi);
  CHECK(flatness_residual(a) <= 1e-10);
}

TEST_CASE("gauge fields round-trip through the form layout") {
  auto su2 = LieAlgebraBasis::make("su2");
  TorusGrid g(2, 16);
  Rng rng(61);
  GaugeField phi = random_gauge_field(g, su2, rng, 1, 0.4);
  ComplexForm form = gauge_to_form(phi);
  GaugeField back = gauge_from_form(form, su2);
  double worst = 0.0;
  for (std::size_t i = 0; i < phi.data.size(); ++i)
    worst = std::max(worst, std::abs(phi.data[i] - back.data[i]));
  CHECK(worst == 0.0);
  CHECK_NOTHROW(back.validate());
}

TEST_CASE("tabulated family partials converge under node doubling") {
  auto su2 = LieAlgebraBasis::make("su2");
  TorusGrid g(2, 8);
  Rng rng(51);
  RealConnection a0 = zero_connection<double>(g, su2);
  RealConnection a1 = random_connection<double>(g, su2, rng, 1, 0.5);
  auto exact = straight_line_family(a0, a1);
  auto snapshots = [&](int count) {
    std::vector<RealConnection> snaps;
    for (int j = 0; j < count; ++j) {
      double t = double(j) / double(count - 1);
      // transcendental interior profile so the stencil error is visible
      double tt = 0.5 * (1.0 - std::cos(M_PI * t));
      GridForm<double> f = a0.form;
      add_scaled(f, a1.form - a0.form, tt);
      snaps.push_back(RealConnection(std::move(f)));
    }
    return tabulated_path_family(snaps);
  };
  auto coarse = snapshots(9), fine = snapshots(17);
  double u = 0.37;
  double dsigma = 0.5 * M_PI * std::sin(M_PI * u);
  GridForm<double> truth = scaled(a1.form - a0.form, dsigma);
  double err_c = max_norm(coarse.partial(&u, 0) - truth);
  double err_f = max_norm(fine.partial(&u, 0) - truth);
  CHECK(err_f <= err_c / 4.0);  // at least 2nd order under doubling
  CHECK(err_f <= 1e-4);
}
