#include "connection.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <map>
#include <memory>
#include <algorithm>
#include <mutex>

#include "spectral.hpp"

namespace flatlab {

namespace {

// Raw basis/Gram kernels for pointwise coefficient extraction.
struct AlgebraKernels {
  int d = 0, m = 0;
  std::vector<cplx> basis;      // m matrices, row-major d*d
  std::vector<cplx> gram_inv;   // m*m

  explicit AlgebraKernels(const LieAlgebraBasis& alg) : d(alg.mat_dim()), m(alg.dim()) {
    basis.resize(std::size_t(m) * d * d);
    for (int a = 0; a < m; ++a)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          basis[(std::size_t(a) * d + i) * d + std::size_t(j)] = alg.basis()[std::size_t(a)](i, j);
    Matrix gram(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        gram(a, b) = (alg.basis()[std::size_t(a)].adjoint() * alg.basis()[std::size_t(b)]).trace();
    Matrix gi = gram.inverse();
    gram_inv.resize(std::size_t(m) * m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) gram_inv[std::size_t(a) * m + std::size_t(b)] = gi(a, b);
  }

  void matrix_from_coeffs(const cplx* coeffs, cplx* out) const {
    for (int i = 0; i < d * d; ++i) out[i] = cplx(0.0);
    for (int a = 0; a < m; ++a) {
      const cplx f = coeffs[a];
      if (f == cplx(0.0)) continue;
      const cplx* b = basis.data() + std::size_t(a) * d * d;
      for (int i = 0; i < d * d; ++i) out[i] += f * b[i];
    }
  }

  // least-squares coefficients; returns squared Frobenius residual
  double coeffs_from_matrix(const cplx* x, cplx* out) const {
    // rhs_a = tr(B_a^dag X)
    cplx rhs[16];
    for (int a = 0; a < m; ++a) {
      const cplx* b = basis.data() + std::size_t(a) * d * d;
      cplx acc(0.0);
      for (int i = 0; i < d * d; ++i) acc += std::conj(b[i]) * x[i];
      rhs[a] = acc;
    }
    for (int a = 0; a < m; ++a) {
      cplx acc(0.0);
      for (int b = 0; b < m; ++b) acc += gram_inv[std::size_t(a) * m + std::size_t(b)] * rhs[b];
      out[a] = acc;
    }
    double res2 = 0.0;
    for (int i = 0; i < d * d; ++i) {
      cplx back(0.0);
      for (int a = 0; a < m; ++a)
        back += out[a] * basis[std::size_t(a) * d * d + std::size_t(i)];
      res2 += std::norm(back - x[i]);
    }
    return res2;
  }
};

const AlgebraKernels& kernels_for(const AlgebraPtr& alg) {
  static std::mutex mu;
  static std::map<const LieAlgebraBasis*, std::unique_ptr<AlgebraKernels>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(alg.get());
  if (it == cache.end())
    it = cache.emplace(alg.get(), std::make_unique<AlgebraKernels>(*alg)).first;
  return *it->second;
}

void matmul(const cplx* a, const cplx* b, cplx* out, int d) {
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      cplx acc(0.0);
      for (int k = 0; k < d; ++k) acc += a[i * d + k] * b[k * d + j];
      out[i * d + j] = acc;
    }
}

void madjoint(const cplx* a, cplx* out, int d) {
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out[i * d + j] = std::conj(a[j * d + i]);
}

}  // namespace

GaugeField::GaugeField(const TorusGrid& g, AlgebraPtr alg) : grid(g), algebra(std::move(alg)) {
  data.assign(std::size_t(d()) * d() * g.npoints(), cplx(0.0));
}

void GaugeField::get(std::size_t p, cplx* m) const {
  const int dd = d();
  for (int i = 0; i < dd * dd; ++i) m[i] = data[std::size_t(i) * grid.npoints() + p];
}

void GaugeField::set(std::size_t p, const cplx* m) {
  const int dd = d();
  for (int i = 0; i < dd * dd; ++i) data[std::size_t(i) * grid.npoints() + p] = m[i];
}

double GaugeField::unitarity_defect() const {
  const int dd = d();
  double worst = 0.0;
  cplx m[16], madj[16], prod[16];
  for (std::size_t p = 0; p < grid.npoints(); ++p) {
    get(p, m);
    madjoint(m, madj, dd);
    matmul(madj, m, prod, dd);
    double def = 0.0;
    for (int i = 0; i < dd; ++i)
      for (int j = 0; j < dd; ++j)
        def += std::norm(prod[i * dd + j] - (i == j ? cplx(1.0) : cplx(0.0)));
    worst = std::max(worst, std::sqrt(def));
  }
  return worst;
}

double GaugeField::fourier_tail() const {
  double worst = 0.0;
  for (int i = 0; i < d() * d(); ++i)
    worst = std::max(worst, fourier_tail_fraction(grid, entry(i / d(), i % d())));
  return worst;
}

void GaugeField::validate(double unitary_tol, double tail_tol) const {
  if (algebra->real_coeffs()) {
    double u = unitarity_defect();
    FLATLAB_REQUIRE(u <= unitary_tol, ErrorCode::invalid_gauge_field,
                    "gauge field is not unitary (defect " << u << ")");
  }
  double t = fourier_tail();
  FLATLAB_REQUIRE(t <= tail_tol, ErrorCode::invalid_gauge_field,
                  "gauge field fails the smoothness proxy (Fourier tail " << t << ")");
}

GaugeField identity_gauge(const TorusGrid& grid, const AlgebraPtr& algebra) {
  GaugeField phi(grid, algebra);
  for (int i = 0; i < phi.d(); ++i) {
    cplx* e = phi.entry(i, i);
    for (std::size_t p = 0; p < grid.npoints(); ++p) e[p] = cplx(1.0);
  }
  return phi;
}

GaugeField gauge_product(const GaugeField& a, const GaugeField& b) {
  FLATLAB_REQUIRE(a.grid == b.grid && a.algebra == b.algebra, ErrorCode::dimension_mismatch,
                  "gauge product needs matching grid/algebra");
  GaugeField out(a.grid, a.algebra);
  const int d = a.d();
  parallel_for(a.grid.npoints(), [&](std::size_t lo, std::size_t hi) {
    cplx ma[16], mb[16], mo[16];
    for (std::size_t p = lo; p < hi; ++p) {
      a.get(p, ma);
      b.get(p, mb);
      matmul(ma, mb, mo, d);
      out.set(p, mo);
    }
  });
  return out;
}

GaugeField gauge_inverse(const GaugeField& a) {
  GaugeField out(a.grid, a.algebra);
  const int d = a.d();
  parallel_for(a.grid.npoints(), [&](std::size_t lo, std::size_t hi) {
    cplx m[16], madj[16];
    for (std::size_t p = lo; p < hi; ++p) {
      a.get(p, m);
      madjoint(m, madj, d);
      out.set(p, madj);
    }
  });
  return out;
}

GaugeField gauge_exp_profile(const TorusGrid& grid, const AlgebraPtr& algebra, const Matrix& h,
                             const std::function<double(const double*)>& profile) {
  const int d = algebra->mat_dim();
  FLATLAB_REQUIRE(h.rows() == d && h.cols() == d, ErrorCode::dimension_mismatch,
                  "direction matrix has wrong shape");
  double anti = (h + h.adjoint()).norm();
  FLATLAB_REQUIRE(anti <= 1e-12, ErrorCode::invalid_group_element,
                  "direction must be anti-Hermitian");
  // H = V (i L) V^dag with L real; exp(f H) = V exp(i f L) V^dag
  Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(cplx(0, -1) * h));
  Matrix v = es.eigenvectors();
  Eigen::VectorXd lam = es.eigenvalues();
  GaugeField out(grid, algebra);
  parallel_for(grid.npoints(), [&](std::size_t lo, std::size_t hi) {
    std::vector<int> idx(std::size_t(grid.n));
    double x[4];
    Matrix e(d, d), m(d, d);
    cplx buf[16];
    for (std::size_t p = lo; p < hi; ++p) {
      grid.coords(p, idx.data());
      for (int a = 0; a < grid.n; ++a) x[a] = grid.x(idx[std::size_t(a)]);
      const double f = profile(x);
      e.setZero();
      for (int i = 0; i < d; ++i) e(i, i) = std::exp(cplx(0.0, f * lam(i)));
      m = v * e * v.adjoint();
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) buf[i * d + j] = m(i, j);
      out.set(p, buf);
    }
  });
  return out;
}

GaugeField gauge_exp(const RealForm& x0form) {
  FLATLAB_REQUIRE(x0form.degree == 0 && !x0form.is_scalar(), ErrorCode::dimension_mismatch,
                  "gauge_exp needs a lie-valued 0-form");
  const AlgebraPtr alg = x0form.algebra;
  const auto& ker = kernels_for(alg);
  const int d = ker.d;
  GaugeField out(x0form.grid, alg);
  parallel_for(x0form.grid.npoints(), [&](std::size_t lo, std::size_t hi) {
    cplx coeffs[16], xm[16], buf[16];
    Matrix m(d, d);
    for (std::size_t p = lo; p < hi; ++p) {
      for (int a = 0; a < ker.m; ++a) coeffs[a] = cplx(x0form.field(0, a)[p], 0.0);
      ker.matrix_from_coeffs(coeffs, xm);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = xm[i * d + j];
      Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(cplx(0, -1) * m));
      Matrix e = Matrix::Zero(d, d);
      for (int i = 0; i < d; ++i) e(i, i) = std::exp(cplx(0.0, es.eigenvalues()(i)));
      Matrix g = es.eigenvectors() * e * es.eigenvectors().adjoint();
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) buf[i * d + j] = g(i, j);
      out.set(p, buf);
    }
  });
  return out;
}

GaugeField gauge_from_matrices(const TorusGrid& grid, const AlgebraPtr& algebra,
                               const std::function<void(const double*, cplx*)>& eval) {
  GaugeField out(grid, algebra);
  parallel_for(grid.npoints(), [&](std::size_t lo, std::size_t hi) {
    std::vector<int> idx(std::size_t(grid.n));
    double x[4];
    cplx buf[16];
    for (std::size_t p = lo; p < hi; ++p) {
      grid.coords(p, idx.data());
      for (int a = 0; a < grid.n; ++a) x[a] = grid.x(idx[std::size_t(a)]);
      eval(x, buf);
      out.set(p, buf);
    }
  });
  return out;
}

GaugeField random_gauge_field(const TorusGrid& grid, const AlgebraPtr& algebra, Rng& rng,
                              int max_mode, double amplitude) {
  RealForm x = random_band_limited<double>(grid, 0, algebra, rng, max_mode, amplitude);
  return gauge_exp(x);
}

ComplexForm gauge_to_form(const GaugeField& phi) {
  const int d = phi.d();
  AlgebraPtr gl = LieAlgebraBasis::make("gl" + std::to_string(d));
  ComplexForm out(phi.grid, 0, gl);
  for (int e = 0; e < d * d; ++e) {
    const cplx* src = phi.entry(e / d, e % d);
    cplx* dst = out.field(0, e);
    std::copy(src, src + phi.grid.npoints(), dst);
  }
  return out;
}

GaugeField gauge_from_form(const ComplexForm& form, const AlgebraPtr& algebra) {
  FLATLAB_REQUIRE(form.degree == 0 && form.algebra && form.algebra->name()[0] == 'g',
                  ErrorCode::dimension_mismatch, "expected a gl-valued 0-form");
  const int d = algebra->mat_dim();
  FLATLAB_REQUIRE(form.lie_dim == d * d, ErrorCode::dimension_mismatch,
                  "entry count does not match the group size");
  GaugeField out(form.grid, algebra);
  for (int e = 0; e < d * d; ++e) {
    const cplx* src = form.field(0, e);
    cplx* dst = out.entry(e / d, e % d);
    std::copy(src, src + form.grid.npoints(), dst);
  }
  return out;
}

template <class S>
GridForm<S> curvature(const Connection<S>& a) {
  FLATLAB_REQUIRE(a.grid().n >= 2, ErrorCode::degree_error,
                  "curvature needs a torus of dimension >= 2");
  GridForm<S> f = d_or_zero(a.form);
  GridForm<S> br = wedge_bracket(a.form, a.form);
  add_scaled(f, br, S(0.5));
  return f;
}

template <class S>
GridForm<S> covariant_derivative(const Connection<S>& a, const GridForm<S>& xi) {
  check_same_grid(a.form, xi);
  GridForm<S> out = d_or_zero(xi);
  if (xi.degree + 1 <= xi.grid.n) {
    GridForm<S> br = wedge_bracket(a.form, xi);
    add_scaled(out, br, S(1));
  }
  return out;
}

template <class S>
double flatness_residual(const Connection<S>& a) {
  return max_norm(curvature(a));
}

template <class S>
Connection<S> gauge_transform(const GaugeField& phi, const Connection<S>& a,
                              bool validate_field) {
  FLATLAB_REQUIRE(phi.grid == a.grid() && phi.algebra == a.algebra(),
                  ErrorCode::dimension_mismatch, "gauge field does not match the connection");
  if (validate_field) phi.validate();
  const AlgebraPtr alg = a.algebra();
  const auto& ker = kernels_for(alg);
  const int d = ker.d;
  const int m = ker.m;
  const int n = a.grid().n;
  const std::size_t np = a.grid().npoints();

  // spectral derivative of every entry field, one axis at a time
  std::vector<std::vector<cplx>> dphi{std::size_t(n)};
  for (int ax = 0; ax < n; ++ax) {
    dphi[std::size_t(ax)].resize(std::size_t(d) * d * np);
    for (int e = 0; e < d * d; ++e)
      spectral_derivative(a.grid(), phi.entry(e / d, e % d),
                          dphi[std::size_t(ax)].data() + std::size_t(e) * np, ax);
  }

  Connection<S> out(GridForm<S>(a.grid(), 1, alg));
  const bool real_out = alg->real_coeffs();
  std::vector<double> worst_imag(np / kChunk + 1, 0.0);
  std::vector<double> worst_res(np / kChunk + 1, 0.0);
  parallel_for(np, [&](std::size_t lo, std::size_t hi) {
    cplx g[16], gadj[16], am[16], t1[16], t2[16], coeffs[16], dg[16];
    double wi = 0.0, wr = 0.0;
    for (std::size_t p = lo; p < hi; ++p) {
      phi.get(p, g);
      madjoint(g, gadj, d);
      for (int ax = 0; ax < n; ++ax) {
        // A_i as a matrix
        for (int i = 0; i < m; ++i) {
          if constexpr (std::is_same_v<S, double>)
            coeffs[i] = cplx(a.form.field(ax, i)[p], 0.0);
          else
            coeffs[i] = a.form.field(ax, i)[p];
        }
        ker.matrix_from_coeffs(coeffs, am);
        matmul(g, am, t1, d);
        matmul(t1, gadj, t2, d);  // g A g^{-1}
        for (int e = 0; e < d * d; ++e) dg[e] = dphi[std::size_t(ax)][std::size_t(e) * np + p];
        matmul(dg, gadj, t1, d);  // (d_ax g) g^{-1}
        for (int e = 0; e < d * d; ++e) t2[e] -= t1[e];
        double res2 = ker.coeffs_from_matrix(t2, coeffs);
        wr = std::max(wr, res2);
        for (int i = 0; i < m; ++i) {
          if constexpr (std::is_same_v<S, double>) {
            out.form.field(ax, i)[p] = coeffs[i].real();
            wi = std::max(wi, std::abs(coeffs[i].imag()));
          } else {
            out.form.field(ax, i)[p] = coeffs[i];
          }
        }
      }
    }
    worst_imag[lo / kChunk] = wi;
    worst_res[lo / kChunk] = wr;
  });
  double res = 0.0, imag = 0.0;
  for (double v : worst_res) res = std::max(res, v);
  for (double v : worst_imag) imag = std::max(imag, v);
  FLATLAB_REQUIRE(std::sqrt(res) < 1e-8, ErrorCode::invalid_gauge_field,
                  "transformed connection left the algebra (residual " << std::sqrt(res) << ")");
  if (real_out)
    FLATLAB_REQUIRE(imag < 1e-8, ErrorCode::invalid_gauge_field,
                    "transformed connection has complex coefficients (" << imag << ")");
  return out;
}

template <class S>
GridForm<S> gauge_adjoint(const GaugeField& phi, const GridForm<S>& w) {
  FLATLAB_REQUIRE(phi.grid == w.grid && phi.algebra == w.algebra, ErrorCode::dimension_mismatch,
                  "gauge field does not match the form");
  const auto& ker = kernels_for(w.algebra);
  const int d = ker.d;
  const int m = ker.m;
  const std::size_t np = w.grid.npoints();
  GridForm<S> out(w.grid, w.degree, w.algebra);
  for (int c = 0; c < w.ncomp(); ++c) {
    parallel_for(np, [&](std::size_t lo, std::size_t hi) {
      cplx g[16], gadj[16], xm[16], t1[16], t2[16], coeffs[16];
      for (std::size_t p = lo; p < hi; ++p) {
        phi.get(p, g);
        madjoint(g, gadj, d);
        for (int i = 0; i < m; ++i) {
          if constexpr (std::is_same_v<S, double>)
            coeffs[i] = cplx(w.field(c, i)[p], 0.0);
          else
            coeffs[i] = w.field(c, i)[p];
        }
        ker.matrix_from_coeffs(coeffs, xm);
        matmul(g, xm, t1, d);
        matmul(t1, gadj, t2, d);
        ker.coeffs_from_matrix(t2, coeffs);
        for (int i = 0; i < m; ++i) {
          if constexpr (std::is_same_v<S, double>)
            out.field(c, i)[p] = coeffs[i].real();
          else
            out.field(c, i)[p] = coeffs[i];
        }
      }
    });
  }
  return out;
}

template <class S>
Connection<S> cartan_flat(const TorusGrid& grid, const AlgebraPtr& algebra,
                          const std::vector<std::vector<S>>& theta_coeffs) {
  FLATLAB_REQUIRE(int(theta_coeffs.size()) == grid.n, ErrorCode::dimension_mismatch,
                  "need one element per axis, got " << theta_coeffs.size());
  const int m = algebra->dim();
  for (const auto& th : theta_coeffs)
    FLATLAB_REQUIRE(int(th.size()) == m, ErrorCode::dimension_mismatch,
                    "coefficient vector has wrong length");
  std::vector<S> br(std::size_t(m), S(0));
  for (int i = 0; i < grid.n; ++i)
    for (int j = i + 1; j < grid.n; ++j) {
      algebra->bracket(theta_coeffs[std::size_t(i)].data(), theta_coeffs[std::size_t(j)].data(),
                       br.data());
      double norm = 0.0;
      for (const auto& v : br) norm = std::max(norm, std::abs(v));
      FLATLAB_REQUIRE(norm <= 1e-12, ErrorCode::non_commuting,
                      "axis elements " << i << " and " << j << " do not commute (|[.,.]| = "
                                       << norm << ")");
    }
  Connection<S> out(GridForm<S>(grid, 1, algebra));
  for (int i = 0; i < grid.n; ++i)
    for (int a = 0; a < m; ++a) {
      S* f = out.form.field(i, a);
      const S v = theta_coeffs[std::size_t(i)][std::size_t(a)];
      for (std::size_t p = 0; p < grid.npoints(); ++p) f[p] = v;
    }
  return out;
}

GaugeField winding_gauge(const TorusGrid& grid, const AlgebraPtr& algebra,
                         const std::vector<int>& w, const Matrix& h) {
  FLATLAB_REQUIRE(int(w.size()) == grid.n, ErrorCode::dimension_mismatch,
                  "winding vector must have one entry per axis");
  double closing = (h.exp() - Matrix::Identity(h.rows(), h.cols())).norm();
  FLATLAB_REQUIRE(closing <= 1e-10, ErrorCode::invalid_group_element,
                  "direction does not close: |exp(H) - I| = " << closing);
  std::vector<double> wd(w.begin(), w.end());
  return gauge_exp_profile(grid, algebra, h, [wd, n = grid.n](const double* x) {
    double f = 0.0;
    for (int i = 0; i < n; ++i) f += wd[std::size_t(i)] * x[i];
    return f;
  });
}

std::vector<double> recover_windings(const GaugeField& phi, const Matrix& h) {
  const int d = phi.d();
  const int n = phi.grid.n;
  const std::size_t np = phi.grid.npoints();
  const double h2 = std::abs(cplx((h.adjoint() * h).trace()));
  std::vector<double> out(std::size_t(n), 0.0);
  std::vector<cplx> dphi(std::size_t(d) * d * np);
  std::vector<double> vals(np);
  cplx hadj[16];
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) hadj[i * d + j] = std::conj(h(j, i));
  for (int ax = 0; ax < n; ++ax) {
    for (int e = 0; e < d * d; ++e)
      spectral_derivative(phi.grid, phi.entry(e / d, e % d),
                          dphi.data() + std::size_t(e) * np, ax);
    parallel_for(np, [&](std::size_t lo, std::size_t hi) {
      cplx g[16], gadj[16], dg[16], r[16];
      for (std::size_t p = lo; p < hi; ++p) {
        phi.get(p, g);
        madjoint(g, gadj, d);
        for (int e = 0; e < d * d; ++e) dg[e] = dphi[std::size_t(e) * np + p];
        matmul(dg, gadj, r, d);
        cplx tr(0.0);
        for (int i = 0; i < d; ++i)
          for (int k = 0; k < d; ++k) tr += hadj[i * d + k] * r[k * d + i];
        vals[p] = tr.real();
      }
    });
    out[std::size_t(ax)] = pairwise_sum(vals.data(), np) / double(np) / h2;
  }
  return out;
}

template <class S>
Connection<S> zero_connection(const TorusGrid& grid, const AlgebraPtr& algebra) {
  return Connection<S>(GridForm<S>(grid, 1, algebra));
}

template <class S>
Connection<S> pure_gauge(const GaugeField& phi) {
  return gauge_transform(phi, zero_connection<S>(phi.grid, phi.algebra), false);
}

template <class S>
Connection<S> random_connection(const TorusGrid& grid, const AlgebraPtr& algebra, Rng& rng,
                                int max_mode, double amplitude) {
  return Connection<S>(random_band_limited<S>(grid, 1, algebra, rng, max_mode, amplitude));
}

#define FLATLAB_INSTANTIATE(S)                                                               \
  template struct Connection<S>;                                                             \
  template GridForm<S> curvature<S>(const Connection<S>&);                                   \
  template GridForm<S> covariant_derivative<S>(const Connection<S>&, const GridForm<S>&);    \
  template double flatness_residual<S>(const Connection<S>&);                                \
  template Connection<S> gauge_transform<S>(const GaugeField&, const Connection<S>&, bool);  \
  template GridForm<S> gauge_adjoint<S>(const GaugeField&, const GridForm<S>&);              \
  template Connection<S> cartan_flat<S>(const TorusGrid&, const AlgebraPtr&,                 \
                                        const std::vector<std::vector<S>>&);                 \
  template Connection<S> zero_connection<S>(const TorusGrid&, const AlgebraPtr&);            \
  template Connection<S> pure_gauge<S>(const GaugeField&);                                   \
  template Connection<S> random_connection<S>(const TorusGrid&, const AlgebraPtr&, Rng&,     \
                                              int, double);

FLATLAB_INSTANTIATE(double)
FLATLAB_INSTANTIATE(cplx)
#undef FLATLAB_INSTANTIATE

}  // namespace flatlab
