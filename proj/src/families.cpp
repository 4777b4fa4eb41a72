#include "families.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include <unsupported/Eigen/MatrixFunctions>

#include "spectral.hpp"

namespace flatlab {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kPi = 3.1415926535897932384626433832795;

// Gauss-Legendre rule on [-1,1] by Newton iteration on P_n.
void legendre_rule(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(std::size_t(n));
  w.resize(std::size_t(n));
  for (int i = 0; i < n; ++i) {
    double t = std::cos(kPi * (double(i) + 0.75) / (double(n) + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = t;
      for (int j = 2; j <= n; ++j) {
        double p2 = ((2.0 * j - 1.0) * t * p1 - (j - 1.0) * p0) / double(j);
        p0 = p1;
        p1 = p2;
      }
      double dp = double(n) * (t * p1 - p0) / (t * t - 1.0);
      double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    double p0 = 1.0, p1 = t;
    for (int j = 2; j <= n; ++j) {
      double p2 = ((2.0 * j - 1.0) * t * p1 - (j - 1.0) * p0) / double(j);
      p0 = p1;
      p1 = p2;
    }
    double dp = double(n) * (t * p1 - p0) / (t * t - 1.0);
    x[std::size_t(n - 1 - i)] = t;
    w[std::size_t(n - 1 - i)] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}
}  // namespace

QuadAxis QuadAxis::gauss(int order, int panels) {
  FLATLAB_REQUIRE(order >= 4, ErrorCode::config_error,
                  "Gauss order must be at least 4, got " << order);
  FLATLAB_REQUIRE(panels >= 1, ErrorCode::config_error, "panel count must be positive");
  QuadAxis ax;
  ax.periodic = false;
  ax.order = order;
  ax.panels = panels;
  std::vector<double> x, w;
  legendre_rule(order, x, w);
  const double h = 1.0 / double(panels);
  for (int p = 0; p < panels; ++p)
    for (int i = 0; i < order; ++i) {
      ax.nodes.push_back((double(p) + 0.5 + 0.5 * x[std::size_t(i)]) * h);
      ax.weights.push_back(0.5 * h * w[std::size_t(i)]);
    }
  return ax;
}

QuadAxis QuadAxis::periodic_uniform(int nodes) {
  FLATLAB_REQUIRE(nodes >= 4, ErrorCode::config_error,
                  "periodic axis needs at least 4 nodes, got " << nodes);
  QuadAxis ax;
  ax.periodic = true;
  ax.order = nodes;
  ax.panels = 1;
  for (int i = 0; i < nodes; ++i) {
    ax.nodes.push_back(double(i) / double(nodes));
    ax.weights.push_back(1.0 / double(nodes));
  }
  return ax;
}

ParameterDomain ParameterDomain::interval(int order, int panels) {
  ParameterDomain d;
  d.shape = Shape::interval;
  d.k = 1;
  d.axes = {QuadAxis::gauss(order, panels)};
  return d;
}

ParameterDomain ParameterDomain::cylinder(int gauss_order, int gauss_panels, int loop_nodes) {
  ParameterDomain d;
  d.shape = Shape::cylinder;
  d.k = 2;
  d.axes = {QuadAxis::gauss(gauss_order, gauss_panels), QuadAxis::periodic_uniform(loop_nodes)};
  return d;
}

std::size_t ParameterDomain::node_count() const {
  std::size_t c = 1;
  for (const auto& ax : axes) c *= ax.nodes.size();
  return c;
}

void ParameterDomain::node(std::size_t i, double* u, double* weight) const {
  double w = 1.0;
  for (int a = k - 1; a >= 0; --a) {
    const auto& ax = axes[std::size_t(a)];
    std::size_t m = ax.nodes.size();
    std::size_t j = i % m;
    i /= m;
    u[a] = ax.nodes[j];
    w *= ax.weights[j];
  }
  *weight = w;
}

double ParameterDomain::volume() const {
  double v = 0.0;
  std::size_t n = node_count();
  std::vector<double> u(std::size_t(k), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double w;
    node(i, u.data(), &w);
    v += w;
  }
  return v;
}

double gauss01(const std::function<double(double)>& f, int order, int panels) {
  QuadAxis ax = QuadAxis::gauss(order, panels);
  double acc = 0.0;
  for (std::size_t i = 0; i < ax.nodes.size(); ++i) acc += ax.weights[i] * f(ax.nodes[i]);
  return acc;
}

void flatten_map(double s, double* value, double* deriv) {
  auto psi = [](double t) { return t - std::sin(kTwoPi * t) / kTwoPi; };
  auto dpsi = [](double t) { return 1.0 - std::cos(kTwoPi * t); };
  double inner = psi(s);
  *value = psi(inner);
  *deriv = dpsi(inner) * dpsi(s);
}

template <class S>
ConnectionFamily<S> straight_line_family(const Connection<S>& a0, const Connection<S>& a1,
                                         int gauss_order, int gauss_panels) {
  check_same_grid(a0.form, a1.form);
  ConnectionFamily<S> fam;
  fam.kind = "straight_line";
  fam.k = 1;
  fam.domain = ParameterDomain::interval(gauss_order, gauss_panels);
  auto xi = std::make_shared<GridForm<S>>(a1.form - a0.form);
  auto base = std::make_shared<GridForm<S>>(a0.form);
  fam.at = [base, xi](const double* u) {
    GridForm<S> f = *base;
    add_scaled(f, *xi, S(u[0]));
    return Connection<S>(std::move(f));
  };
  fam.partial = [xi](const double*, int) { return *xi; };
  fam.boundary_samples = {{0.0}, {1.0}};
  return fam;
}

namespace {

// Loop snapshots are reused across every t node sharing an s value.
template <class S>
struct LoopMemo {
  const ConnectionLoop<S> loop;
  std::mutex mu;
  std::map<double, GridForm<S>> values;
  std::map<double, GridForm<S>> derivatives;

  explicit LoopMemo(const ConnectionLoop<S>& l) : loop(l) {}

  GridForm<S> value(double s) {
    std::lock_guard<std::mutex> lock(mu);
    auto it = values.find(s);
    if (it == values.end()) it = values.emplace(s, loop.at(s).form).first;
    return it->second;
  }
  GridForm<S> derivative(double s) {
    std::lock_guard<std::mutex> lock(mu);
    auto it = derivatives.find(s);
    if (it == derivatives.end()) it = derivatives.emplace(s, loop.derivative(s)).first;
    return it->second;
  }
};

}  // namespace

template <class S>
ConnectionFamily<S> cone_family(const ConnectionLoop<S>& loop, const Connection<S>& a0,
                                int gauss_order, int gauss_panels, int loop_nodes) {
  ConnectionFamily<S> fam;
  fam.kind = "cone";
  fam.k = 2;
  fam.domain = ParameterDomain::cylinder(gauss_order, gauss_panels, loop_nodes);
  auto base = std::make_shared<Connection<S>>(a0);
  auto memo = std::make_shared<LoopMemo<S>>(loop);
  fam.at = [base, memo](const double* u) {
    const double t = u[0], s = u[1];
    GridForm<S> f = base->form;
    GridForm<S> ls = memo->value(s);
    add_scaled(ls, base->form, S(-1.0));
    add_scaled(f, ls, S(t));
    return Connection<S>(std::move(f));
  };
  fam.partial = [base, memo](const double* u, int axis) {
    const double t = u[0], s = u[1];
    if (axis == 0) {
      GridForm<S> xi = memo->value(s);
      add_scaled(xi, base->form, S(-1.0));
      return xi;
    }
    return scaled(memo->derivative(s), S(t));
  };
  const auto& s_axis = fam.domain.axes[1];
  for (double s : s_axis.nodes) {
    fam.boundary_samples.push_back({0.0, s});
    fam.boundary_samples.push_back({1.0, s});
  }
  return fam;
}

template <class S>
ConnectionFamily<S> reparametrized_family(const ConnectionFamily<S>& f,
                                          const GridForm<S>* bump_direction, double bump_amp) {
  ConnectionFamily<S> out;
  out.kind = f.kind + "_reparametrized";
  out.k = f.k;
  out.domain = f.domain;
  out.boundary_samples = f.boundary_samples;
  std::shared_ptr<GridForm<S>> bump;
  if (bump_direction && bump_amp != 0.0) bump = std::make_shared<GridForm<S>>(*bump_direction);
  auto inner = std::make_shared<ConnectionFamily<S>>(f);
  auto warp = [](const double* u, int k, double* v) {
    v[0] = u[0] * u[0] * (3.0 - 2.0 * u[0]);  // cubic with matching endpoints
    for (int a = 1; a < k; ++a) v[a] = u[a];
  };
  out.at = [inner, bump, bump_amp, warp](const double* u) {
    double v[4];
    warp(u, inner->k, v);
    Connection<S> c = inner->at(v);
    if (bump) add_scaled(c.form, *bump, S(bump_amp * std::sin(kPi * u[0])));
    return c;
  };
  out.partial = [inner, bump, bump_amp, warp](const double* u, int axis) {
    double v[4];
    warp(u, inner->k, v);
    GridForm<S> p = inner->partial(v, axis);
    if (axis == 0) {
      const double dsigma = 6.0 * u[0] * (1.0 - u[0]);
      p = scaled(p, S(dsigma));
      if (bump) add_scaled(p, *bump, S(bump_amp * kPi * std::cos(kPi * u[0])));
    }
    return p;
  };
  return out;
}

template <class S>
ConnectionFamily<S> tabulated_path_family(const std::vector<Connection<S>>& snapshots,
                                          int gauss_order, int gauss_panels) {
  FLATLAB_REQUIRE(snapshots.size() >= 5, ErrorCode::config_error,
                  "tabulated path needs at least 5 snapshots");
  ConnectionFamily<S> fam;
  fam.kind = "tabulated";
  fam.k = 1;
  fam.domain = ParameterDomain::interval(gauss_order, gauss_panels);
  auto snaps = std::make_shared<std::vector<Connection<S>>>(snapshots);
  const int M = int(snapshots.size()) - 1;
  // 5-point Lagrange window around u, one-sided near the ends
  auto window = [M](double u, int* j0) {
    int c = int(std::floor(u * M + 0.5));
    int j = std::clamp(c - 2, 0, M - 4);
    *j0 = j;
  };
  auto lagrange = [M](double u, int j0, double* wv, double* wd) {
    double tj[5];
    for (int i = 0; i < 5; ++i) tj[i] = double(j0 + i) / double(M);
    for (int i = 0; i < 5; ++i) {
      double num = 1.0, den = 1.0;
      for (int l = 0; l < 5; ++l) {
        if (l == i) continue;
        num *= (u - tj[l]);
        den *= (tj[i] - tj[l]);
      }
      wv[i] = num / den;
      double dsum = 0.0;
      for (int skip = 0; skip < 5; ++skip) {
        if (skip == i) continue;
        double prod = 1.0;
        for (int l = 0; l < 5; ++l) {
          if (l == i || l == skip) continue;
          prod *= (u - tj[l]);
        }
        dsum += prod;
      }
      wd[i] = dsum / den;
    }
  };
  fam.at = [snaps, window, lagrange](const double* u) {
    int j0;
    double wv[5], wd[5];
    window(u[0], &j0);
    lagrange(u[0], j0, wv, wd);
    GridForm<S> f = scaled((*snaps)[std::size_t(j0)].form, S(wv[0]));
    for (int i = 1; i < 5; ++i) add_scaled(f, (*snaps)[std::size_t(j0 + i)].form, S(wv[i]));
    return Connection<S>(std::move(f));
  };
  fam.partial = [snaps, window, lagrange](const double* u, int) {
    int j0;
    double wv[5], wd[5];
    window(u[0], &j0);
    lagrange(u[0], j0, wv, wd);
    GridForm<S> f = scaled((*snaps)[std::size_t(j0)].form, S(wd[0]));
    for (int i = 1; i < 5; ++i) add_scaled(f, (*snaps)[std::size_t(j0 + i)].form, S(wd[i]));
    return f;
  };
  fam.boundary_samples = {{0.0}, {1.0}};
  return fam;
}

template <class S>
ConnectionLoop<S> cartan_circle_loop(const TorusGrid& grid, const AlgebraPtr& algebra,
                                     const std::vector<std::vector<S>>& base,
                                     const std::vector<std::vector<S>>& cos_part,
                                     const std::vector<std::vector<S>>& sin_part,
                                     bool flatten_ends) {
  const int n = grid.n;
  const int m = algebra->dim();
  FLATLAB_REQUIRE(int(base.size()) == n && int(cos_part.size()) == n && int(sin_part.size()) == n,
                  ErrorCode::dimension_mismatch, "need coefficients per axis");
  // all directions must commute pairwise so every loop point is flat
  std::vector<const std::vector<S>*> all;
  for (int i = 0; i < n; ++i) {
    all.push_back(&base[std::size_t(i)]);
    all.push_back(&cos_part[std::size_t(i)]);
    all.push_back(&sin_part[std::size_t(i)]);
  }
  std::vector<S> br(std::size_t(m), S(0));
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      algebra->bracket(all[i]->data(), all[j]->data(), br.data());
      double norm = 0.0;
      for (const auto& v : br) norm = std::max(norm, std::abs(v));
      FLATLAB_REQUIRE(norm <= 1e-12, ErrorCode::non_commuting,
                      "loop directions do not commute");
    }
  ConnectionLoop<S> loop;
  loop.at = [grid, algebra, base, cos_part, sin_part, flatten_ends, n, m](double s) {
    double u = s, du;
    if (flatten_ends) flatten_map(s, &u, &du);
    const double c = std::cos(kTwoPi * u), sn = std::sin(kTwoPi * u);
    std::vector<std::vector<S>> theta(std::size_t(n), std::vector<S>(std::size_t(m), S(0)));
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < m; ++a)
        theta[std::size_t(i)][std::size_t(a)] = base[std::size_t(i)][std::size_t(a)] +
                                                S(c) * cos_part[std::size_t(i)][std::size_t(a)] +
                                                S(sn) * sin_part[std::size_t(i)][std::size_t(a)];
    return cartan_flat<S>(grid, algebra, theta);
  };
  loop.derivative = [grid, algebra, cos_part, sin_part, flatten_ends, n, m](double s) {
    double u = s, du = 1.0;
    if (flatten_ends) flatten_map(s, &u, &du);
    const double c = std::cos(kTwoPi * u), sn = std::sin(kTwoPi * u);
    GridForm<S> f(grid, 1, algebra);
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < m; ++a) {
        const S v = S(kTwoPi * du) * (S(-sn) * cos_part[std::size_t(i)][std::size_t(a)] +
                                      S(c) * sin_part[std::size_t(i)][std::size_t(a)]);
        S* fld = f.field(i, a);
        for (std::size_t p = 0; p < grid.npoints(); ++p) fld[p] = v;
      }
    return f;
  };
  return loop;
}

template <class S>
ConnectionLoop<S> gauge_orbit_loop(const GaugeLoop& loop, const Connection<S>& a0) {
  auto base = std::make_shared<Connection<S>>(a0);
  ConnectionLoop<S> out;
  out.at = [loop, base](double s) { return gauge_transform(loop.at(s), *base, false); };
  out.derivative = [loop, base](double s) {
    Connection<S> a = gauge_transform(loop.at(s), *base, false);
    RealForm w_real = loop.log_derivative(s);
    GridForm<S> w;
    if constexpr (std::is_same_v<S, double>)
      w = w_real;
    else
      w = complexify(w_real);
    // dA/ds = [W ^ A] - dW
    GridForm<S> dot = wedge_bracket(w, a.form);
    add_scaled(dot, d_or_zero(w), S(-1.0));
    return dot;
  };
  return out;
}

template <class S>
ConnectionLoop<S> concatenate_loops(const ConnectionLoop<S>& l1, const ConnectionLoop<S>& l2) {
  ConnectionLoop<S> out;
  out.at = [l1, l2](double s) {
    return s < 0.5 ? l1.at(2.0 * s) : l2.at(2.0 * s - 1.0);
  };
  out.derivative = [l1, l2](double s) {
    GridForm<S> d = s < 0.5 ? l1.derivative(2.0 * s) : l2.derivative(2.0 * s - 1.0);
    return scaled(d, S(2.0));
  };
  return out;
}

template <class S>
ConnectionLoop<S> sum_loops(const ConnectionLoop<S>& l1, const ConnectionLoop<S>& l2) {
  ConnectionLoop<S> out;
  out.at = [l1, l2](double s) {
    Connection<S> a = l1.at(s);
    add_scaled(a.form, l2.at(s).form, S(1.0));
    return a;
  };
  out.derivative = [l1, l2](double s) {
    GridForm<S> d = l1.derivative(s);
    add_scaled(d, l2.derivative(s), S(1.0));
    return d;
  };
  return out;
}

template <class S>
ConnectionLoop<S> gauge_transformed_loop(const GaugeLoop& phi, const ConnectionLoop<S>& loop) {
  ConnectionLoop<S> out;
  out.at = [phi, loop](double s) { return gauge_transform(phi.at(s), loop.at(s), false); };
  out.derivative = [phi, loop](double s) {
    // d/ds (Phi.A) = Ad_Phi(dA/ds) + [W ^ Phi.A] - dW
    GaugeField g = phi.at(s);
    Connection<S> moved = gauge_transform(g, loop.at(s), false);
    GridForm<S> dot = gauge_adjoint(g, loop.derivative(s));
    RealForm w_real = phi.log_derivative(s);
    GridForm<S> w;
    if constexpr (std::is_same_v<S, double>)
      w = w_real;
    else
      w = complexify(w_real);
    add_scaled(dot, wedge_bracket(w, moved.form), S(1.0));
    add_scaled(dot, d_or_zero(w), S(-1.0));
    return dot;
  };
  return out;
}

template <class S>
ConnectionLoop<S> reparametrized_loop(const ConnectionLoop<S>& loop, double amp) {
  ConnectionLoop<S> out;
  out.at = [loop, amp](double s) {
    return loop.at(s + amp * std::sin(kTwoPi * s) / kTwoPi);
  };
  out.derivative = [loop, amp](double s) {
    const double u = s + amp * std::sin(kTwoPi * s) / kTwoPi;
    const double du = 1.0 + amp * std::cos(kTwoPi * s);
    return scaled(loop.derivative(u), S(du));
  };
  return out;
}

template <class S>
ConnectionLoop<S> double_traversal(const ConnectionLoop<S>& loop) {
  ConnectionLoop<S> out;
  out.at = [loop](double s) {
    double u = 2.0 * s;
    if (u >= 1.0) u -= 1.0;
    return loop.at(u);
  };
  out.derivative = [loop](double s) {
    double u = 2.0 * s;
    if (u >= 1.0) u -= 1.0;
    return scaled(loop.derivative(u), S(2.0));
  };
  return out;
}

namespace {

Matrix su2_generator(int j) {
  const cplx I(0.0, 1.0);
  Matrix s(2, 2);
  if (j == 0) s << 0, 1, 1, 0;
  else if (j == 1) s << 0, -I, I, 0;
  else s << 1, 0, 0, -1;
  return s / (2.0 * I);
}

RealForm log_derivative_form(const TorusGrid& grid, const AlgebraPtr& algebra,
                             const std::function<void(const double*, cplx*)>& w_eval) {
  RealForm out(grid, 0, algebra);
  const int d = algebra->mat_dim();
  const int m = algebra->dim();
  parallel_for(grid.npoints(), [&](std::size_t lo, std::size_t hi) {
    std::vector<int> idx(std::size_t(grid.n));
    double x[4];
    cplx buf[16];
    Matrix wm(d, d);
    for (std::size_t p = lo; p < hi; ++p) {
      grid.coords(p, idx.data());
      for (int a = 0; a < grid.n; ++a) x[a] = grid.x(idx[std::size_t(a)]);
      w_eval(x, buf);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) wm(i, j) = buf[i * d + j];
      double res;
      Eigen::VectorXcd c = algebra->coeffs_of(wm, &res);
      for (int a = 0; a < m; ++a) out.field(0, a)[p] = c(a).real();
    }
  });
  return out;
}

}  // namespace

GaugeLoop rotor_gauge_loop(const TorusGrid& grid, const AlgebraPtr& algebra, int rotor_axis,
                           int x_start, int x_count) {
  FLATLAB_REQUIRE(algebra->mat_dim() == 2, ErrorCode::config_error,
                  "rotor loop needs 2x2 matrices (su2 or u2)");
  FLATLAB_REQUIRE(grid.n >= 2, ErrorCode::dimension_mismatch, "rotor loop needs n >= 2");
  const double c = 4.0 * kPi;
  if (x_count < 0) x_count = std::min(grid.n, 3);
  FLATLAB_REQUIRE(x_start >= 0 && x_start + x_count <= grid.n, ErrorCode::dimension_mismatch,
                  "rotor axis window out of range");
  Matrix ba = su2_generator(rotor_axis % 3);
  // exp(theta B) = cos(theta/2) I + 2 sin(theta/2) B for B = sigma/(2i)
  auto rot = [](double theta, const Matrix& b) {
    return Matrix(std::cos(theta / 2.0) * Matrix::Identity(2, 2) +
                  2.0 * std::sin(theta / 2.0) * b);
  };
  std::vector<Matrix> axis_gen;
  for (int i = 0; i < x_count; ++i) axis_gen.push_back(su2_generator((rotor_axis + 1 + i) % 3));
  auto mat_at = [c, ba, axis_gen, x_start, x_count, rot](double s, const double* x) {
    Matrix u = rot(c * s, ba);
    Matrix v = Matrix::Identity(2, 2);
    for (int i = 0; i < x_count; ++i)
      v = v * rot(c * x[x_start + i], axis_gen[std::size_t(i)]);
    return Matrix(u * v * u.adjoint());
  };
  GaugeLoop loop;
  loop.at = [grid, algebra, mat_at](double s) {
    return gauge_from_matrices(grid, algebra, [mat_at, s](const double* x, cplx* out) {
      Matrix m = mat_at(s, x);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out[i * 2 + j] = m(i, j);
    });
  };
  loop.log_derivative = [grid, algebra, mat_at, c, ba](double s) {
    // W = c Ba - Phi (c Ba) Phi^{-1}
    return log_derivative_form(grid, algebra, [mat_at, c, ba, s](const double* x, cplx* out) {
      Matrix phi = mat_at(s, x);
      Matrix w = c * ba - phi * (c * ba) * phi.adjoint();
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out[i * 2 + j] = w(i, j);
    });
  };
  return loop;
}

namespace {
void quaternion_components(double c, double s, const double* x, double* q) {
  q[0] = c - std::cos(kTwoPi * s) - std::cos(kTwoPi * x[0]) - std::cos(kTwoPi * x[1]);
  q[1] = std::sin(kTwoPi * s);
  q[2] = std::sin(kTwoPi * x[0]);
  q[3] = std::sin(kTwoPi * x[1]);
}

void quaternion_s_derivative(double s, double* dq) {
  dq[0] = kTwoPi * std::sin(kTwoPi * s);
  dq[1] = kTwoPi * std::cos(kTwoPi * s);
  dq[2] = 0.0;
  dq[3] = 0.0;
}

void quaternion_to_su2(const double* q, cplx* u) {
  // U = q0 I + i (q1 s1 + q2 s2 + q3 s3)
  const cplx I(0.0, 1.0);
  u[0] = q[0] + I * q[3];
  u[1] = I * q[1] + q[2];
  u[2] = I * q[1] - q[2];
  u[3] = q[0] - I * q[3];
}
}  // namespace

GaugeLoop product_gauge_loop(const GaugeLoop& l1, const GaugeLoop& l2) {
  GaugeLoop out;
  out.at = [l1, l2](double s) { return gauge_product(l1.at(s), l2.at(s)); };
  out.log_derivative = [l1, l2](double s) {
    RealForm w = l1.log_derivative(s);
    add_scaled(w, gauge_adjoint(l1.at(s), l2.log_derivative(s)), 1.0);
    return w;
  };
  return out;
}

GaugeLoop quaternion_degree_loop(const TorusGrid& grid, const AlgebraPtr& algebra, double c) {
  FLATLAB_REQUIRE(algebra->mat_dim() == 2, ErrorCode::config_error,
                  "degree loop needs 2x2 matrices");
  FLATLAB_REQUIRE(grid.n == 2, ErrorCode::dimension_mismatch, "degree loop lives on T^2");
  GaugeLoop loop;
  loop.at = [grid, algebra, c](double s) {
    return gauge_from_matrices(grid, algebra, [c, s](const double* x, cplx* out) {
      double q[4];
      quaternion_components(c, s, x, q);
      double nrm = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
      for (int i = 0; i < 4; ++i) q[i] /= nrm;
      quaternion_to_su2(q, out);
    });
  };
  loop.log_derivative = [grid, algebra, c](double s) {
    return log_derivative_form(grid, algebra, [c, s](const double* x, cplx* out) {
      double q[4], dq[4];
      quaternion_components(c, s, x, q);
      quaternion_s_derivative(s, dq);
      double n2 = q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3];
      double nrm = std::sqrt(n2);
      double dot = q[0] * dq[0] + q[1] * dq[1] + q[2] * dq[2] + q[3] * dq[3];
      double p[4], dp[4];
      for (int i = 0; i < 4; ++i) {
        p[i] = q[i] / nrm;
        dp[i] = dq[i] / nrm - q[i] * dot / (n2 * nrm);
      }
      cplx u[4], du[4], uadj[4];
      quaternion_to_su2(p, u);
      quaternion_to_su2(dp, du);
      uadj[0] = std::conj(u[0]);
      uadj[1] = std::conj(u[2]);
      uadj[2] = std::conj(u[1]);
      uadj[3] = std::conj(u[3]);
      // W = (dU) U^dag
      out[0] = du[0] * uadj[0] + du[1] * uadj[2];
      out[1] = du[0] * uadj[1] + du[1] * uadj[3];
      out[2] = du[2] * uadj[0] + du[3] * uadj[2];
      out[3] = du[2] * uadj[1] + du[3] * uadj[3];
    });
  };
  return loop;
}

GaugeField su2_winding_product_gauge(const TorusGrid& grid, const AlgebraPtr& algebra,
                                     const std::vector<int>& w) {
  FLATLAB_REQUIRE(algebra->mat_dim() == 2, ErrorCode::config_error,
                  "winding product needs 2x2 matrices");
  FLATLAB_REQUIRE(int(w.size()) == grid.n, ErrorCode::dimension_mismatch,
                  "winding vector needs one entry per axis");
  std::vector<Matrix> gens = {su2_generator(0), su2_generator(1), su2_generator(2)};
  return gauge_from_matrices(grid, algebra, [gens, w, n = grid.n](const double* x, cplx* out) {
    Matrix m = Matrix::Identity(2, 2);
    for (int i = 0; i < n; ++i) {
      const double ang = 4.0 * kPi * w[std::size_t(i)] * x[i];
      // exp(ang * sigma/(2i)) = cos(ang/2) I + sin(ang/2) * 2 B
      Matrix rot = std::cos(ang / 2.0) * Matrix::Identity(2, 2) +
                   std::sin(ang / 2.0) * (2.0 * gens[std::size_t(i % 3)]);
      m = m * rot;
    }
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) out[i * 2 + j] = m(i, j);
  });
}

GaugeLoop winding_gauge_loop(const TorusGrid& grid, const AlgebraPtr& algebra,
                             const std::vector<int>& w, int m_loops, const Matrix& h) {
  double closing = (h.exp() - Matrix::Identity(h.rows(), h.cols())).norm();
  FLATLAB_REQUIRE(closing <= 1e-10, ErrorCode::invalid_group_element,
                  "direction does not close: |exp(H) - I| = " << closing);
  std::vector<double> wd(w.begin(), w.end());
  GaugeLoop loop;
  loop.at = [grid, algebra, wd, m_loops, h](double s) {
    return gauge_exp_profile(grid, algebra, h,
                             [wd, m_loops, s, n = grid.n](const double* x) {
                               double f = double(m_loops) * s;
                               for (int i = 0; i < n; ++i) f += wd[std::size_t(i)] * x[i];
                               return f;
                             });
  };
  loop.log_derivative = [grid, algebra, m_loops, h](double) {
    // W = m H, constant
    Matrix hm = double(m_loops) * h;
    return log_derivative_form(grid, algebra, [hm](const double*, cplx* out) {
      const int d = int(hm.rows());
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) out[i * d + j] = hm(i, j);
    });
  };
  return loop;
}

double su2_mapping_degree(const GaugeLoop& loop, const TorusGrid& grid, int s_nodes) {
  FLATLAB_REQUIRE(grid.n == 2, ErrorCode::dimension_mismatch, "mapping degree lives on T^2");
  const std::size_t np = grid.npoints();
  const double vol_s3 = 2.0 * kPi * kPi;
  auto to_quat = [](const cplx* u, double* out) {
    out[0] = 0.5 * (u[0] + u[3]).real();
    out[3] = 0.5 * (u[0] - u[3]).imag();
    out[1] = 0.5 * (u[1] + u[2]).imag();
    out[2] = 0.5 * (u[1] - u[2]).real();
  };
  std::vector<double> s_integrand(std::size_t(s_nodes), 0.0);
  for (int is = 0; is < s_nodes; ++is) {
    const double s = double(is) / double(s_nodes);
    GaugeField phi = loop.at(s);
    RealForm w = loop.log_derivative(s);
    const auto& alg = phi.algebra;
    const int m = alg->dim();
    std::vector<cplx> d1(4 * np), d2(4 * np);
    for (int e = 0; e < 4; ++e) {
      spectral_derivative(grid, phi.entry(e / 2, e % 2), d1.data() + std::size_t(e) * np, 0);
      spectral_derivative(grid, phi.entry(e / 2, e % 2), d2.data() + std::size_t(e) * np, 1);
    }
    std::vector<double> dets(np);
    parallel_for(np, [&](std::size_t lo, std::size_t hi) {
      cplx u[4], du[4];
      cplx coeffs[16];
      for (std::size_t p = lo; p < hi; ++p) {
        phi.get(p, u);
        // dU/ds = W U
        for (int a = 0; a < m; ++a) coeffs[a] = cplx(w.field(0, a)[p], 0.0);
        Matrix wmat = alg->matrix_of(coeffs);
        du[0] = wmat(0, 0) * u[0] + wmat(0, 1) * u[2];
        du[1] = wmat(0, 0) * u[1] + wmat(0, 1) * u[3];
        du[2] = wmat(1, 0) * u[0] + wmat(1, 1) * u[2];
        du[3] = wmat(1, 0) * u[1] + wmat(1, 1) * u[3];
        cplx b1[4] = {d1[p], d1[np + p], d1[2 * np + p], d1[3 * np + p]};
        cplx b2[4] = {d2[p], d2[np + p], d2[2 * np + p], d2[3 * np + p]};
        double mat[4][4];
        to_quat(u, mat[0]);
        to_quat(du, mat[1]);
        to_quat(b1, mat[2]);
        to_quat(b2, mat[3]);
        auto det3 = [&](int c0, int c1, int c2) {
          return mat[1][c0] * (mat[2][c1] * mat[3][c2] - mat[2][c2] * mat[3][c1]) -
                 mat[1][c1] * (mat[2][c0] * mat[3][c2] - mat[2][c2] * mat[3][c0]) +
                 mat[1][c2] * (mat[2][c0] * mat[3][c1] - mat[2][c1] * mat[3][c0]);
        };
        dets[p] = mat[0][0] * det3(1, 2, 3) - mat[0][1] * det3(0, 2, 3) +
                  mat[0][2] * det3(0, 1, 3) - mat[0][3] * det3(0, 1, 2);
      }
    });
    s_integrand[std::size_t(is)] = pairwise_sum(dets.data(), np) / double(np);
  }
  double total = 0.0;
  for (double v : s_integrand) total += v;
  total /= double(s_nodes);
  return total / vol_s3;
}

#define FLATLAB_INSTANTIATE(S)                                                                  \
  template struct ConnectionFamily<S>;                                                          \
  template struct ConnectionLoop<S>;                                                            \
  template ConnectionFamily<S> straight_line_family<S>(const Connection<S>&,                    \
                                                       const Connection<S>&, int, int);         \
  template ConnectionFamily<S> cone_family<S>(const ConnectionLoop<S>&, const Connection<S>&,   \
                                              int, int, int);                                   \
  template ConnectionFamily<S> reparametrized_family<S>(const ConnectionFamily<S>&,             \
                                                        const GridForm<S>*, double);            \
  template ConnectionFamily<S> tabulated_path_family<S>(const std::vector<Connection<S>>&, int, \
                                                        int);                                   \
  template ConnectionLoop<S> cartan_circle_loop<S>(                                             \
      const TorusGrid&, const AlgebraPtr&, const std::vector<std::vector<S>>&,                  \
      const std::vector<std::vector<S>>&, const std::vector<std::vector<S>>&, bool);            \
  template ConnectionLoop<S> gauge_orbit_loop<S>(const GaugeLoop&, const Connection<S>&);       \
  template ConnectionLoop<S> concatenate_loops<S>(const ConnectionLoop<S>&,                     \
                                                  const ConnectionLoop<S>&);                    \
  template ConnectionLoop<S> double_traversal<S>(const ConnectionLoop<S>&);                    \
  template ConnectionLoop<S> sum_loops<S>(const ConnectionLoop<S>&, const ConnectionLoop<S>&); \
  template ConnectionLoop<S> gauge_transformed_loop<S>(const GaugeLoop&,                       \
                                                        const ConnectionLoop<S>&);             \
  template ConnectionLoop<S> reparametrized_loop<S>(const ConnectionLoop<S>&, double);

FLATLAB_INSTANTIATE(double)
FLATLAB_INSTANTIATE(cplx)
#undef FLATLAB_INSTANTIATE

}  // namespace flatlab
