#include "invariants.hpp"

#include <cmath>

namespace flatlab {

namespace {

template <class S>
GridForm<S> contraction_impl(const InvariantPolynomial& p, const Connection<S>& a,
                             const std::vector<const GridForm<S>*>& tangents, bool normalized) {
  const int r = p.degree();
  const int k = int(tangents.size());
  const TorusGrid& grid = a.grid();
  const int result_degree = 2 * r - k;
  FLATLAB_REQUIRE(result_degree >= 0, ErrorCode::arity_error,
                  "more than 2r tangent slots supplied");
  for (const auto* t : tangents) {
    FLATLAB_REQUIRE(t->grid == grid && t->algebra == a.algebra(), ErrorCode::dimension_mismatch,
                    "tangent slot does not match the connection");
    FLATLAB_REQUIRE(t->degree == 1, ErrorCode::degree_error, "tangent slots must be 1-forms");
  }
  if (k > r || result_degree > grid.n) return GridForm<S>(grid, result_degree, nullptr);

  std::vector<const GridForm<S>*> slots(tangents);
  GridForm<S> f;
  if (k < r) {
    f = curvature(a);
    for (int i = k; i < r; ++i) slots.push_back(&f);
  }
  GridForm<S> out = poly_eval_forms(p, slots);
  if (normalized && k > 0) out = scaled(out, S(slot_count_factor(r, k)));
  return out;
}

}  // namespace

template <class S>
GridForm<S> curvature_contraction(const InvariantPolynomial& p, const Connection<S>& a,
                                  const std::vector<const GridForm<S>*>& tangents) {
  return contraction_impl(p, a, tangents, true);
}

template <class S>
GridForm<S> curvature_contraction_raw(const InvariantPolynomial& p, const Connection<S>& a,
                                      const std::vector<const GridForm<S>*>& tangents) {
  return contraction_impl(p, a, tangents, false);
}

template <class S>
FamilyInvariant<S> family_invariant(const InvariantPolynomial& p, const ConnectionFamily<S>& fam,
                                    const InvariantOptions& opt) {
  const int r = p.degree();
  const int k = fam.k;
  const TorusGrid grid = fam.at(std::vector<double>(std::size_t(k), 0.0).data()).grid();
  FLATLAB_REQUIRE(2 * r - k <= grid.n, ErrorCode::dimension_mismatch,
                  "invariant degree 2r-k = " << 2 * r - k << " exceeds torus dimension "
                                             << grid.n);

  FamilyInvariant<S> out;
  out.form = GridForm<S>(grid, 2 * r - k, nullptr);

  if (opt.check_boundary) {
    double worst = 0.0;
    for (const auto& u : fam.boundary_samples)
      worst = std::max(worst, flatness_residual(fam.at(u.data())));
    out.worst_boundary_residual = worst;
    out.boundary_flat = worst <= kFlatnessTol;
  }

  const std::size_t nodes = fam.domain.node_count();
  std::vector<double> u(std::size_t(k), 0.0);
  std::vector<GridForm<S>> partials{std::size_t(k)};
  for (std::size_t i = 0; i < nodes; ++i) {
    double w = 0.0;
    fam.domain.node(i, u.data(), &w);
    Connection<S> au = fam.at(u.data());
    std::vector<const GridForm<S>*> slots;
    for (int axis = 0; axis < k; ++axis) {
      partials[std::size_t(axis)] = fam.partial(u.data(), axis);
      slots.push_back(&partials[std::size_t(axis)]);
    }
    GridForm<S> integrand = curvature_contraction(p, au, slots);
    add_scaled(out.form, integrand, S(w));
    if (opt.collect_convergence) {
      ConvergenceRow row;
      row.u = u;
      row.weight = w;
      row.integrand_norm = max_norm(integrand);
      out.convergence.push_back(std::move(row));
    }
  }

  out.closure_residual = closure_residual(out.form);
  out.closure_validated =
      out.boundary_flat && out.closure_residual <= closedness_tolerance(max_norm(out.form));
  if (out.closure_residual <= closedness_tolerance(max_norm(out.form))) {
    out.periods = period_vector(out.form, nullptr, false);
    out.periods_valid = true;
  }
  return out;
}

template <class S>
GridForm<S> family_invariant_product_route(const InvariantPolynomial& p,
                                           const ConnectionFamily<S>& fam) {
  const int r = p.degree();
  const int k = fam.k;
  const TorusGrid grid = fam.at(std::vector<double>(std::size_t(k), 0.0).data()).grid();
  FLATLAB_REQUIRE(2 * r - k <= grid.n, ErrorCode::dimension_mismatch,
                  "invariant degree exceeds torus dimension");
  GridForm<S> out(grid, 2 * r - k, nullptr);

  const std::size_t nodes = fam.domain.node_count();
  std::vector<double> u(std::size_t(k), 0.0);
  for (std::size_t i = 0; i < nodes; ++i) {
    double w = 0.0;
    fam.domain.node(i, u.data(), &w);
    Connection<S> au = fam.at(u.data());
    // product-space curvature: torus block F^{a(u)}, mixed blocks du^a ^ df/du_a,
    // parameter-parameter block zero
    MixedForm<S> fhat(k, 2, grid, au.algebra());
    fhat.set_part(0u, curvature(au));
    for (int axis = 0; axis < k; ++axis)
      fhat.set_part(1u << axis, fam.partial(u.data(), axis));
    std::vector<const MixedForm<S>*> slots(std::size_t(r), &fhat);
    MixedForm<S> pf = mixed_poly_eval(p, slots);
    GridForm<S> integrand = contract_all_parameters(pf);
    add_scaled(out, integrand, S(w));
  }
  return out;
}

template <class S>
TransgressionResult<S> transgression_route(const InvariantPolynomial& p,
                                           const ConnectionFamily<S>& fam,
                                           const Connection<S>& a_ref, int tau_order,
                                           int tau_panels) {
  const int r = p.degree();
  const int k = fam.k;
  const TorusGrid grid = a_ref.grid();
  QuadAxis tau = QuadAxis::gauss(tau_order, tau_panels);

  GridForm<S> p_ref;
  {
    GridForm<S> f_ref = curvature(a_ref);
    std::vector<const GridForm<S>*> slots(std::size_t(r), &f_ref);
    p_ref = poly_eval_forms(p, slots);
  }

  // theta(u) as a mixed form: slots are delta (torus part only) and the mixed
  // curvature of a_ref + tau * delta, whose du-part is tau * df/du_a.
  auto theta_at = [&](const double* u) {
    MixedForm<S> theta(k, 2 * r - 1, grid, nullptr);
    Connection<S> au = fam.at(u);
    GridForm<S> delta = au.form - a_ref.form;
    std::vector<GridForm<S>> etas{std::size_t(k)};
    for (int axis = 0; axis < k; ++axis) etas[std::size_t(axis)] = fam.partial(u, axis);
    MixedForm<S> delta_mixed(k, 1, grid, au.algebra());
    delta_mixed.set_part(0u, delta);
    for (std::size_t it = 0; it < tau.nodes.size(); ++it) {
      const double t = tau.nodes[it];
      Connection<S> at(a_ref.form + scaled(delta, S(t)));
      MixedForm<S> f_tau(k, 2, grid, au.algebra());
      f_tau.set_part(0u, curvature(at));
      for (int axis = 0; axis < k; ++axis)
        f_tau.set_part(1u << axis, scaled(etas[std::size_t(axis)], S(t)));
      std::vector<const MixedForm<S>*> slots;
      slots.push_back(&delta_mixed);
      for (int i = 1; i < r; ++i) slots.push_back(&f_tau);
      MixedForm<S> term = mixed_poly_eval(p, slots);
      const S wfactor = S(double(r) * tau.weights[it]);
      for (auto& kv : term.parts) {
        auto it2 = theta.parts.find(kv.first);
        if (it2 == theta.parts.end())
          theta.set_part(kv.first, scaled(kv.second, wfactor));
        else
          add_scaled(it2->second, kv.second, wfactor);
      }
    }
    return theta;
  };

  auto d_residual = [&](const double* u, const MixedForm<S>& theta) {
    Connection<S> au = fam.at(u);
    GridForm<S> f_u = curvature(au);
    std::vector<const GridForm<S>*> slots(std::size_t(r), &f_u);
    GridForm<S> lhs = poly_eval_forms(p, slots);
    add_scaled(lhs, p_ref, S(-1.0));
    const GridForm<S>* th0 = theta.part(0u);
    if (th0) add_scaled(lhs, d_or_zero(*th0), S(-1.0));
    return max_norm(lhs);
  };

  TransgressionResult<S> out;
  out.boundary_integral = GridForm<S>(grid, 2 * r - k, nullptr);

  if (fam.domain.shape == ParameterDomain::Shape::interval) {
    double u0 = 0.0, u1 = 1.0;
    MixedForm<S> th0 = theta_at(&u0);
    MixedForm<S> th1 = theta_at(&u1);
    out.max_d_residual = std::max(d_residual(&u0, th0), d_residual(&u1, th1));
    if (const GridForm<S>* part = th1.part(0u)) add_scaled(out.boundary_integral, *part, S(1.0));
    if (const GridForm<S>* part = th0.part(0u)) add_scaled(out.boundary_integral, *part, S(-1.0));
  } else {
    // cylinder: S = {t=1} x S^1 - {t=0} x S^1, take the du^s component. The
    // fiber-integration convention behind the invariant contracts the
    // parameter directions in reverse order, which contributes the k=2 factor
    // (-1)^{k(k-1)/2} = -1 here: Lambda = -int_S (ds coefficient of theta).
    const auto& s_axis = fam.domain.axes[1];
    const std::uint32_t s_mask = 1u << 1;
    const std::size_t res_stride = std::max<std::size_t>(1, s_axis.nodes.size() / 4);
    for (std::size_t j = 0; j < s_axis.nodes.size(); ++j) {
      const double ws = s_axis.weights[j];
      double u_top[2] = {1.0, s_axis.nodes[j]};
      double u_bot[2] = {0.0, s_axis.nodes[j]};
      MixedForm<S> th_top = theta_at(u_top);
      MixedForm<S> th_bot = theta_at(u_bot);
      if (j % res_stride == 0)
        out.max_d_residual =
            std::max({out.max_d_residual, d_residual(u_top, th_top), d_residual(u_bot, th_bot)});
      if (const GridForm<S>* part = th_top.part(s_mask))
        add_scaled(out.boundary_integral, *part, S(-ws));
      if (const GridForm<S>* part = th_bot.part(s_mask))
        add_scaled(out.boundary_integral, *part, S(ws));
    }
  }
  return out;
}

template <class S>
GridForm<S> segment_invariant_closed_form(const InvariantPolynomial& p, const Connection<S>& a0,
                                          const Connection<S>& a1) {
  check_same_grid(a0.form, a1.form);
  const int r = p.degree();
  double res0 = flatness_residual(a0), res1 = flatness_residual(a1);
  FLATLAB_REQUIRE(res0 <= kFlatnessTol, ErrorCode::non_flat_connection,
                  "left endpoint is not flat (residual " << res0 << ")");
  FLATLAB_REQUIRE(res1 <= kFlatnessTol, ErrorCode::non_flat_connection,
                  "right endpoint is not flat (residual " << res1 << ")");
  GridForm<S> xi = a1.form - a0.form;
  if (2 * r - 1 > a0.grid().n) return GridForm<S>(a0.grid(), 2 * r - 1, nullptr);
  const double c_r =
      gauss01([r](double t) { return std::pow(t * t - t, r - 1); }, 8, 2);
  GridForm<S> cform = scaled(wedge_bracket(xi, xi), S(0.5));  // components [xi_i, xi_j]
  std::vector<const GridForm<S>*> slots;
  slots.push_back(&xi);
  for (int i = 1; i < r; ++i) slots.push_back(&cform);
  GridForm<S> out = poly_eval_forms(p, slots);
  return scaled(out, S(slot_count_factor(r, 1) * c_r));
}

template <class S>
GridForm<S> loop_invariant_closed_form(const InvariantPolynomial& p,
                                       const ConnectionLoop<S>& loop, const Connection<S>& a0,
                                       int s_nodes) {
  const int r = p.degree();
  FLATLAB_REQUIRE(r >= 2, ErrorCode::arity_error, "loop closed form needs degree >= 2");
  const TorusGrid grid = a0.grid();
  FLATLAB_REQUIRE(2 * r - 2 <= grid.n, ErrorCode::dimension_mismatch,
                  "invariant degree exceeds torus dimension");
  {
    double gap = max_norm(loop.at(1.0).form - loop.at(0.0).form);
    FLATLAB_REQUIRE(gap <= 1e-10, ErrorCode::open_loop,
                    "loop does not close: |A(1)-A(0)| = " << gap);
  }
  const double j_r =
      gauss01([r](double t) { return t * std::pow(t * t - t, r - 2); }, 8, 2);
  QuadAxis s_axis = QuadAxis::periodic_uniform(s_nodes);
  GridForm<S> acc(grid, 2 * r - 2, nullptr);
  for (std::size_t j = 0; j < s_axis.nodes.size(); ++j) {
    const double s = s_axis.nodes[j];
    Connection<S> as = loop.at(s);
    double res = flatness_residual(as);
    FLATLAB_REQUIRE(res <= kFlatnessTol, ErrorCode::non_flat_connection,
                    "loop sample at s=" << s << " is not flat (residual " << res << ")");
    GridForm<S> xi = as.form - a0.form;
    GridForm<S> xidot = loop.derivative(s);
    GridForm<S> cform = scaled(wedge_bracket(xi, xi), S(0.5));
    std::vector<const GridForm<S>*> slots;
    slots.push_back(&xi);
    slots.push_back(&xidot);
    for (int i = 2; i < r; ++i) slots.push_back(&cform);
    GridForm<S> term = poly_eval_forms(p, slots);
    add_scaled(acc, term, S(s_axis.weights[j]));
  }
  return scaled(acc, S(slot_count_factor(r, 2) * j_r));
}

template <class S>
double gauge_loop_degree(const InvariantPolynomial& p, const GaugeLoop& loop,
                         const Connection<S>& a0, int s_nodes) {
  FLATLAB_REQUIRE(a0.grid().n == 2, ErrorCode::dimension_mismatch,
                  "loop degree needs a two-dimensional torus");
  FLATLAB_REQUIRE(p.degree() == 2, ErrorCode::arity_error, "loop degree needs a metric (r = 2)");
  {
    GaugeField f0 = loop.at(0.0), f1 = loop.at(1.0);
    double gap = 0.0;
    for (std::size_t i = 0; i < f0.data.size(); ++i)
      gap = std::max(gap, std::abs(f0.data[i] - f1.data[i]));
    FLATLAB_REQUIRE(gap <= 1e-9, ErrorCode::open_loop,
                    "gauge loop does not close (entry gap " << gap << ")");
  }
  ConnectionLoop<S> orbit = gauge_orbit_loop(loop, a0);
  QuadAxis s_axis = QuadAxis::periodic_uniform(s_nodes);
  double acc = 0.0;
  for (std::size_t j = 0; j < s_axis.nodes.size(); ++j) {
    const double s = s_axis.nodes[j];
    Connection<S> as = orbit.at(s);
    GridForm<S> adot = orbit.derivative(s);
    std::vector<const GridForm<S>*> slots = {&as.form, &adot};
    GridForm<S> integrand = poly_eval_forms(p, slots);
    S val = integrate(integrand);
    double real_val;
    if constexpr (std::is_same_v<S, double>)
      real_val = val;
    else {
      FLATLAB_REQUIRE(std::abs(val.imag()) < 1e-9, ErrorCode::internal,
                      "loop degree came out complex");
      real_val = val.real();
    }
    acc += s_axis.weights[j] * real_val;
  }
  return acc;
}

template <class S>
S atiyah_bott_pairing(const GridForm<S>& xi1, const GridForm<S>& xi2) {
  check_same_grid(xi1, xi2);
  FLATLAB_REQUIRE(xi1.grid.n == 2, ErrorCode::dimension_mismatch,
                  "the pairing is defined over a surface");
  FLATLAB_REQUIRE(xi1.degree == 1 && xi2.degree == 1, ErrorCode::degree_error,
                  "the pairing takes 1-forms");
  InvariantPolynomial tr2 = build_trace_polynomial(xi1.algebra, {2}, 1.0, "trace_pairing");
  return integrate(wedge_pair(tr2, xi1, xi2));
}

PeriodVector<double> mod_z_reduce(const PeriodVector<double>& periods) {
  PeriodVector<double> out = periods;
  for (auto& v : out.entries) v -= std::floor(v);
  return out;
}

double integer_defect(const PeriodVector<double>& periods) {
  double worst = 0.0;
  for (double v : periods.entries) worst = std::max(worst, std::abs(v - std::round(v)));
  return worst;
}

template <class S>
double period_distance(const PeriodVector<S>& a, const PeriodVector<S>& b) {
  FLATLAB_REQUIRE(a.entries.size() == b.entries.size(), ErrorCode::dimension_mismatch,
                  "period vectors differ in length");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.entries.size(); ++i)
    worst = std::max(worst, std::abs(a.entries[i] - b.entries[i]));
  return worst;
}

#define FLATLAB_INSTANTIATE(S)                                                                  \
  template GridForm<S> curvature_contraction<S>(const InvariantPolynomial&,                     \
                                                const Connection<S>&,                           \
                                                const std::vector<const GridForm<S>*>&);        \
  template GridForm<S> curvature_contraction_raw<S>(const InvariantPolynomial&,                 \
                                                    const Connection<S>&,                       \
                                                    const std::vector<const GridForm<S>*>&);    \
  template struct FamilyInvariant<S>;                                                           \
  template FamilyInvariant<S> family_invariant<S>(const InvariantPolynomial&,                   \
                                                  const ConnectionFamily<S>&,                   \
                                                  const InvariantOptions&);                     \
  template GridForm<S> family_invariant_product_route<S>(const InvariantPolynomial&,            \
                                                         const ConnectionFamily<S>&);           \
  template struct TransgressionResult<S>;                                                       \
  template TransgressionResult<S> transgression_route<S>(const InvariantPolynomial&,            \
                                                         const ConnectionFamily<S>&,            \
                                                         const Connection<S>&, int, int);       \
  template GridForm<S> segment_invariant_closed_form<S>(const InvariantPolynomial&,             \
                                                        const Connection<S>&,                   \
                                                        const Connection<S>&);                  \
  template GridForm<S> loop_invariant_closed_form<S>(const InvariantPolynomial&,                \
                                                     const ConnectionLoop<S>&,                  \
                                                     const Connection<S>&, int);                \
  template double gauge_loop_degree<S>(const InvariantPolynomial&, const GaugeLoop&,            \
                                       const Connection<S>&, int);                              \
  template S atiyah_bott_pairing<S>(const GridForm<S>&, const GridForm<S>&);                    \
  template double period_distance<S>(const PeriodVector<S>&, const PeriodVector<S>&);

FLATLAB_INSTANTIATE(double)
FLATLAB_INSTANTIATE(cplx)
#undef FLATLAB_INSTANTIATE

}  // namespace flatlab
