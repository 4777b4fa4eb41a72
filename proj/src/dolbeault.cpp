#include "dolbeault.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <map>
#include <mutex>

namespace flatlab {

namespace {

struct Letter {
  int type;  // 0 = dz, 1 = dzbar
  int pair;
  bool operator<(const Letter& o) const {
    if (type != o.type) return type < o.type;
    return pair < o.pair;
  }
  bool operator==(const Letter& o) const { return type == o.type && pair == o.pair; }
};

// sign of sorting the sequence into canonical order (all dz by pair, then all
// dzbar by pair); 0 if a letter repeats
int sort_sign(std::vector<Letter>& seq) {
  int sign = 1;
  for (std::size_t i = 0; i + 1 < seq.size(); ++i)
    for (std::size_t j = 0; j + 1 < seq.size() - i; ++j)
      if (seq[j + 1] < seq[j]) {
        std::swap(seq[j], seq[j + 1]);
        sign = -sign;
      }
  for (std::size_t i = 0; i + 1 < seq.size(); ++i)
    if (seq[i] == seq[i + 1]) return 0;
  return sign;
}

// (zmask, zbmask) -> complex component index for fixed total degree
struct ComplexFrame {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> labels;
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> index;

  ComplexFrame(int m, int deg) {
    for (std::uint32_t z = 0; z < (1u << m); ++z)
      for (std::uint32_t zb = 0; zb < (1u << m); ++zb)
        if (__builtin_popcount(z) + __builtin_popcount(zb) == deg) {
          index[{z, zb}] = int(labels.size());
          labels.push_back({z, zb});
        }
  }
};

// Composite projection matrices real frame -> (a,b) part -> real frame,
// cached per (n, deg, a, b).
class BidegreeCache {
public:
  static const Eigen::MatrixXcd& projection(int n, int deg, int a, int b) {
    static std::mutex mu;
    static std::map<std::tuple<int, int, int, int>, Eigen::MatrixXcd> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(n, deg, a, b);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    return cache.emplace(key, build(n, deg, a, b)).first->second;
  }

private:
  static Eigen::MatrixXcd build(int n, int deg, int a, int b) {
    const int m = n / 2;
    const auto& tab = ComboTables::get(n);
    const int nreal = tab.count(deg);
    ComplexFrame frame(m, deg);
    const cplx I(0.0, 1.0);

    // real -> complex frame
    Eigen::MatrixXcd fwd = Eigen::MatrixXcd::Zero(int(frame.labels.size()), nreal);
    for (int cr = 0; cr < nreal; ++cr) {
      const auto& axes = tab.axes(deg, cr);
      const int len = int(axes.size());
      for (int choice = 0; choice < (1 << len); ++choice) {
        std::vector<Letter> seq;
        cplx coeff(1.0, 0.0);
        for (int i = 0; i < len; ++i) {
          int axis = axes[std::size_t(i)];
          int pair = axis / 2;
          bool im_axis = (axis % 2) == 1;
          bool pick_zbar = (choice >> i) & 1;
          // dx^{2j} = (dz + dzbar)/2, dx^{2j+1} = (dz - dzbar)/(2i)
          cplx c;
          if (!im_axis)
            c = cplx(0.5, 0.0);
          else
            c = pick_zbar ? -1.0 / (2.0 * I) : 1.0 / (2.0 * I);
          seq.push_back({pick_zbar ? 1 : 0, pair});
          coeff *= c;
        }
        int sign = sort_sign(seq);
        if (sign == 0) continue;
        std::uint32_t z = 0, zb = 0;
        for (const auto& l : seq)
          (l.type == 0 ? z : zb) |= (1u << l.pair);
        fwd(frame.index.at({z, zb}), cr) += coeff * double(sign);
      }
    }

    // complex frame -> real
    Eigen::MatrixXcd bwd = Eigen::MatrixXcd::Zero(nreal, int(frame.labels.size()));
    for (std::size_t cc = 0; cc < frame.labels.size(); ++cc) {
      std::vector<Letter> letters;
      for (int j = 0; j < m; ++j)
        if (frame.labels[cc].first & (1u << j)) letters.push_back({0, j});
      for (int j = 0; j < m; ++j)
        if (frame.labels[cc].second & (1u << j)) letters.push_back({1, j});
      const int len = int(letters.size());
      for (int choice = 0; choice < (1 << len); ++choice) {
        std::vector<int> axes_seq;
        cplx coeff(1.0, 0.0);
        for (int i = 0; i < len; ++i) {
          bool pick_im = (choice >> i) & 1;  // dz = dx_re + i dx_im, dzbar = dx_re - i dx_im
          int axis = 2 * letters[std::size_t(i)].pair + (pick_im ? 1 : 0);
          if (pick_im) coeff *= letters[std::size_t(i)].type == 0 ? I : -I;
          axes_seq.push_back(axis);
        }
        // sort axes ascending with sign
        int sign = 1;
        for (std::size_t i = 0; i + 1 < axes_seq.size(); ++i)
          for (std::size_t j = 0; j + 1 < axes_seq.size() - i; ++j)
            if (axes_seq[j + 1] < axes_seq[j]) {
              std::swap(axes_seq[j], axes_seq[j + 1]);
              sign = -sign;
            }
        bool repeated = false;
        for (std::size_t i = 0; i + 1 < axes_seq.size(); ++i)
          if (axes_seq[i] == axes_seq[i + 1]) repeated = true;
        if (repeated) continue;
        std::uint32_t mask = 0;
        for (int ax : axes_seq) mask |= (1u << ax);
        bwd(tab.comp_of_mask(deg, mask), int(cc)) += coeff * double(sign);
      }
    }

    // keep only the (a,b) rows of fwd
    Eigen::MatrixXcd sel = Eigen::MatrixXcd::Zero(int(frame.labels.size()),
                                                  int(frame.labels.size()));
    for (std::size_t cc = 0; cc < frame.labels.size(); ++cc)
      if (__builtin_popcount(frame.labels[cc].first) == a &&
          __builtin_popcount(frame.labels[cc].second) == b)
        sel(int(cc), int(cc)) = 1.0;
    return bwd * sel * fwd;
  }
};

}  // namespace

ComplexForm bidegree_project(const ComplexStructure& cs, const ComplexForm& w, int a, int b) {
  FLATLAB_REQUIRE(w.grid == cs.grid, ErrorCode::dimension_mismatch, "grid mismatch");
  FLATLAB_REQUIRE(a >= 0 && b >= 0 && a + b == w.degree, ErrorCode::bidegree_error,
                  "bidegree (" << a << "," << b << ") does not sum to form degree " << w.degree);
  ComplexForm out(w.grid, w.degree, w.algebra);
  if (w.ncomp() == 0 || a > cs.m || b > cs.m) return out;
  const Eigen::MatrixXcd& proj = BidegreeCache::projection(cs.grid.n, w.degree, a, b);
  const std::size_t np = w.grid.npoints();
  for (int co = 0; co < w.ncomp(); ++co)
    for (int ci = 0; ci < w.ncomp(); ++ci) {
      const cplx f = proj(co, ci);
      if (std::abs(f) < 1e-15) continue;
      for (int coeff = 0; coeff < w.ncoeff(); ++coeff) {
        cplx* dst = out.field(co, coeff);
        const cplx* src = w.field(ci, coeff);
        parallel_for(np, [&](std::size_t lo, std::size_t hi) {
          for (std::size_t i = lo; i < hi; ++i) dst[i] += f * src[i];
        });
      }
    }
  return out;
}

std::vector<BigradedPart> bidegree_split(const ComplexStructure& cs, const ComplexForm& w) {
  std::vector<BigradedPart> out;
  for (int a = 0; a <= w.degree; ++a) {
    int b = w.degree - a;
    if (a > cs.m || b > cs.m) continue;
    out.push_back({a, b, bidegree_project(cs, w, a, b)});
  }
  return out;
}

namespace {
ComplexForm projected_derivative(const ComplexStructure& cs, const ComplexForm& w, int da,
                                 int db) {
  // sum over bidegree pieces of rho^{a+da, b+db} o d
  ComplexForm out(w.grid, w.degree + 1, w.algebra);
  if (w.degree + 1 > w.grid.n) return out;
  for (const auto& piece : bidegree_split(cs, w)) {
    ComplexForm dpiece = d_or_zero(piece.part);
    int a = piece.a + da, b = piece.b + db;
    if (a < 0 || b < 0 || a > cs.m || b > cs.m || a + b != dpiece.degree) continue;
    add_scaled(out, bidegree_project(cs, dpiece, a, b), cplx(1.0));
  }
  return out;
}
}  // namespace

ComplexForm dbar(const ComplexStructure& cs, const ComplexForm& w) {
  return projected_derivative(cs, w, 0, 1);
}

ComplexForm del(const ComplexStructure& cs, const ComplexForm& w) {
  return projected_derivative(cs, w, 1, 0);
}

double f02_residual(const ComplexStructure& cs, const ComplexConnection& a) {
  ComplexForm f = curvature(a);
  if (f.ncomp() == 0) return 0.0;
  return max_norm(bidegree_project(cs, f, 0, 2));
}

ComplexForm dolbeault_contraction(const ComplexStructure& cs, const InvariantPolynomial& p,
                                  const ComplexConnection& a,
                                  const std::vector<const ComplexForm*>& tangents) {
  ComplexForm full = curvature_contraction(p, a, tangents);
  const int deg = full.degree;
  if (full.ncomp() == 0 || deg > 2 * cs.m) return ComplexForm(full.grid, deg, nullptr);
  if (deg > cs.m) return ComplexForm(full.grid, deg, nullptr);  // (0,deg) needs deg <= m
  return bidegree_project(cs, full, 0, deg);
}

DolbeaultInvariant dolbeault_family_invariant(const ComplexStructure& cs,
                                              const InvariantPolynomial& p,
                                              const ConnectionFamily<cplx>& fam) {
  const int r = p.degree();
  const int k = fam.k;
  DolbeaultInvariant out;
  out.class_level_window = (k > 1 && k < r);

  double worst = 0.0;
  for (const auto& u : fam.boundary_samples)
    worst = std::max(worst, f02_residual(cs, fam.at(u.data())));
  out.worst_boundary_f02 = worst;
  out.boundary_in_f02 = worst <= kFlatnessTol;

  InvariantOptions opt;
  opt.check_boundary = false;
  FamilyInvariant<cplx> lam = family_invariant(p, fam, opt);
  const int deg = 2 * r - k;
  if (deg > cs.m) {
    out.form = ComplexForm(cs.grid, deg, nullptr);
    out.dbar_residual = 0.0;
  } else {
    out.form = bidegree_project(cs, lam.form, 0, deg);
    out.dbar_residual = max_norm(dbar(cs, out.form));
  }
  out.periods = period_vector(out.form, nullptr, false);
  return out;
}

std::vector<PeriodVector<cplx>> dolbeault_integer_lattice(const ComplexStructure& cs, int q) {
  std::vector<PeriodVector<cplx>> out;
  if (q > cs.m) return out;
  const auto& tab = ComboTables::get(cs.grid.n);
  for (int c = 0; c < tab.count(q); ++c) {
    ComplexForm gen = basis_form<cplx>(cs.grid, tab.axes(q, c));
    ComplexForm proj = bidegree_project(cs, gen, 0, q);
    out.push_back(period_vector(proj, nullptr, false));
  }
  return out;
}

double reduce_mod_lattice(const PeriodVector<cplx>& v,
                          const std::vector<PeriodVector<cplx>>& lattice) {
  const std::size_t len = v.entries.size();
  std::vector<std::size_t> keep;
  for (std::size_t g = 0; g < lattice.size(); ++g) {
    double n = 0.0;
    for (const auto& e : lattice[g].entries) n = std::max(n, std::abs(e));
    if (n > 1e-12) keep.push_back(g);
  }
  if (keep.empty()) {
    double n = 0.0;
    for (const auto& e : v.entries) n = std::max(n, std::abs(e));
    return n;
  }
  Eigen::MatrixXd a(2 * len, keep.size());
  Eigen::VectorXd rhs(2 * len);
  for (std::size_t i = 0; i < len; ++i) {
    rhs(2 * i) = v.entries[i].real();
    rhs(2 * i + 1) = v.entries[i].imag();
    for (std::size_t g = 0; g < keep.size(); ++g) {
      a(2 * i, g) = lattice[keep[g]].entries[i].real();
      a(2 * i + 1, g) = lattice[keep[g]].entries[i].imag();
    }
  }
  Eigen::VectorXd coeff = a.colPivHouseholderQr().solve(rhs);
  for (int i = 0; i < coeff.size(); ++i) coeff(i) = std::round(coeff(i));
  Eigen::VectorXd res = rhs - a * coeff;
  return res.lpNorm<Eigen::Infinity>();
}

ComplexConnection complexify_connection(const RealConnection& a) {
  return ComplexConnection(complexify(a.form));
}

ConnectionFamily<cplx> complexify_family(const ConnectionFamily<double>& fam) {
  ConnectionFamily<cplx> out;
  out.kind = fam.kind;
  out.k = fam.k;
  out.domain = fam.domain;
  out.boundary_samples = fam.boundary_samples;
  auto inner = std::make_shared<ConnectionFamily<double>>(fam);
  out.at = [inner](const double* u) {
    return ComplexConnection(complexify(inner->at(u).form));
  };
  out.partial = [inner](const double* u, int axis) {
    return complexify(inner->partial(u, axis));
  };
  return out;
}

}  // namespace flatlab
