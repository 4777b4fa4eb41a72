#include "mixed_forms.hpp"

namespace flatlab {

template <class S>
void MixedForm<S>::set_part(std::uint32_t mask, GridForm<S> w) {
  FLATLAB_REQUIRE(int(__builtin_popcount(mask)) + w.degree == total_degree,
                  ErrorCode::degree_error, "mixed part degree mismatch");
  FLATLAB_REQUIRE(w.grid == grid, ErrorCode::dimension_mismatch, "mixed part grid mismatch");
  parts.erase(mask);
  parts.emplace(mask, std::move(w));
}

template <class S>
const GridForm<S>* MixedForm<S>::part(std::uint32_t mask) const {
  auto it = parts.find(mask);
  return it == parts.end() ? nullptr : &it->second;
}

int parameter_merge_sign(int pdim, std::uint32_t a, std::uint32_t b) {
  // Koszul sign for du^a ^ du^b -> du^{a|b}: count inversions.
  int inv = 0;
  for (int i = 0; i < pdim; ++i)
    if (b & (1u << i))
      for (int j = i + 1; j < pdim; ++j)
        if (a & (1u << j)) ++inv;
  return (inv % 2 == 0) ? 1 : -1;
}

namespace {

template <class S>
struct MixedRecursion {
  const std::vector<const MixedForm<S>*>& slots;
  const InvariantPolynomial& p;
  int r;
  MixedForm<S>* out;
  std::vector<const GridForm<S>*> chosen;

  // Enumerate one torus part per slot; the tensor contraction runs on the
  // chosen parts, with the accumulated du sign in front.
  void run(int level, std::uint32_t mask, int sign, int mdeg_so_far) {
    if (level == r) {
      GridForm<S> w = poly_eval_forms(p, chosen);
      if (w.ncomp() == 0) return;
      auto it = out->parts.find(mask);
      if (it == out->parts.end()) {
        if (sign != 1) w = scaled(w, S(double(sign)));
        out->set_part(mask, std::move(w));
      } else {
        add_scaled(it->second, w, S(double(sign)));
      }
      return;
    }
    for (const auto& kv : slots[std::size_t(level)]->parts) {
      std::uint32_t pm = kv.first;
      if (pm & mask) continue;
      // move du^{pm} left past the torus factors accumulated so far
      int s = sign * parameter_merge_sign(out->pdim, mask, pm);
      if ((int(__builtin_popcount(pm)) * mdeg_so_far) % 2 == 1) s = -s;
      chosen.push_back(&kv.second);
      run(level + 1, mask | pm, s, mdeg_so_far + kv.second.degree);
      chosen.pop_back();
    }
  }
};

}  // namespace

template <class S>
MixedForm<S> mixed_poly_eval(const InvariantPolynomial& p,
                             const std::vector<const MixedForm<S>*>& slots) {
  FLATLAB_REQUIRE(int(slots.size()) == p.degree(), ErrorCode::arity_error,
                  "polynomial arity mismatch in mixed evaluation");
  int total = 0;
  for (const auto* s : slots) total += s->total_degree;
  MixedForm<S> out(slots[0]->pdim, total, slots[0]->grid, nullptr);
  MixedRecursion<S> rec{slots, p, p.degree(), &out, {}};
  rec.run(0, 0u, 1, 0);
  return out;
}

template <class S>
GridForm<S> contract_all_parameters(const MixedForm<S>& w) {
  const std::uint32_t full = (1u << w.pdim) - 1u;
  const int k = w.pdim;
  const int s = (k * (k - 1) / 2) % 2 == 0 ? 1 : -1;
  const GridForm<S>* part = w.part(full);
  if (!part) return GridForm<S>(w.grid, w.total_degree - k, w.algebra);
  return s == 1 ? *part : scaled(*part, S(-1.0));
}

#define FLATLAB_INSTANTIATE(S)                                                       \
  template struct MixedForm<S>;                                                      \
  template MixedForm<S> mixed_poly_eval<S>(const InvariantPolynomial&,               \
                                           const std::vector<const MixedForm<S>*>&); \
  template GridForm<S> contract_all_parameters<S>(const MixedForm<S>&);

FLATLAB_INSTANTIATE(double)
FLATLAB_INSTANTIATE(cplx)
#undef FLATLAB_INSTANTIATE

}  // namespace flatlab
