#include "grid.hpp"

#include <map>
#include <memory>
#include <mutex>

namespace flatlab {

namespace {
void enumerate(int n, int k, int start, std::vector<int>& cur,
               std::vector<std::vector<int>>& out) {
  if (int(cur.size()) == k) {
    out.push_back(cur);
    return;
  }
  for (int a = start; a < n; ++a) {
    cur.push_back(a);
    enumerate(n, k, a + 1, cur, out);
    cur.pop_back();
  }
}

int merge_sign(const std::vector<int>& I, const std::vector<int>& J) {
  // moving each j in J left past the elements of I greater than it
  int inversions = 0;
  for (int j : J)
    for (int i : I)
      if (i > j) ++inversions;
  return (inversions % 2 == 0) ? 1 : -1;
}
}  // namespace

ComboTables::ComboTables(int n) : n_(n) {
  comps_.resize(std::size_t(n) + 1);
  masks_.resize(std::size_t(n) + 1);
  for (int k = 0; k <= n; ++k) {
    std::vector<int> cur;
    enumerate(n, k, 0, cur, comps_[std::size_t(k)]);
    for (const auto& axes : comps_[std::size_t(k)]) {
      std::uint32_t m = 0;
      for (int a : axes) m |= (1u << a);
      masks_[std::size_t(k)].push_back(m);
    }
  }

  merge_.resize(std::size_t(n + 1) * std::size_t(n + 1));
  for (int a = 0; a <= n; ++a)
    for (int b = 0; a + b <= n; ++b) {
      auto& tab = merge_[std::size_t(a) * std::size_t(n + 1) + std::size_t(b)];
      tab.resize(comps_[std::size_t(a)].size());
      for (std::size_t ca = 0; ca < comps_[std::size_t(a)].size(); ++ca) {
        tab[ca].resize(comps_[std::size_t(b)].size());
        for (std::size_t cb = 0; cb < comps_[std::size_t(b)].size(); ++cb) {
          std::uint32_t ma = masks_[std::size_t(a)][ca];
          std::uint32_t mb = masks_[std::size_t(b)][cb];
          if (ma & mb) {
            tab[ca][cb] = {-1, 0};
          } else {
            int target = comp_of_mask(a + b, ma | mb);
            int sign = merge_sign(comps_[std::size_t(a)][ca], comps_[std::size_t(b)][cb]);
            tab[ca][cb] = {target, sign};
          }
        }
      }
    }

  dterms_.resize(std::size_t(n) + 1);
  for (int k = 0; k < n; ++k) {
    dterms_[std::size_t(k)].resize(comps_[std::size_t(k)].size());
    for (std::size_t c = 0; c < comps_[std::size_t(k)].size(); ++c) {
      const auto& I = comps_[std::size_t(k)][c];
      for (int axis = 0; axis < n; ++axis) {
        if (masks_[std::size_t(k)][c] & (1u << axis)) continue;
        int below = 0;
        for (int i : I)
          if (i < axis) ++below;
        int target = comp_of_mask(k + 1, masks_[std::size_t(k)][c] | (1u << axis));
        dterms_[std::size_t(k)][c].push_back({axis, target, (below % 2 == 0) ? 1 : -1});
      }
    }
  }
}

int ComboTables::comp_of_mask(int degree, std::uint32_t mask) const {
  const auto& ms = masks_[std::size_t(degree)];
  for (std::size_t i = 0; i < ms.size(); ++i)
    if (ms[i] == mask) return int(i);
  fail(ErrorCode::internal, "component mask not found");
}

const ComboTables::Merge& ComboTables::merge(int a, int b, int ca, int cb) const {
  return merge_[std::size_t(a) * std::size_t(n_ + 1) + std::size_t(b)][std::size_t(ca)]
               [std::size_t(cb)];
}

const std::vector<ComboTables::DTerm>& ComboTables::d_terms(int k, int c) const {
  return dterms_[std::size_t(k)][std::size_t(c)];
}

const ComboTables& ComboTables::get(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<ComboTables>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, std::unique_ptr<ComboTables>(new ComboTables(n))).first;
  return *it->second;
}

}  // namespace flatlab
