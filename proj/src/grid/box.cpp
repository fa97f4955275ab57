#include "tapestry/grid/box.hpp"

namespace tapestry {

std::vector<IndexBox> subtract(const IndexBox& a, const IndexBox& b) {
  std::vector<IndexBox> out;
  if (a.empty()) return out;
  const IndexBox cut = intersect(a, b);
  if (cut.empty()) {
    out.push_back(a);
    return out;
  }
  // Peel slabs off dimension by dimension; the remainder shrinks to `cut`.
  IndexBox rest = a;
  for (int d = 2; d >= 0; --d) {
    if (rest.lo[d] < cut.lo[d]) {
      IndexBox slab = rest;
      slab.hi[d] = cut.lo[d] - 1;
      out.push_back(slab);
      rest.lo[d] = cut.lo[d];
    }
    if (rest.hi[d] > cut.hi[d]) {
      IndexBox slab = rest;
      slab.lo[d] = cut.hi[d] + 1;
      out.push_back(slab);
      rest.hi[d] = cut.hi[d];
    }
  }
  return out;
}

std::vector<IndexBox> subtract(const std::vector<IndexBox>& region, const std::vector<IndexBox>& holes) {
  std::vector<IndexBox> cur;
  for (const auto& b : region)
    if (!b.empty()) cur.push_back(b);
  for (const auto& h : holes) {
    std::vector<IndexBox> next;
    for (const auto& b : cur) {
      auto pieces = subtract(b, h);
      next.insert(next.end(), pieces.begin(), pieces.end());
    }
    cur = std::move(next);
  }
  std::sort(cur.begin(), cur.end());
  return cur;
}

std::vector<IndexBox> normalize_union(const std::vector<IndexBox>& boxes) {
  std::vector<IndexBox> out;
  for (const auto& b : boxes) {
    if (b.empty()) continue;
    auto fresh = subtract(std::vector<IndexBox>{b}, out);
    out.insert(out.end(), fresh.begin(), fresh.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool region_contains(const std::vector<IndexBox>& region, const Index3& p) {
  return std::any_of(region.begin(), region.end(), [&](const IndexBox& b) { return b.contains(p); });
}

bool region_contains(const std::vector<IndexBox>& region, const IndexBox& b) {
  return subtract(std::vector<IndexBox>{b}, region).empty();
}

std::int64_t region_volume(const std::vector<IndexBox>& region) {
  std::int64_t v = 0;
  for (const auto& b : normalize_union(region)) v += b.volume();
  return v;
}

std::ostream& operator<<(std::ostream& os, const IndexBox& b) {
  return os << "[(" << b.lo[0] << "," << b.lo[1] << "," << b.lo[2] << ")-(" << b.hi[0] << "," << b.hi[1]
            << "," << b.hi[2] << ")]";
}

}  // namespace tapestry
