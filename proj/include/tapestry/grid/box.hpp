#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

namespace tapestry {

using Index3 = std::array<std::int64_t, 3>;

/// Inclusive index box [lo, hi] in the index space of one refinement level.
/// A box with hi < lo in any dimension is empty.
struct IndexBox {
  Index3 lo{0, 0, 0};
  Index3 hi{-1, -1, -1};

  static IndexBox from_extent(const Index3& lo, const Index3& extent) {
    return {lo, {lo[0] + extent[0] - 1, lo[1] + extent[1] - 1, lo[2] + extent[2] - 1}};
  }

  bool empty() const { return hi[0] < lo[0] || hi[1] < lo[1] || hi[2] < lo[2]; }

  std::int64_t extent(int d) const { return std::max<std::int64_t>(0, hi[d] - lo[d] + 1); }
  Index3 extents() const { return {extent(0), extent(1), extent(2)}; }
  std::int64_t volume() const { return extent(0) * extent(1) * extent(2); }

  bool contains(const Index3& p) const {
    for (int d = 0; d < 3; ++d)
      if (p[d] < lo[d] || p[d] > hi[d]) return false;
    return true;
  }
  bool contains(const IndexBox& b) const {
    return b.empty() || (contains(b.lo) && contains(b.hi));
  }

  IndexBox grown(std::int64_t w) const {
    return {{lo[0] - w, lo[1] - w, lo[2] - w}, {hi[0] + w, hi[1] + w, hi[2] + w}};
  }
  IndexBox shifted(const Index3& s) const {
    return {{lo[0] + s[0], lo[1] + s[1], lo[2] + s[2]}, {hi[0] + s[0], hi[1] + s[1], hi[2] + s[2]}};
  }

  friend bool operator==(const IndexBox& a, const IndexBox& b) {
    if (a.empty() && b.empty()) return true;
    return a.lo == b.lo && a.hi == b.hi;
  }
  friend bool operator<(const IndexBox& a, const IndexBox& b) {
    // z-major so sorted boxes follow x-fastest storage order
    const Index3 al{a.lo[2], a.lo[1], a.lo[0]}, bl{b.lo[2], b.lo[1], b.lo[0]};
    if (al != bl) return al < bl;
    const Index3 ah{a.hi[2], a.hi[1], a.hi[0]}, bh{b.hi[2], b.hi[1], b.hi[0]};
    return ah < bh;
  }
};

inline IndexBox intersect(const IndexBox& a, const IndexBox& b) {
  IndexBox r;
  for (int d = 0; d < 3; ++d) {
    r.lo[d] = std::max(a.lo[d], b.lo[d]);
    r.hi[d] = std::min(a.hi[d], b.hi[d]);
  }
  return r;
}

/// Smallest box containing both.
inline IndexBox bounding(const IndexBox& a, const IndexBox& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  IndexBox r;
  for (int d = 0; d < 3; ++d) {
    r.lo[d] = std::min(a.lo[d], b.lo[d]);
    r.hi[d] = std::max(a.hi[d], b.hi[d]);
  }
  return r;
}

/// a \ b as a list of disjoint boxes (at most six).
std::vector<IndexBox> subtract(const IndexBox& a, const IndexBox& b);

/// Disjoint box list covering the union of the inputs.
std::vector<IndexBox> normalize_union(const std::vector<IndexBox>& boxes);

/// Disjoint boxes of `region` not covered by any of `holes`.
std::vector<IndexBox> subtract(const std::vector<IndexBox>& region, const std::vector<IndexBox>& holes);

bool region_contains(const std::vector<IndexBox>& region, const Index3& p);
bool region_contains(const std::vector<IndexBox>& region, const IndexBox& b);
std::int64_t region_volume(const std::vector<IndexBox>& region);

/// Floor division for possibly negative indices.
inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::ostream& operator<<(std::ostream& os, const IndexBox& b);

}  // namespace tapestry
