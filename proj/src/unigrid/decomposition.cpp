#include "tapestry/unigrid/decomposition.hpp"

#include <limits>
#include <optional>

namespace tapestry::unigrid {

Boundary parse_boundary(const std::string& s) {
  if (s == "periodic") return Boundary::periodic;
  if (s == "outer-copy") return Boundary::outer_copy;
  throw std::invalid_argument("unknown boundary '" + s + "' (expected periodic|outer-copy)");
}

const char* to_string(Boundary b) { return b == Boundary::periodic ? "periodic" : "outer-copy"; }

void DomainSpec::validate() const {
  if (!(h > 0.0)) throw SizingError("grid spacing must be positive");
  if (ghost_width < 0) throw SizingError("ghost width must be non-negative");
  for (int d = 0; d < 3; ++d)
    if (points[d] < 2 * ghost_width + 1)
      throw SizingError("dimension " + std::to_string(d) + " has " + std::to_string(points[d]) +
                        " points; at least 2g+1 = " + std::to_string(2 * ghost_width + 1) +
                        " are needed to host " + std::to_string(ghost_width) + "-wide ghost zones");
}

std::vector<std::int64_t> split_extent(std::int64_t extent, int parts) {
  std::vector<std::int64_t> starts(static_cast<std::size_t>(parts) + 1);
  const std::int64_t q = extent / parts, r = extent % parts;
  std::int64_t s = 0;
  for (int p = 0; p < parts; ++p) {
    starts[static_cast<std::size_t>(p)] = s;
    s += q + (p < r ? 1 : 0);
  }
  starts[static_cast<std::size_t>(parts)] = s;
  return starts;
}

namespace {

std::optional<std::array<int, 3>> best_factorization(const Index3& extent, int nranks, std::int64_t min_extent) {
  std::optional<std::array<int, 3>> best;
  long double best_area = std::numeric_limits<long double>::max();
  for (int px = 1; px <= nranks; ++px) {
    if (nranks % px) continue;
    for (int py = 1; py <= nranks / px; ++py) {
      if ((nranks / px) % py) continue;
      const int pz = nranks / px / py;
      const std::array<int, 3> p{px, py, pz};
      bool ok = true;
      for (int d = 0; d < 3; ++d)
        if (extent[d] / p[d] < min_extent) ok = false;
      if (!ok) continue;
      const long double area = static_cast<long double>(px - 1) * extent[1] * extent[2] +
                               static_cast<long double>(py - 1) * extent[0] * extent[2] +
                               static_cast<long double>(pz - 1) * extent[0] * extent[1];
      // loop order visits factorizations lexicographically, so strict < keeps the smallest tie
      if (area < best_area) {
        best_area = area;
        best = p;
      }
    }
  }
  return best;
}

}  // namespace

Decomposition decompose(const DomainSpec& domain, int nranks) {
  if (nranks < 1) throw SizingError("nranks must be >= 1");
  domain.validate();
  const std::int64_t min_extent = std::max(domain.ghost_width, 1);
  const auto dims = best_factorization(domain.points, nranks, min_extent);
  if (!dims)
    throw SizingError("no factorization of " + std::to_string(nranks) + " ranks gives every block at least " +
                      std::to_string(min_extent) + " owned points per dimension");

  Decomposition dec;
  dec.topology = {nranks, *dims};
  std::array<std::vector<std::int64_t>, 3> starts;
  for (int d = 0; d < 3; ++d) starts[d] = split_extent(domain.points[d], (*dims)[d]);

  const int g = domain.ghost_width;
  dec.blocks.resize(static_cast<std::size_t>(nranks));
  for (int r = 0; r < nranks; ++r) {
    Block& b = dec.blocks[static_cast<std::size_t>(r)];
    b.rank = r;
    const auto c = dec.topology.coords_of(r);
    for (int d = 0; d < 3; ++d) {
      b.owned.lo[d] = starts[d][static_cast<std::size_t>(c[d])];
      b.owned.hi[d] = starts[d][static_cast<std::size_t>(c[d]) + 1] - 1;
    }
    b.ext = b.owned.grown(g);
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const std::array<int, 3> off{dx, dy, dz};
          std::array<int, 3> nc{};
          bool boundary = false;
          for (int d = 0; d < 3; ++d) {
            nc[d] = c[d] + off[d];
            if (nc[d] < 0 || nc[d] >= (*dims)[d]) {
              if (domain.boundary == Boundary::periodic)
                nc[d] = (nc[d] + (*dims)[d]) % (*dims)[d];
              else
                boundary = true;
            }
          }
          b.neighbors[static_cast<std::size_t>(direction_index(dx, dy, dz))] =
              boundary ? -1 : dec.topology.rank_of(nc);
        }
  }
  return dec;
}

std::vector<IndexBox> split_box(const IndexBox& box, int parts, int min_extent) {
  std::vector<IndexBox> out;
  const auto dims = best_factorization(box.extents(), parts, std::max(min_extent, 1));
  if (!dims) return out;
  std::array<std::vector<std::int64_t>, 3> starts;
  for (int d = 0; d < 3; ++d) starts[d] = split_extent(box.extent(d), (*dims)[d]);
  const ProcessTopology topo{parts, *dims};
  for (int r = 0; r < parts; ++r) {
    const auto c = topo.coords_of(r);
    IndexBox b;
    for (int d = 0; d < 3; ++d) {
      b.lo[d] = box.lo[d] + starts[d][static_cast<std::size_t>(c[d])];
      b.hi[d] = box.lo[d] + starts[d][static_cast<std::size_t>(c[d]) + 1] - 1;
    }
    out.push_back(b);
  }
  return out;
}

}  // namespace tapestry::unigrid
