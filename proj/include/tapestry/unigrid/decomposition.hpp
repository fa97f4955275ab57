#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "tapestry/grid/box.hpp"

namespace tapestry::unigrid {

enum class Boundary { periodic, outer_copy };

Boundary parse_boundary(const std::string& s);
const char* to_string(Boundary b);

/// Global vertex-centred grid: point i sits at origin + i*h.
struct DomainSpec {
  Index3 points{0, 0, 0};
  std::array<double, 3> origin{0.0, 0.0, 0.0};
  double h = 1.0;
  Boundary boundary = Boundary::periodic;
  int ghost_width = 0;

  IndexBox box() const { return IndexBox::from_extent({0, 0, 0}, points); }
  double coord(int d, std::int64_t i) const { return origin[d] + static_cast<double>(i) * h; }
  /// Throws SizingError when points < 2g+1 in some dimension or h <= 0.
  void validate() const;
};

struct SizingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProcessTopology {
  int nranks = 1;
  std::array<int, 3> dims{1, 1, 1};

  std::array<int, 3> coords_of(int rank) const {
    return {rank % dims[0], (rank / dims[0]) % dims[1], rank / (dims[0] * dims[1])};
  }
  int rank_of(const std::array<int, 3>& c) const { return c[0] + dims[0] * (c[1] + dims[1] * c[2]); }
};

/// Direction offsets (dx,dy,dz) in {-1,0,1}^3 are indexed (dx+1) + 3(dy+1) + 9(dz+1).
inline int direction_index(int dx, int dy, int dz) { return (dx + 1) + 3 * (dy + 1) + 9 * (dz + 1); }

struct Block {
  int rank = 0;
  IndexBox owned;
  IndexBox ext;
  /// Neighbouring rank per direction; -1 marks a physical boundary. Entry 13
  /// (the block itself) is unused and holds the own rank.
  std::array<int, 27> neighbors{};
};

struct Decomposition {
  ProcessTopology topology;
  std::vector<Block> blocks;  // indexed by rank
};

/// Split `extent` points into `parts` contiguous ranges; the first
/// (extent % parts) ranges get one extra point. Returns the start offsets
/// plus a trailing end offset.
std::vector<std::int64_t> split_extent(std::int64_t extent, int parts);

/// Among the exact factorizations of nranks whose every owned extent is at
/// least max(g, 1), pick the one with least inter-block surface; ties go to
/// the lexicographically smallest (px, py, pz).
Decomposition decompose(const DomainSpec& domain, int nranks);

/// Same factorization rule applied to an arbitrary box; used for
/// distributing refined regions. Returns an empty vector when infeasible.
std::vector<IndexBox> split_box(const IndexBox& box, int parts, int min_extent);

}  // namespace tapestry::unigrid
