#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "tapestry/grid/box.hpp"
#include "tapestry/unigrid/decomposition.hpp"

namespace tapestry::amr {

/// A location refined around, with the half-width of the refined box on
/// each level 1, 2, ... measured in points of that level.
struct Centre {
  std::array<double, 3> position{0.0, 0.0, 0.0};
  std::vector<std::int64_t> half_widths;
};

/// Parse "x,y,z:w1,w2,...;x,y,z:..." into centres.
std::vector<Centre> parse_centres(const std::string& text);
std::string format_centres(const std::vector<Centre>& centres);

struct InterpSpec {
  int spatial_order = 5;
  int time_order = 2;

  void validate() const;
  /// Coarse points needed on each side beyond the fine box.
  int stencil_halo() const { return (spatial_order - 1) / 2; }
};

struct HierarchySpec {
  int nlevels = 1;
  std::vector<Centre> centres;
  InterpSpec interp;
  int buffer_width = 0;
  int ghost_width = 0;
};

struct NestingError : std::runtime_error {
  NestingError(int level, const std::string& what);
  int level;
};

/// Refined region R and evolved region E (= R plus buffer zones) of one level
/// in that level's index space. Point i of level l sits at origin + i*h/2^l.
struct LevelRegions {
  double h = 1.0;
  std::vector<IndexBox> refined;
  std::vector<IndexBox> evolved;
};

struct RefinementHierarchy {
  unigrid::DomainSpec domain;
  HierarchySpec spec;
  std::vector<LevelRegions> levels;
};

/// Buffer width rule: factor * integrator substeps * stencil radius.
int buffer_width(int factor, int substeps, int stencil_radius);

/// Level 0 is the whole domain; level l >= 1 is the union of the centres'
/// boxes, snapped outward to even indices so every box edge coincides with a
/// coarse point. Throws NestingError when some level does not fit.
RefinementHierarchy build_hierarchy(const unigrid::DomainSpec& domain, const HierarchySpec& spec);

/// Proper nesting: for l >= 1 every box of E_l grown by the ghost width,
/// coarsened and widened by the prolongation stencil, lies inside R_{l-1}
/// (inside the domain for l = 1).
void check_nesting(const RefinementHierarchy& h);

/// Coarse-level box containing every coarse point a fine box touches.
IndexBox coarsen(const IndexBox& fine);
/// Fine-level box of the points coincident with or between the coarse points.
IndexBox refine(const IndexBox& coarse);

}  // namespace tapestry::amr
