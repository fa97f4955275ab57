#pragma once

#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "tapestry/amr/hierarchy.hpp"
#include "tapestry/comm/transport.hpp"
#include "tapestry/grid/level.hpp"

namespace tapestry::amr {

struct CoverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Lagrange weights in time through the first order+1 entries of `times`
/// (most recent first). A target equal to a stored time gets exactly that
/// level. Throws when fewer than order+1 times are given.
std::vector<double> time_weights(std::span<const double> times, double t, int order);

/// out = sum_k w_k values[k] with the weights above.
void time_interpolate(std::span<const double> times, std::span<const std::span<const double>> values, double t,
                      int order, std::span<double> out);

/// Interpolation stencil along one dimension for fine index i: a single
/// coarse point with weight 1 when i is even, otherwise order+1 points
/// centred on the gap.
struct Stencil1D {
  std::int64_t first = 0;
  std::vector<double> weights;
};
Stencil1D prolongation_stencil(std::int64_t fine_index, int order);

/// Fill, at the current time of `fine`, time level 0 of `group` at the points
/// of targets[p] on fine patch p, from the coarse level's owned data with
/// tensor-product Lagrange interpolation in space and polynomial
/// interpolation in time. Throws CoverError when the coarse level does not
/// hold some stencil point.
void prolong(const Level& coarse, Level& fine, std::string_view group, const InterpSpec& interp,
             const std::vector<std::vector<IndexBox>>& targets, const comm::Executor& exec);

/// Points of patch p's ghost-extended box (for ghost width gw) that lie
/// outside the refined region: the zone prolongation refreshes each step.
std::vector<std::vector<IndexBox>> boundary_targets(const Level& fine, int gw);

/// Injection of time level 0 of `group` from the refined region of `fine`
/// into the coincident owned points of `coarse`. Both levels must be at the
/// same time (1e-12 tolerance).
void restrict_to(const Level& fine, Level& coarse, std::string_view group, const comm::Executor& exec);

}  // namespace tapestry::amr
