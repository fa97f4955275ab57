#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tapestry/grid/field.hpp"
#include "tapestry/unigrid/decomposition.hpp"

namespace tapestry::unigrid {

enum class ReduceOp { sum, min, max, l1, l2, linf, count };

ReduceOp parse_reduce_op(std::string_view s);
const char* to_string(ReduceOp op);

struct UnknownVariable : std::out_of_range {
  using std::out_of_range::out_of_range;
};

/// Reduction over the owned points of all patches. Points are visited in
/// global index order (z, then y, then x), independent of how the level is
/// split into patches, so the result is bit-identical to a serial sweep of
/// the gathered grid. l1 and l2 are normalized by the point count.
double reduce(ReduceOp op, std::span<const Patch> patches, std::string_view group, std::string_view var, int tl = 0);

/// Same, looking the variable up by name across all groups ("group::var" or
/// bare variable name).
double reduce(ReduceOp op, std::span<const Patch> patches, std::string_view variable);

/// Lagrange interpolation of `order`+1 points per dimension; order must be
/// 1, 3 or 5. Points outside the domain (or whose stencil the owning block
/// cannot serve) yield nullopt.
std::vector<std::optional<double>> interpolate_points(const DomainSpec& domain, std::span<const Patch> patches,
                                                      std::string_view group, std::string_view var,
                                                      std::span<const std::array<double, 3>> points, int order);

}  // namespace tapestry::unigrid
