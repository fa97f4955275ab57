#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "tapestry/comm/transport.hpp"
#include "tapestry/grid/field.hpp"
#include "tapestry/unigrid/decomposition.hpp"

namespace tapestry::unigrid {

enum class ExchangeStrategy { directional, neighbors };

ExchangeStrategy parse_strategy(const std::string& s);
const char* to_string(ExchangeStrategy s);

/// Maps a destination point p to its source point q along each dimension:
/// q = p + shift, then clamped into [clamp_lo, clamp_hi] where `clamp` is set.
struct PointMap {
  Index3 shift{0, 0, 0};
  std::array<bool, 3> clamp{false, false, false};
};

/// One ghost region filled from another patch (or, for periodic wrap, from
/// the same patch) through a message.
struct Transfer {
  int phase = 0;
  int src_patch = 0;
  int dst_patch = 0;
  int region = 0;
  IndexBox dst_box;
  PointMap map;
};

/// One ghost region at a physical boundary filled locally by copying the
/// nearest interior point.
struct LocalFill {
  int phase = 0;
  int patch = 0;
  IndexBox dst_box;
  PointMap map;
};

/// Precomputed communication schedule for one level. Patches are addressed
/// by their position in the level's patch array; the rank that sends is the
/// owner of the source patch.
struct HaloPlan {
  int phases = 1;
  IndexBox clamp_box;  // domain index box used by clamping maps
  std::vector<Transfer> transfers;
  std::vector<LocalFill> fills;

  /// Sum of destination volumes over transfers (per variable).
  std::int64_t message_volume() const;
};

/// Three phases (x, then y, then z); phase k ships slabs that include the
/// ghost layers filled in phases < k, so edges and corners arrive
/// transitively. Two transfers per rank per phase on periodic domains.
HaloPlan build_directional_plan(const DomainSpec& domain, const Decomposition& dec);

/// Single phase; each block receives its 26 face, edge and corner regions
/// directly from the owning rank.
HaloPlan build_neighbor_plan(const DomainSpec& domain, const Decomposition& dec);

HaloPlan build_plan(ExchangeStrategy s, const DomainSpec& domain, const Decomposition& dec);

/// Ghost fill between arbitrary sibling patches on a level without periodic
/// wrap (refined levels). Ghost points not covered by any sibling are left
/// untouched.
HaloPlan build_sibling_plan(std::span<const Patch> patches);

/// Execute the plan for time level `tl` of `group` on every patch.
void execute(const HaloPlan& plan, std::span<Patch> patches, std::string_view group, int tl,
             comm::Transport& transport, const comm::Executor& exec);

void exchange_directional(const DomainSpec& domain, const Decomposition& dec, std::span<Patch> patches,
                          std::string_view group, comm::Transport& transport, const comm::Executor& exec);
void exchange_neighbors(const DomainSpec& domain, const Decomposition& dec, std::span<Patch> patches,
                        std::string_view group, comm::Transport& transport, const comm::Executor& exec);

}  // namespace tapestry::unigrid
