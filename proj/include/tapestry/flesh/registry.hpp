#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tapestry/flesh/parameters.hpp"
#include "tapestry/grid/field.hpp"
#include "tapestry/grid/level.hpp"

namespace tapestry::flesh {

class Simulation;

enum class Bin { startup, initial, prestep, evol, poststep, analysis, output, shutdown };

inline constexpr std::array<Bin, 8> all_bins{Bin::startup, Bin::initial,  Bin::prestep, Bin::evol,
                                             Bin::poststep, Bin::analysis, Bin::output, Bin::shutdown};

const char* to_string(Bin b);
Bin parse_bin(std::string_view s);

using tapestry::LevelGeometry;

/// Everything a block-local routine may look at.
struct BlockContext {
  Patch& patch;
  int level = 0;
  LevelGeometry geom;
  double time = 0.0;
  std::int64_t iteration = 0;
  const ParameterTable& params;

  double x(int d, std::int64_t i) const { return geom.x(d, i); }
};

using BlockFn = std::function<void(BlockContext&)>;
using GlobalFn = std::function<void(Simulation&)>;

/// A stateless routine plus its ordering constraints. Exactly one of
/// `local` (called once per block) or `global` (called once) is set.
struct ScheduleItem {
  std::string name;
  Bin bin = Bin::initial;
  std::set<std::string> after;
  std::set<std::string> before;
  std::set<std::string> sync_groups;
  std::set<std::string> reads;
  std::set<std::string> writes;
  BlockFn local;
  GlobalFn global;
};

/// Right-hand side of an evolved group: fill rhs[v] at the owned points of
/// the block from the current state. Must not write ghost points.
using RhsFn = std::function<void(const BlockContext&, const GroupData& state, std::span<const Array3> rhs)>;
/// Largest characteristic speed on a block (for the CFL time step).
using SpeedFn = std::function<double(const BlockContext&, const GroupData& state)>;

struct EvolvedGroup {
  std::string group;
  RhsFn rhs;
  SpeedFn max_speed;
  int stencil_radius = 0;
};

struct ThornManifest {
  std::string name;
  std::vector<VariableGroup> groups;
  std::vector<ParameterSpec> parameters;
  std::vector<ScheduleItem> items;
  std::vector<EvolvedGroup> evolved;

  bool empty() const { return groups.empty() && parameters.empty() && items.empty() && evolved.empty(); }
};

struct RegistrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ThornHandle {
  int index = -1;
  std::string name;
};

/// Module manager. Names of thorns, groups, parameters and schedule items
/// are each unique across the registry.
class Registry {
 public:
  ThornHandle register_thorn(const ThornManifest& manifest);

  const std::vector<std::string>& thorns() const { return thorns_; }
  const std::vector<VariableGroup>& groups() const { return groups_; }
  const std::vector<ParameterSpec>& parameters() const { return parameters_; }
  const std::vector<ScheduleItem>& items() const { return items_; }
  const std::vector<EvolvedGroup>& evolved() const { return evolved_; }

  const VariableGroup* find_group(std::string_view name) const;
  const ParameterSpec* find_parameter(std::string_view name) const;
  const ScheduleItem* find_item(std::string_view name) const;

  std::vector<ScheduleItem> items_in(Bin b) const;
  /// Fresh table with every declared parameter at its default.
  ParameterTable default_parameters() const;

 private:
  std::vector<std::string> thorns_;
  std::vector<VariableGroup> groups_;
  std::vector<ParameterSpec> parameters_;
  std::vector<ScheduleItem> items_;
  std::vector<EvolvedGroup> evolved_;
};

struct ScheduleError : std::runtime_error {
  using std::runtime_error::runtime_error;
  std::vector<std::string> cycle;
};

/// Order the items of `bin` so every before/after constraint holds. Ties are
/// broken by item name, so the result is deterministic. Constraints naming
/// items outside the bin are dropped and reported in `warnings`.
std::vector<ScheduleItem> resolve_schedule(const std::vector<ScheduleItem>& items, Bin bin,
                                           std::vector<std::string>* warnings = nullptr);

}  // namespace tapestry::flesh
