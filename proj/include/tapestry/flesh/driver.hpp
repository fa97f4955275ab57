#pragma once

#include <span>
#include <string>
#include <string_view>

#include "json.hpp"
#include "tapestry/grid/level.hpp"

namespace tapestry::flesh {

class Simulation;

/// Storage, decomposition, communication and time stepping of grid data.
/// The flesh only talks to drivers through this interface.
class Driver {
 public:
  virtual ~Driver() = default;

  virtual std::string name() const = 0;
  virtual int nranks() const = 0;

  /// Allocate storage for every registered group.
  virtual void setup(Simulation& sim) = 0;

  virtual int num_levels() const = 0;
  virtual Level& level(int l) = 0;
  virtual const Level& level(int l) const = 0;

  /// Fill the ghost zones of the current time level of `group` on level l.
  virtual void sync(int l, std::string_view group) = 0;

  /// Called once after the INITIAL bin ran on every level.
  virtual void post_initial(Simulation& sim) = 0;

  /// Time step of the base level for the next iteration.
  virtual double timestep(Simulation& sim) = 0;

  /// Advance the whole grid hierarchy by one base-level step of size dt.
  virtual void advance(Simulation& sim, double dt) = 0;

  /// Reduction over the base level ("thorn::var" or bare variable name).
  virtual double reduce(std::string_view op, std::string_view variable) const = 0;

  /// Topology and hierarchy description stored in checkpoints.
  virtual nlohmann::json describe() const = 0;
  /// Re-create the level layout recorded by describe() (possibly for a
  /// different rank count). Storage is reallocated and zeroed.
  virtual void load_layout(Simulation& sim, const nlohmann::json& layout) = 0;
};

}  // namespace tapestry::flesh
