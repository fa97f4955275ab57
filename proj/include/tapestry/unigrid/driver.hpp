#pragma once

#include <map>
#include <memory>

#include "tapestry/flesh/driver.hpp"
#include "tapestry/flesh/registry.hpp"
#include "tapestry/mol/integrator.hpp"
#include "tapestry/unigrid/exchange.hpp"

namespace tapestry::unigrid {

/// Parameters of the "grid" and "driver" thorns.
flesh::ThornManifest grid_thorn();
flesh::ThornManifest driver_thorn();

/// Domain described by the grid:: parameters, with the given ghost width.
DomainSpec domain_from(const flesh::ParameterTable& params, int ghost_width);

/// Ghost width the decomposition must support: driver::ghost_width or the
/// widest registered group, whichever is larger.
int required_ghost_width(const flesh::Registry& reg, const flesh::ParameterTable& params);

/// The decomposed base grid shared by both drivers: one patch per rank,
/// patch index equal to rank, plus cached halo plans per ghost width.
class BaseGrid {
 public:
  void configure(const DomainSpec& domain, int nranks, ExchangeStrategy strategy);
  /// (Re)create the patches and allocate every registered group, zeroed.
  void allocate(const flesh::Registry& reg);

  const DomainSpec& domain() const { return domain_; }
  const Decomposition& decomposition() const { return dec_; }
  ExchangeStrategy strategy() const { return strategy_; }
  void set_strategy(ExchangeStrategy s);
  Level& level() { return level_; }
  const Level& level() const { return level_; }
  comm::Transport& transport() { return transport_; }

  const HaloPlan& plan(int ghost_width);
  void sync(std::string_view group, const comm::Executor& exec, int tl = 0);

 private:
  DomainSpec domain_;
  Decomposition dec_;
  ExchangeStrategy strategy_ = ExchangeStrategy::directional;
  Level level_;
  comm::Transport transport_;
  std::map<int, HaloPlan> plans_;
};

nlohmann::json describe_level(const Level& lev);
/// Restore times and step counters recorded by describe_level.
void load_level_clock(Level& lev, const nlohmann::json& j);

/// PUGH-style driver: a single level decomposed into one block per rank.
class UnigridDriver : public flesh::Driver {
 public:
  std::string name() const override { return "unigrid"; }
  int nranks() const override { return grid_.decomposition().topology.nranks; }
  void setup(flesh::Simulation& sim) override;
  int num_levels() const override { return 1; }
  Level& level(int l) override;
  const Level& level(int l) const override;
  void sync(int l, std::string_view group) override;
  void post_initial(flesh::Simulation& sim) override;
  double timestep(flesh::Simulation& sim) override;
  void advance(flesh::Simulation& sim, double dt) override;
  double reduce(std::string_view op, std::string_view variable) const override;
  nlohmann::json describe() const override;
  void load_layout(flesh::Simulation& sim, const nlohmann::json& layout) override;

  BaseGrid& grid() { return grid_; }
  const BaseGrid& grid() const { return grid_; }

 private:
  BaseGrid grid_;
  const comm::Executor* exec_ = nullptr;
  mol::Workspace ws_;
};

/// dt for a level of spacing h: cfl * h / max speed (speed 0 counts as 1).
double cfl_timestep(flesh::Simulation& sim, int l);

}  // namespace tapestry::unigrid
