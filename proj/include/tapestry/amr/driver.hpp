#pragma once

#include <map>
#include <vector>

#include "tapestry/amr/hierarchy.hpp"
#include "tapestry/flesh/driver.hpp"
#include "tapestry/flesh/registry.hpp"
#include "tapestry/mol/integrator.hpp"
#include "tapestry/unigrid/driver.hpp"

namespace tapestry::amr {

/// Parameters of the "amr" thorn.
flesh::ThornManifest amr_thorn();

/// Hierarchy settings from amr:: parameters and the registered evolved groups.
HierarchySpec hierarchy_spec_from(const flesh::Registry& reg, const flesh::ParameterTable& params);

/// Split every box of a level region among nranks ranks (round robin over
/// the boxes). Patch ids follow the order of the returned list.
std::vector<Patch> distribute(const std::vector<IndexBox>& region, int nranks);

/// Carpet-style Berger-Oliger driver: the base level is decomposed exactly
/// like the unigrid driver, finer levels refine around centres of interest
/// and take two steps per coarser step.
class AmrDriver : public flesh::Driver {
 public:
  std::string name() const override { return "amr"; }
  int nranks() const override { return base_.decomposition().topology.nranks; }
  void setup(flesh::Simulation& sim) override;
  int num_levels() const override { return static_cast<int>(levels_.size()); }
  Level& level(int l) override;
  const Level& level(int l) const override;
  void sync(int l, std::string_view group) override;
  void post_initial(flesh::Simulation& sim) override;
  double timestep(flesh::Simulation& sim) override;
  void advance(flesh::Simulation& sim, double dt) override;
  double reduce(std::string_view op, std::string_view variable) const override;
  nlohmann::json describe() const override;
  void load_layout(flesh::Simulation& sim, const nlohmann::json& layout) override;

  const RefinementHierarchy& hierarchy() const { return hierarchy_; }
  unigrid::BaseGrid& base() { return base_; }

  /// Move the refined regions to new centres between iterations. Points that
  /// stay refined keep their data bit for bit; new points are prolonged.
  void regrid(flesh::Simulation& sim, const std::vector<Centre>& centres);

  /// Fill the refinement boundary of level l (l >= 1) at its current time.
  void fill_boundary(flesh::Simulation& sim, int l);
  /// Restrict every evolved group from level l into level l-1 and resync it.
  void restrict_level(flesh::Simulation& sim, int l);

 private:
  void build_fine_levels(flesh::Simulation& sim);
  void evolve(flesh::Simulation& sim, int l, double dt);
  void evolve_past_levels(flesh::Simulation& sim);
  Level make_level(const flesh::Registry& reg, int l) const;

  unigrid::BaseGrid base_;
  RefinementHierarchy hierarchy_;
  std::vector<Level*> levels_;
  std::vector<Level> fine_;  // levels 1..L-1
  std::map<std::pair<int, int>, unigrid::HaloPlan> sibling_plans_;  // (level, ghost width)
  std::vector<mol::Workspace> ws_;
  const comm::Executor* exec_ = nullptr;
};

}  // namespace tapestry::amr
