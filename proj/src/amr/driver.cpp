#include "tapestry/amr/driver.hpp"

#include <algorithm>

#include "tapestry/amr/transfer.hpp"
#include "tapestry/flesh/simulation.hpp"
#include "tapestry/mol/level_step.hpp"
#include "tapestry/unigrid/reduction.hpp"

namespace tapestry::amr {

flesh::ThornManifest amr_thorn() {
  using namespace flesh;
  ThornManifest m;
  m.name = "amr";
  ParameterSpec order = int_param("amr::spatial_order", 5, {}, false, "prolongation order");
  order.allowed = {std::int64_t{1}, std::int64_t{3}, std::int64_t{5}, std::int64_t{7}};
  m.parameters = {
      int_param("amr::nlevels", 1, std::pair{1.0, 16.0}, false, "refinement levels including the base level"),
      order,
      int_param("amr::time_order", 2, std::pair{0.0, 4.0}, false, "time interpolation order"),
      int_param("amr::buffer_factor", 1, std::pair{0.0, 16.0}, false,
                "buffer zone width in units of substeps times stencil radius"),
      string_param("amr::centres", "", false, "x,y,z:w1,w2,...;... half-widths in points of each level"),
      bool_param("amr::init_past_levels", true, false,
                 "fill past time levels of coarse levels by stepping the initial data backwards"),
  };
  return m;
}

HierarchySpec hierarchy_spec_from(const flesh::Registry& reg, const flesh::ParameterTable& params) {
  HierarchySpec s;
  s.nlevels = static_cast<int>(params.get_int("amr::nlevels"));
  s.centres = parse_centres(params.get_string("amr::centres"));
  s.interp.spatial_order = static_cast<int>(params.get_int("amr::spatial_order"));
  s.interp.time_order = static_cast<int>(params.get_int("amr::time_order"));
  int radius = 0;
  for (const auto& e : reg.evolved()) {
    radius = std::max(radius, e.stencil_radius);
    if (s.nlevels > 1 && reg.find_group(e.group)->time_levels < s.interp.time_order + 1)
      throw flesh::ParameterError("amr::time_order " + std::to_string(s.interp.time_order) + " needs " +
                                  std::to_string(s.interp.time_order + 1) + " time levels but group '" + e.group +
                                  "' stores " + std::to_string(reg.find_group(e.group)->time_levels));
  }
  s.buffer_width = buffer_width(static_cast<int>(params.get_int("amr::buffer_factor")),
                                mol::integrator_from(params).substeps(), radius);
  s.ghost_width = unigrid::required_ghost_width(reg, params);
  return s;
}

std::vector<Patch> distribute(const std::vector<IndexBox>& region, int nranks) {
  std::vector<Patch> out;
  int next = 0;
  for (const auto& box : region) {
    std::vector<IndexBox> pieces;
    for (int parts = nranks; parts >= 1 && pieces.empty(); --parts) pieces = unigrid::split_box(box, parts, 1);
    for (const auto& piece : pieces) {
      Patch p;
      p.id = static_cast<int>(out.size());
      p.rank = next++ % nranks;
      p.owned = piece;
      out.push_back(std::move(p));
    }
  }
  return out;
}

Level AmrDriver::make_level(const flesh::Registry& reg, int l) const {
  const auto& lr = hierarchy_.levels[static_cast<std::size_t>(l)];
  Level lev;
  lev.index = l;
  lev.geom.origin = hierarchy_.domain.origin;
  lev.geom.h = lr.h;
  lev.refined = lr.refined;
  lev.evolved = lr.evolved;
  lev.patches = distribute(lr.evolved, nranks());
  for (auto& p : lev.patches) {
    p.ext = p.owned.grown(hierarchy_.spec.ghost_width);
    for (const auto& g : reg.groups()) p.groups.emplace(g.name, GroupData(g, p.owned.grown(g.ghost_width)));
  }
  return lev;
}

void AmrDriver::setup(flesh::Simulation& sim) {
  const auto& params = sim.params();
  exec_ = &sim.executor();
  const int g = unigrid::required_ghost_width(sim.registry(), params);
  const auto domain = unigrid::domain_from(params, g);
  base_.configure(domain, static_cast<int>(params.get_int("driver::nranks")),
                  unigrid::parse_strategy(params.get_string("driver::strategy")));
  hierarchy_ = build_hierarchy(domain, hierarchy_spec_from(sim.registry(), params));
  base_.allocate(sim.registry());
  build_fine_levels(sim);
}

void AmrDriver::build_fine_levels(flesh::Simulation& sim) {
  fine_.clear();
  for (int l = 1; l < static_cast<int>(hierarchy_.levels.size()); ++l) fine_.push_back(make_level(sim.registry(), l));
  levels_.clear();
  levels_.push_back(&base_.level());
  for (auto& f : fine_) levels_.push_back(&f);
  sibling_plans_.clear();
  ws_.assign(levels_.size(), mol::Workspace{});
}

Level& AmrDriver::level(int l) { return *levels_.at(static_cast<std::size_t>(l)); }
const Level& AmrDriver::level(int l) const { return *levels_.at(static_cast<std::size_t>(l)); }

void AmrDriver::sync(int l, std::string_view group) {
  if (l == 0) {
    base_.sync(group, *exec_);
    return;
  }
  Level& lev = level(l);
  if (lev.patches.empty()) return;
  const int gw = lev.patches.front().group(group).desc().ghost_width;
  if (gw == 0) return;
  auto key = std::pair{l, gw};
  auto it = sibling_plans_.find(key);
  if (it == sibling_plans_.end()) {
    std::vector<Patch> shapes;
    for (const auto& p : lev.patches) shapes.push_back({p.id, p.rank, p.owned, p.owned.grown(gw), {}});
    it = sibling_plans_.emplace(key, unigrid::build_sibling_plan(shapes)).first;
  }
  unigrid::execute(it->second, lev.patches, group, 0, base_.transport(), *exec_);
}

void AmrDriver::post_initial(flesh::Simulation& sim) {
  for (int l = num_levels() - 1; l >= 1; --l) restrict_level(sim, l);
  for (int l = 0; l < num_levels(); ++l) {
    for (const auto& g : sim.registry().groups()) sync(l, g.name);
    for (auto& p : level(l).patches)
      for (auto& [name, data] : p.groups) data.fill_past_levels();
  }
  if (num_levels() > 1 && sim.params().get_bool("amr::init_past_levels")) evolve_past_levels(sim);
}

void AmrDriver::evolve_past_levels(flesh::Simulation& sim) {
  const auto& reg = sim.registry();
  int ntl = 0;
  for (const auto& eg : reg.evolved()) {
    const int n = reg.find_group(eg.group)->time_levels;
    ntl = ntl == 0 ? n : std::min(ntl, n);
  }
  const double dt = timestep(sim);
  // coarse first, so each level's boundary is prolonged from accurate past data
  for (int l = 0; l + 1 < num_levels(); ++l) {
    Level& lev = level(l);
    const double dl = -dt / static_cast<double>(std::int64_t{1} << l);
    const double t_init = lev.time;
    for (int k = 1; k < ntl; ++k) {
      if (l > 0) fill_boundary(sim, l);
      for (auto& p : lev.patches)
        for (const auto& eg : reg.evolved()) p.group(eg.group).rotate();
      const double t0 = lev.time;
      lev.advance_time(t0 + dl, ntl);
      mol::integrate_level(sim, l, t0, dl, ws_[static_cast<std::size_t>(l)]);
    }
    for (auto& p : lev.patches)
      for (const auto& eg : reg.evolved()) p.group(eg.group).reverse_levels(ntl);
    std::reverse(lev.tl_times.begin(), lev.tl_times.end());
    lev.tl_times[0] = t_init;
    lev.time = t_init;
    lev.valid_levels = ntl;
  }
}

double AmrDriver::timestep(flesh::Simulation& sim) {
  double dt = unigrid::cfl_timestep(sim, 0);
  for (int l = 1; l < num_levels(); ++l)
    dt = std::min(dt, unigrid::cfl_timestep(sim, l) * static_cast<double>(std::int64_t{1} << l));
  return dt;
}

void AmrDriver::fill_boundary(flesh::Simulation& sim, int l) {
  Level& fine = level(l);
  const Level& coarse = level(l - 1);
  for (const auto& eg : sim.registry().evolved()) {
    const int gw = fine.patches.empty() ? 0 : fine.patches.front().group(eg.group).desc().ghost_width;
    prolong(coarse, fine, eg.group, hierarchy_.spec.interp, boundary_targets(fine, gw), *exec_);
    sync(l, eg.group);
  }
}

void AmrDriver::restrict_level(flesh::Simulation& sim, int l) {
  for (const auto& eg : sim.registry().evolved()) {
    restrict_to(level(l), level(l - 1), eg.group, *exec_);
    sync(l - 1, eg.group);
  }
}

void AmrDriver::evolve(flesh::Simulation& sim, int l, double dt) {
  std::function<void()> fill;
  if (l > 0) fill = [&] { fill_boundary(sim, l); };
  mol::step_level(sim, l, dt, ws_[static_cast<std::size_t>(l)], fill);
  if (l + 1 < num_levels()) {
    evolve(sim, l + 1, 0.5 * dt);
    evolve(sim, l + 1, 0.5 * dt);
    Level& f = level(l + 1);
    // two half steps need not add up to the coarse step bit for bit
    f.time = level(l).time;
    f.tl_times[0] = f.time;
    restrict_level(sim, l + 1);
  }
}

void AmrDriver::advance(flesh::Simulation& sim, double dt) { evolve(sim, 0, dt); }

double AmrDriver::reduce(std::string_view op, std::string_view variable) const {
  return unigrid::reduce(unigrid::parse_reduce_op(op), base_.level().patches, variable);
}

nlohmann::json AmrDriver::describe() const {
  nlohmann::json j;
  j["driver"] = name();
  j["nranks"] = nranks();
  j["topology"] = base_.decomposition().topology.dims;
  j["centres"] = format_centres(hierarchy_.spec.centres);
  j["buffer_width"] = hierarchy_.spec.buffer_width;
  auto levels = nlohmann::json::array();
  for (const Level* l : levels_) levels.push_back(unigrid::describe_level(*l));
  j["levels"] = levels;
  return j;
}

void AmrDriver::load_layout(flesh::Simulation& sim, const nlohmann::json& layout) {
  setup(sim);
  const auto centres = parse_centres(layout.at("centres").get<std::string>());
  if (format_centres(centres) != format_centres(hierarchy_.spec.centres)) {
    auto spec = hierarchy_.spec;
    spec.centres = centres;
    hierarchy_ = build_hierarchy(hierarchy_.domain, spec);
    build_fine_levels(sim);
  }
  const auto& levels = layout.at("levels");
  if (levels.size() != levels_.size()) throw std::runtime_error("checkpoint has a different number of levels");
  for (std::size_t l = 0; l < levels_.size(); ++l) unigrid::load_level_clock(*levels_[l], levels[l]);
}

void AmrDriver::regrid(flesh::Simulation& sim, const std::vector<Centre>& centres) {
  auto spec = hierarchy_.spec;
  spec.centres = centres;
  RefinementHierarchy next = build_hierarchy(hierarchy_.domain, spec);
  std::swap(hierarchy_, next);  // `next` now holds the old hierarchy
  const auto& reg = sim.registry();
  for (int l = 1; l < num_levels(); ++l) {
    const auto li = static_cast<std::size_t>(l);
    const auto& now = hierarchy_.levels[li];
    const auto& was = next.levels[li];
    if (now.refined == was.refined && now.evolved == was.evolved) continue;

    Level& old = fine_[li - 1];
    Level nl = make_level(reg, l);
    nl.time = old.time;
    nl.tl_times = old.tl_times;
    nl.steps = old.steps;
    nl.valid_levels = 1;
    std::vector<IndexBox> old_owned;
    for (const auto& p : old.patches) old_owned.push_back(p.owned);

    for (const auto& g : reg.groups()) {
      const bool evolved = std::any_of(reg.evolved().begin(), reg.evolved().end(),
                                       [&](const flesh::EvolvedGroup& e) { return e.group == g.name; });
      if (evolved) {
        std::vector<std::vector<IndexBox>> targets;
        for (const auto& p : nl.patches)
          targets.push_back(subtract(std::vector<IndexBox>{p.owned.grown(g.ghost_width)}, old_owned));
        prolong(level(l - 1), nl, g.name, hierarchy_.spec.interp, targets, *exec_);
      }
      for (auto& np : nl.patches) {
        GroupData& dst = np.group(g.name);
        for (const auto& op : old.patches) {
          const IndexBox cut = intersect(dst.box(), op.owned);
          if (cut.empty()) continue;
          const GroupData& src = op.group(g.name);
          for (int tl = 0; tl < g.time_levels; ++tl)
            for (int v = 0; v < g.num_vars(); ++v) {
              const Array3 a = src.var(v, tl), b = dst.var(v, tl);
              for (auto k = cut.lo[2]; k <= cut.hi[2]; ++k)
                for (auto j = cut.lo[1]; j <= cut.hi[1]; ++j)
                  for (auto i = cut.lo[0]; i <= cut.hi[0]; ++i) b(i, j, k) = a(i, j, k);
            }
        }
      }
    }
    old = std::move(nl);
    for (auto it = sibling_plans_.begin(); it != sibling_plans_.end();)
      it = it->first.first == l ? sibling_plans_.erase(it) : std::next(it);
    ws_[li].reset();
    for (const auto& g : reg.groups()) sync(l, g.name);
  }
}

}  // namespace tapestry::amr
