#include "tapestry/unigrid/driver.hpp"

#include <algorithm>

#include "tapestry/flesh/simulation.hpp"
#include "tapestry/mol/level_step.hpp"
#include "tapestry/unigrid/reduction.hpp"

namespace tapestry::unigrid {

using flesh::int_param;
using flesh::keyword_param;
using flesh::real_param;

flesh::ThornManifest grid_thorn() {
  flesh::ThornManifest m;
  m.name = "grid";
  m.parameters = {
      int_param("grid::nx", 32, std::pair{1.0, 1e6}, false, "points in x"),
      int_param("grid::ny", 32, std::pair{1.0, 1e6}, false, "points in y"),
      int_param("grid::nz", 32, std::pair{1.0, 1e6}, false, "points in z"),
      real_param("grid::xmin", 0.0, {}, false, "x coordinate of point 0"),
      real_param("grid::ymin", 0.0, {}, false, "y coordinate of point 0"),
      real_param("grid::zmin", 0.0, {}, false, "z coordinate of point 0"),
      real_param("grid::h", 1.0 / 32.0, std::pair{1e-300, 1e300}, false, "base grid spacing"),
      keyword_param("grid::boundary", "periodic", {"periodic", "outer-copy"}),
  };
  return m;
}

flesh::ThornManifest driver_thorn() {
  flesh::ThornManifest m;
  m.name = "driver";
  m.parameters = {
      keyword_param("driver::name", "unigrid", {"unigrid", "amr"}),
      int_param("driver::nranks", 1, std::pair{1.0, 65536.0}, false, "simulated ranks"),
      keyword_param("driver::strategy", "directional", {"directional", "neighbors"}),
      int_param("driver::ghost_width", 3, std::pair{0.0, 16.0}, false, "minimum ghost width"),
      int_param("driver::workers", 1, std::pair{1.0, 1024.0}, false, "worker threads"),
  };
  return m;
}

DomainSpec domain_from(const flesh::ParameterTable& params, int ghost_width) {
  DomainSpec d;
  d.points = {params.get_int("grid::nx"), params.get_int("grid::ny"), params.get_int("grid::nz")};
  d.origin = {params.get_real("grid::xmin"), params.get_real("grid::ymin"), params.get_real("grid::zmin")};
  d.h = params.get_real("grid::h");
  d.boundary = parse_boundary(params.get_string("grid::boundary"));
  d.ghost_width = ghost_width;
  return d;
}

int required_ghost_width(const flesh::Registry& reg, const flesh::ParameterTable& params) {
  int g = static_cast<int>(params.get_int("driver::ghost_width"));
  for (const auto& grp : reg.groups()) g = std::max(g, grp.ghost_width);
  return g;
}

void BaseGrid::configure(const DomainSpec& domain, int nranks, ExchangeStrategy strategy) {
  domain.validate();
  domain_ = domain;
  dec_ = decompose(domain, nranks);
  strategy_ = strategy;
  plans_.clear();
}

void BaseGrid::set_strategy(ExchangeStrategy s) {
  if (s != strategy_) plans_.clear();
  strategy_ = s;
}

void BaseGrid::allocate(const flesh::Registry& reg) {
  level_ = Level{};
  level_.geom.origin = domain_.origin;
  level_.geom.h = domain_.h;
  level_.refined = {domain_.box()};
  level_.evolved = {domain_.box()};
  for (const Block& b : dec_.blocks) {
    Patch p;
    p.id = b.rank;
    p.rank = b.rank;
    p.owned = b.owned;
    p.ext = b.ext;
    for (const auto& g : reg.groups()) p.groups.emplace(g.name, GroupData(g, b.owned.grown(g.ghost_width)));
    level_.patches.push_back(std::move(p));
  }
}

const HaloPlan& BaseGrid::plan(int ghost_width) {
  auto it = plans_.find(ghost_width);
  if (it != plans_.end()) return it->second;
  DomainSpec d = domain_;
  d.ghost_width = ghost_width;
  return plans_.emplace(ghost_width, build_plan(strategy_, d, dec_)).first->second;
}

void BaseGrid::sync(std::string_view group, const comm::Executor& exec, int tl) {
  if (level_.patches.empty()) return;
  const int gw = level_.patches.front().group(group).desc().ghost_width;
  if (gw == 0) return;
  execute(plan(gw), level_.patches, group, tl, transport_, exec);
}

nlohmann::json describe_level(const Level& lev) {
  auto boxes = [](const std::vector<IndexBox>& v) {
    auto a = nlohmann::json::array();
    for (const auto& b : v) a.push_back({{"lo", b.lo}, {"hi", b.hi}});
    return a;
  };
  nlohmann::json j;
  j["index"] = lev.index;
  j["h"] = lev.geom.h;
  j["origin"] = lev.geom.origin;
  j["time"] = lev.time;
  j["tl_times"] = lev.tl_times;
  j["valid_levels"] = lev.valid_levels;
  j["steps"] = lev.steps;
  j["refined"] = boxes(lev.refined);
  j["evolved"] = boxes(lev.evolved);
  auto patches = nlohmann::json::array();
  for (const auto& p : lev.patches)
    patches.push_back({{"id", p.id}, {"rank", p.rank}, {"owned", {{"lo", p.owned.lo}, {"hi", p.owned.hi}}}});
  j["patches"] = patches;
  return j;
}

void load_level_clock(Level& lev, const nlohmann::json& j) {
  lev.time = j.at("time").get<double>();
  lev.tl_times = j.at("tl_times").get<std::vector<double>>();
  lev.valid_levels = j.at("valid_levels").get<int>();
  lev.steps = j.at("steps").get<std::int64_t>();
}

double cfl_timestep(flesh::Simulation& sim, int l) {
  const auto spec = mol::integrator_from(sim.params());
  double s = mol::max_speed(sim, l);
  if (!(s > 0.0)) s = 1.0;
  return spec.timestep(sim.driver().level(l).geom.h, s);
}

void UnigridDriver::setup(flesh::Simulation& sim) {
  const auto& params = sim.params();
  exec_ = &sim.executor();
  grid_.configure(domain_from(params, required_ghost_width(sim.registry(), params)),
                  static_cast<int>(params.get_int("driver::nranks")), parse_strategy(params.get_string("driver::strategy")));
  grid_.allocate(sim.registry());
  ws_.reset();
}

Level& UnigridDriver::level(int l) {
  if (l != 0) throw std::out_of_range("unigrid driver has a single level");
  return grid_.level();
}

const Level& UnigridDriver::level(int l) const {
  if (l != 0) throw std::out_of_range("unigrid driver has a single level");
  return grid_.level();
}

void UnigridDriver::sync(int l, std::string_view group) {
  level(l);
  grid_.sync(group, *exec_);
}

void UnigridDriver::post_initial(flesh::Simulation& sim) {
  for (const auto& g : sim.registry().groups()) grid_.sync(g.name, *exec_);
  for (auto& p : grid_.level().patches)
    for (auto& [name, data] : p.groups) data.fill_past_levels();
}

double UnigridDriver::timestep(flesh::Simulation& sim) { return cfl_timestep(sim, 0); }

void UnigridDriver::advance(flesh::Simulation& sim, double dt) { mol::step_level(sim, 0, dt, ws_); }

double UnigridDriver::reduce(std::string_view op, std::string_view variable) const {
  return unigrid::reduce(parse_reduce_op(op), grid_.level().patches, variable);
}

nlohmann::json UnigridDriver::describe() const {
  nlohmann::json j;
  j["driver"] = name();
  j["nranks"] = nranks();
  j["topology"] = grid_.decomposition().topology.dims;
  j["levels"] = nlohmann::json::array({describe_level(grid_.level())});
  return j;
}

void UnigridDriver::load_layout(flesh::Simulation& sim, const nlohmann::json& layout) {
  setup(sim);
  load_level_clock(grid_.level(), layout.at("levels").at(0));
}

}  // namespace tapestry::unigrid
