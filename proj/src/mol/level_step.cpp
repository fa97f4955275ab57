#include "tapestry/mol/level_step.hpp"

#include <algorithm>

namespace tapestry::mol {

IntegratorSpec integrator_from(const flesh::ParameterTable& params) {
  IntegratorSpec spec;
  if (params.has("mol::scheme")) spec.scheme = parse_scheme(params.get_string("mol::scheme"));
  if (params.has("mol::cfl")) spec.cfl = params.get_real("mol::cfl");
  spec.validate();
  return spec;
}

void rotate_level(flesh::Simulation& sim, int l, double new_time) {
  Level& lev = sim.driver().level(l);
  int max_tl = 1;
  for (const auto& g : sim.registry().groups()) max_tl = std::max(max_tl, g.time_levels);
  for (auto& p : lev.patches)
    for (auto& [name, data] : p.groups)
      if (data.time_levels() > 1) data.rotate();
  lev.advance_time(new_time, max_tl);
}

void integrate_level(flesh::Simulation& sim, int l, double t0, double dt, Workspace& ws) {
  auto& drv = sim.driver();
  const auto& evolved = sim.registry().evolved();
  Level& lev = drv.level(l);
  System sys;
  sys.exec = &sim.executor();
  for (auto& p : lev.patches)
    for (const auto& eg : evolved) {
      auto& data = p.group(eg.group);
      if (data.time_levels() < 2)
        throw std::logic_error("evolved group '" + eg.group + "' needs at least two time levels");
      for (int v = 0; v < data.num_vars(); ++v) {
        sys.state.emplace_back(data.raw(v, 0));
        sys.initial.emplace_back(data.raw(v, 1));
      }
    }

  sys.rhs = [&](std::span<const std::span<double>> rhs) {
    // offsets of each patch's first array inside the flat state list
    std::vector<std::size_t> first(lev.patches.size() + 1, 0);
    for (std::size_t p = 0; p < lev.patches.size(); ++p) {
      std::size_t n = 0;
      for (const auto& eg : evolved) n += static_cast<std::size_t>(lev.patches[p].group(eg.group).num_vars());
      first[p + 1] = first[p] + n;
    }
    sim.executor().parallel_for(static_cast<int>(lev.patches.size()), [&](int pi) {
      auto& patch = lev.patches[static_cast<std::size_t>(pi)];
      flesh::BlockContext ctx{patch, l, lev.geom, t0, sim.iteration(), sim.params()};
      std::size_t at = first[static_cast<std::size_t>(pi)];
      for (const auto& eg : evolved) {
        const auto& data = patch.group(eg.group);
        std::vector<Array3> views;
        for (int v = 0; v < data.num_vars(); ++v) views.emplace_back(rhs[at++].data(), data.box());
        eg.rhs(ctx, data, views);
      }
    });
  };
  sys.sync = [&] {
    for (const auto& eg : evolved) drv.sync(l, eg.group);
  };

  mol_step(tableau(integrator_from(sim.params()).scheme), sys, dt, ws);
}

void step_level(flesh::Simulation& sim, int l, double dt, Workspace& ws, const std::function<void()>& before_rotate) {
  sim.run_bin(flesh::Bin::prestep, l);
  if (before_rotate) before_rotate();
  Level& lev = sim.driver().level(l);
  const double t0 = lev.time;
  rotate_level(sim, l, t0 + dt);
  integrate_level(sim, l, t0, dt, ws);
  ++lev.steps;

  sim.run_bin(flesh::Bin::evol, l);
  sim.run_bin(flesh::Bin::poststep, l);
}

double max_speed(flesh::Simulation& sim, int l) {
  Level& lev = sim.driver().level(l);
  double s = 0.0;
  for (auto& patch : lev.patches) {
    flesh::BlockContext ctx{patch, l, lev.geom, lev.time, sim.iteration(), sim.params()};
    for (const auto& eg : sim.registry().evolved())
      if (eg.max_speed) s = std::max(s, eg.max_speed(ctx, patch.group(eg.group)));
  }
  return s;
}

}  // namespace tapestry::mol
