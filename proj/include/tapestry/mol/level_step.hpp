#pragma once

#include <functional>

#include "tapestry/flesh/simulation.hpp"
#include "tapestry/mol/integrator.hpp"

namespace tapestry::mol {

IntegratorSpec integrator_from(const flesh::ParameterTable& params);

/// Rotate the time levels of every multi-level group on level l and stamp
/// the level with its new time.
void rotate_level(flesh::Simulation& sim, int l, double new_time);

/// Integrator substeps only: evolved groups go from time level 1 (at t0) to
/// time level 0 (at t0 + dt). dt may be negative. No bins run.
void integrate_level(flesh::Simulation& sim, int l, double t0, double dt, Workspace& ws);

/// One integrator step of every evolved group on level l: PRESTEP, time
/// level rotation, the Runge-Kutta substeps (ghosts synced by the driver
/// after each), EVOL and POSTSTEP. `before_rotate` runs after PRESTEP and is
/// where a refining driver fills refinement boundaries.
void step_level(flesh::Simulation& sim, int l, double dt, Workspace& ws,
                const std::function<void()>& before_rotate = {});

/// Largest characteristic speed over all evolved groups on level l.
double max_speed(flesh::Simulation& sim, int l);

}  // namespace tapestry::mol
