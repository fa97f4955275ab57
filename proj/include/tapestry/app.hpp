#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tapestry/flesh/simulation.hpp"

namespace tapestry {

/// Framework thorns (grid, driver, amr, mol, io, http, sim) plus the named
/// physics thorns ("wave", "hydro").
flesh::Registry standard_registry(const std::vector<std::string>& physics);

/// Defaults of every registered parameter overridden by `overrides`.
flesh::ParameterTable make_parameters(const flesh::Registry& reg, const std::map<std::string, flesh::ParamValue>& overrides);

/// Simulation with the driver named by driver::name.
std::unique_ptr<flesh::Simulation> make_simulation(const flesh::Registry& reg, const flesh::ParameterTable& params);

/// Physics thorns implied by the parameter names used in a parameter file.
std::vector<std::string> physics_in(const std::string& parfile_text);

}  // namespace tapestry
