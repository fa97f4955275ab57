#include "tapestry/app.hpp"

#include <regex>
#include <set>

#include "tapestry/amr/driver.hpp"
#include "tapestry/hydro/hydro.hpp"
#include "tapestry/io/output.hpp"
#include "tapestry/monitor/monitor.hpp"
#include "tapestry/unigrid/driver.hpp"
#include "tapestry/wave/wave.hpp"

namespace tapestry {

namespace {

flesh::ThornManifest sim_thorn() {
  using namespace flesh;
  ThornManifest m;
  m.name = "sim";
  m.parameters = {
      int_param("sim::iterations", 10, std::pair{0.0, 1e12}, true, "iterations to run"),
      real_param("sim::final_time", 0.0, std::pair{0.0, 1e300}, false, "stop at this time (0: no limit)"),
  };
  return m;
}

flesh::ThornManifest mol_thorn() {
  using namespace flesh;
  ThornManifest m;
  m.name = "mol";
  m.parameters = {
      keyword_param("mol::scheme", "rk4", {"euler", "rk2", "rk3", "rk4"}, false, "Runge-Kutta scheme"),
      real_param("mol::cfl", 0.25, std::pair{1e-6, 10.0}, false, "dt = cfl * h / speed"),
  };
  return m;
}

}  // namespace

flesh::Registry standard_registry(const std::vector<std::string>& physics) {
  flesh::Registry reg;
  reg.register_thorn(unigrid::grid_thorn());
  reg.register_thorn(unigrid::driver_thorn());
  reg.register_thorn(amr::amr_thorn());
  reg.register_thorn(mol_thorn());
  reg.register_thorn(io::io_thorn());
  reg.register_thorn(monitor::http_thorn());
  reg.register_thorn(sim_thorn());
  for (const auto& p : std::set<std::string>(physics.begin(), physics.end())) {
    if (p == "wave")
      reg.register_thorn(wave::wave_thorn());
    else if (p == "hydro")
      reg.register_thorn(hydro::hydro_thorn());
    else
      throw flesh::RegistrationError("unknown physics thorn '" + p + "'");
  }
  return reg;
}

flesh::ParameterTable make_parameters(const flesh::Registry& reg,
                                      const std::map<std::string, flesh::ParamValue>& overrides) {
  auto params = reg.default_parameters();
  for (const auto& [name, value] : overrides) {
    if (!params.has(name)) throw flesh::ParameterError("unknown parameter " + name);
    const auto& spec = params.spec(name);
    flesh::ParamValue v = value;
    if (spec.kind == flesh::ParamKind::real && std::holds_alternative<std::int64_t>(v))
      v = static_cast<double>(std::get<std::int64_t>(v));
    params.set(name, v);
  }
  return params;
}

std::unique_ptr<flesh::Simulation> make_simulation(const flesh::Registry& reg, const flesh::ParameterTable& params) {
  const auto& name = params.get_string("driver::name");
  std::unique_ptr<flesh::Driver> driver;
  if (name == "unigrid")
    driver = std::make_unique<unigrid::UnigridDriver>();
  else if (name == "amr")
    driver = std::make_unique<amr::AmrDriver>();
  else
    throw flesh::ParameterError("unknown driver " + name);
  return std::make_unique<flesh::Simulation>(reg, params, std::move(driver));
}

std::vector<std::string> physics_in(const std::string& parfile_text) {
  std::set<std::string> found;
  static const std::regex assignment(R"(^\s*(wave|hydro)::)");
  std::size_t start = 0;
  while (start <= parfile_text.size()) {
    auto end = parfile_text.find('\n', start);
    if (end == std::string::npos) end = parfile_text.size();
    std::smatch m;
    const std::string line = parfile_text.substr(start, end - start);
    if (std::regex_search(line, m, assignment)) found.insert(m[1]);
    start = end + 1;
  }
  return {found.begin(), found.end()};
}

}  // namespace tapestry
