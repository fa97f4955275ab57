#pragma once

#include <cstring>
#include <map>
#include <memory>
#include <string>
#include <tuple>
#include <vector>

#include "tapestry/app.hpp"

namespace tapestry::testing {

using Overrides = std::map<std::string, flesh::ParamValue>;

inline flesh::ParamValue I(std::int64_t v) { return v; }
inline flesh::ParamValue R(double v) { return v; }
inline flesh::ParamValue S(const char* v) { return std::string(v); }

/// Configured, set up and initialized simulation.
inline std::unique_ptr<flesh::Simulation> build(const std::vector<std::string>& physics, const Overrides& o,
                                                bool init = true) {
  auto reg = standard_registry(physics);
  auto sim = make_simulation(reg, make_parameters(reg, o));
  sim->setup();
  if (init) sim->initialize();
  return sim;
}

inline Overrides wave_cube(std::int64_t n, int ranks, const char* driver = "unigrid") {
  return {{"grid::nx", I(n)},
          {"grid::ny", I(n)},
          {"grid::nz", I(n)},
          {"grid::h", R(1.0 / static_cast<double>(n))},
          {"wave::initial_data", S("plane")},
          {"wave::kx", I(1)},
          {"wave::ky", I(1)},
          {"wave::kz", I(1)},
          {"driver::nranks", I(ranks)},
          {"driver::name", S(driver)}};
}

/// Owned values of every variable on every level (current time level unless
/// `all_levels`), keyed "level/group/var[/tl]" and listed in global (z, y, x)
/// order, so the result does not depend on the decomposition.
inline std::map<std::string, std::vector<double>> owned_data(const flesh::Simulation& sim, bool all_levels = false) {
  std::map<std::string, std::map<std::tuple<std::int64_t, std::int64_t, std::int64_t>, double>> sorted;
  const auto& d = sim.driver();
  for (int l = 0; l < d.num_levels(); ++l)
    for (const auto& p : d.level(l).patches)
      for (const auto& [gname, g] : p.groups)
        for (int tl = 0; tl < (all_levels ? g.time_levels() : 1); ++tl)
          for (int v = 0; v < g.num_vars(); ++v) {
            auto& m = sorted[std::to_string(l) + "/" + gname + "/" + g.desc().variables[static_cast<std::size_t>(v)] +
                             (all_levels ? "/" + std::to_string(tl) : "")];
            const Array3 a = g.var(v, tl);
            const IndexBox& o = p.owned;
            for (auto k = o.lo[2]; k <= o.hi[2]; ++k)
              for (auto j = o.lo[1]; j <= o.hi[1]; ++j)
                for (auto i = o.lo[0]; i <= o.hi[0]; ++i) m[{k, j, i}] = a(i, j, k);
          }
  std::map<std::string, std::vector<double>> out;
  for (auto& [key, m] : sorted) {
    auto& v = out[key];
    for (const auto& [idx, x] : m) v.push_back(x);
  }
  return out;
}

inline bool bit_identical(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

inline bool bit_identical(const std::map<std::string, std::vector<double>>& a,
                          const std::map<std::string, std::vector<double>>& b) {
  if (a.size() != b.size()) return false;
  for (const auto& [k, v] : a) {
    const auto it = b.find(k);
    if (it == b.end() || !bit_identical(v, it->second)) return false;
  }
  return true;
}

}  // namespace tapestry::testing
