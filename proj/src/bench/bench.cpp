#include "tapestry/bench/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "tapestry/app.hpp"
#include "tapestry/io/output.hpp"

namespace tapestry::bench {

void CostModelInput::validate() const {
  if (levels < 1) throw std::invalid_argument("levels must be at least 1");
  if (base < 1 || gridfns < 1 || bytes_per_value < 1) throw std::invalid_argument("grid sizes must be positive");
  if (!(flops > 0) || !(extra_flops >= 0) || !(steps > 0) || !(rate > 0))
    throw std::invalid_argument("flop counts, steps and rate must be positive");
}

CostEstimate estimate_cost(const CostModelInput& in) {
  in.validate();
  CostEstimate e;
  unsigned __int128 mem = static_cast<unsigned __int128>(in.levels);
  for (std::int64_t f : {in.base, in.base, in.base, in.gridfns, in.bytes_per_value}) mem *= static_cast<unsigned __int128>(f);
  if (mem > std::numeric_limits<std::uint64_t>::max()) throw std::overflow_error("memory estimate exceeds 64 bits");
  e.memory_bytes = static_cast<std::uint64_t>(mem);

  const long double points = static_cast<long double>(in.base) * in.base * in.base;
  const long double per_step = points * (static_cast<long double>(in.flops) + in.extra_flops);
  for (int l = 0; l < in.levels; ++l) {
    const long double steps = static_cast<long double>(in.steps) * std::ldexp(1.0L, l);
    e.level_steps.push_back(steps);
    e.total_flops += per_step * steps;
  }
  e.runtime_seconds = e.total_flops / static_cast<long double>(in.rate);
  return e;
}

double ghost_overhead(std::int64_t owned, std::int64_t ghost) {
  if (owned < 1 || ghost < 0) throw std::invalid_argument("ghost_overhead needs owned >= 1 and ghost >= 0");
  const double o = static_cast<double>(owned), t = static_cast<double>(owned + 2 * ghost);
  return (t * t * t - o * o * o) / (o * o * o);
}

KernelSpec KernelSpec::defaults(const std::string& name) {
  KernelSpec k;
  k.name = name;
  if (name == "io-checkpoint") {
    k.memory_per_rank = 16 << 20;
    k.steps = 1;
  } else if (name == "amr8lev-wave") {
    k.steps = 2;
  } else if (name == "amr-hydro") {
    k.steps = 5;
  }
  return k;
}

namespace {

using Clock = std::chrono::steady_clock;

/// Most cubic factorization of n (largest factor first along x).
std::array<int, 3> cube_dims(int n) {
  std::array<int, 3> best{n, 1, 1};
  int best_spread = n;
  for (int a = 1; a <= n; ++a) {
    if (n % a) continue;
    for (int b = 1; b <= n / a; ++b) {
      if ((n / a) % b) continue;
      const int c = n / a / b;
      if (a < b || b < c) continue;
      if (a - c < best_spread) {
        best_spread = a - c;
        best = {a, b, c};
      }
    }
  }
  return best;
}

struct Built {
  std::unique_ptr<flesh::Simulation> sim;
  std::int64_t points = 0;       // evolved points over all levels
  std::int64_t level_updates = 0;  // point updates per base step
};

std::int64_t owned_points(const Level& lev) {
  std::int64_t n = 0;
  for (const auto& p : lev.patches) n += p.owned.volume();
  return n;
}

Built build(const KernelSpec& k, int ranks) {
  const bool hydro = k.name == "amr-hydro";
  const int levels = k.name == "amr8lev-wave" ? 8 : hydro ? 2 : 1;
  auto reg = standard_registry({hydro ? "hydro" : "wave"});
  // storage per point: every stored time level (the checkpoint payload), plus
  // four integrator stage arrays per evolved variable when evolving
  std::int64_t bytes_per_point = 0;
  for (const auto& g : reg.groups()) bytes_per_point += std::int64_t{g.num_vars()} * g.time_levels * 8;
  if (k.name != "io-checkpoint") {
    for (const auto& e : reg.evolved()) bytes_per_point += std::int64_t{reg.find_group(e.group)->num_vars()} * 4 * 8;
    bytes_per_point *= levels;
  }
  const auto side = std::max<std::int64_t>(
      8, static_cast<std::int64_t>(std::cbrt(static_cast<double>(k.memory_per_rank) / bytes_per_point)));
  const auto dims = cube_dims(ranks);

  std::map<std::string, flesh::ParamValue> o{
      {"grid::nx", std::int64_t{side * dims[0]}},
      {"grid::ny", std::int64_t{side * dims[1]}},
      {"grid::nz", std::int64_t{side * dims[2]}},
      {"grid::h", 1.0 / static_cast<double>(side * dims[0])},
      {"grid::boundary", std::string("periodic")},
      {"driver::nranks", std::int64_t{ranks}},
      {"driver::workers", std::int64_t{k.parallel ? ranks : 1}},
      {"driver::name", std::string(k.name == "unigrid-wave-pugh" || k.name == "io-checkpoint" ? "unigrid" : "amr")},
  };
  if (hydro) {
    o["hydro::initial_data"] = std::string("smooth");
    o["mol::scheme"] = std::string("rk3");
  } else {
    o["wave::initial_data"] = std::string("plane");
  }
  if (levels > 1) {
    // one centre per rank block keeps the refined work per rank constant
    const double h = 1.0 / static_cast<double>(side * dims[0]);
    std::ostringstream c;
    c.precision(17);
    for (std::int64_t bz = 0; bz < dims[2]; ++bz)
      for (std::int64_t by = 0; by < dims[1]; ++by)
        for (std::int64_t bx = 0; bx < dims[0]; ++bx) {
          const std::int64_t b[3] = {bx, by, bz};
          if (bx + by + bz > 0) c << ';';
          for (int d = 0; d < 3; ++d)
            c << (d ? "," : "") << h * (static_cast<double>(side * b[d]) + 0.5 * static_cast<double>(side - 1));
          c << ':';
          for (int l = 1; l < levels; ++l) c << (l > 1 ? "," : "") << side / 2;
        }
    o["amr::nlevels"] = std::int64_t{levels};
    o["amr::buffer_factor"] = std::int64_t{0};
    o["amr::centres"] = c.str();
  }
  Built b;
  b.sim = make_simulation(reg, make_parameters(reg, o));
  b.sim->setup();
  b.sim->initialize();
  auto& d = b.sim->driver();
  for (int l = 0; l < d.num_levels(); ++l) {
    b.points += owned_points(d.level(l));
    b.level_updates += owned_points(d.level(l)) << l;
  }
  return b;
}

double first_norm(const flesh::Simulation& sim) {
  const auto& reg = sim.registry();
  const auto* g = reg.find_group(reg.evolved().front().group);
  return sim.driver().reduce("l2", io::dataset_name(g->name, g->variables.front()));
}

std::vector<WeakScalingResult> run_io(const KernelSpec& k, const std::vector<int>& ranks) {
  std::vector<WeakScalingResult> out;
  const std::vector<std::string> strategies{"single-collector", "every-nth:4", "per-rank"};
  std::map<std::string, double> first;
  for (int r : ranks) {
    auto b = build(k, r);
    for (const auto& s : strategies) {
      const auto dir = k.scratch / ("io-" + std::to_string(r) + "-" + s.substr(0, s.find(':')));
      std::filesystem::remove_all(dir);
      const auto t0 = Clock::now();
      const auto files = io::write_vars(*b.sim, {}, io::parse_strategy(s), dir);
      const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
      std::uintmax_t bytes = 0;
      for (const auto& f : files) bytes += std::filesystem::file_size(f);
      std::filesystem::remove_all(dir);
      WeakScalingResult res;
      res.kernel = k.name + "[" + s + "]";
      res.ranks = r;
      res.seconds = secs;
      res.points_per_rank = b.points / r;
      res.updates_per_second = static_cast<double>(b.points) / secs;
      res.mb_per_second = static_cast<double>(bytes) / 1e6 / secs;
      res.norm = first_norm(*b.sim);
      if (!first.count(s)) first[s] = secs;
      res.efficiency = first[s] / secs;
      out.push_back(res);
    }
    const auto dir = k.scratch / ("checkpoint-" + std::to_string(r));
    std::filesystem::remove_all(dir);
    const auto t0 = Clock::now();
    io::checkpoint_write(*b.sim, dir);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::uintmax_t bytes = 0;
    for (const auto& f : std::filesystem::directory_iterator(dir)) bytes += f.file_size();
    std::filesystem::remove_all(dir);
    WeakScalingResult res;
    res.kernel = k.name + "[checkpoint]";
    res.ranks = r;
    res.seconds = secs;
    res.points_per_rank = b.points / r;
    res.updates_per_second = static_cast<double>(b.points) / secs;
    res.mb_per_second = static_cast<double>(bytes) / 1e6 / secs;
    res.norm = first_norm(*b.sim);
    if (!first.count("checkpoint")) first["checkpoint"] = secs;
    res.efficiency = first["checkpoint"] / secs;
    out.push_back(res);
  }
  std::error_code ec;
  std::filesystem::remove(k.scratch, ec);
  return out;
}

}  // namespace

std::vector<WeakScalingResult> run_weak_scaling(const KernelSpec& k, const std::vector<int>& ranks) {
  if (std::find(kernel_names().begin(), kernel_names().end(), k.name) == kernel_names().end())
    throw std::invalid_argument("unknown kernel " + k.name);
  if (ranks.empty()) return {};
  if (k.name == "io-checkpoint") return run_io(k, ranks);
  std::vector<WeakScalingResult> out;
  for (int r : ranks) {
    if (r < 1) throw std::invalid_argument("rank counts must be positive");
    auto b = build(k, r);
    const auto t0 = Clock::now();
    b.sim->run_until(b.sim->iteration() + k.steps);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    WeakScalingResult res;
    res.kernel = k.name;
    res.ranks = r;
    res.seconds = secs;
    res.points_per_rank = b.points / r;
    res.updates_per_second = static_cast<double>(b.level_updates) * k.steps / secs;
    res.norm = first_norm(*b.sim);
    res.efficiency = out.empty() ? 1.0 : out.front().seconds / secs;
    b.sim->shutdown();
    out.push_back(res);
  }
  return out;
}

namespace {

const char* columns = "kernel,ranks,seconds,updates_per_second,efficiency,points_per_rank,norm,mb_per_second";

nlohmann::json row(const WeakScalingResult& r) {
  return {{"kernel", r.kernel},
          {"ranks", r.ranks},
          {"seconds", r.seconds},
          {"updates_per_second", r.updates_per_second},
          {"efficiency", r.efficiency},
          {"points_per_rank", r.points_per_rank},
          {"norm", r.norm},
          {"mb_per_second", r.mb_per_second}};
}

}  // namespace

std::string to_csv(const std::vector<WeakScalingResult>& results) {
  std::ostringstream os;
  os.precision(17);
  os << columns << '\n';
  for (const auto& r : results)
    os << r.kernel << ',' << r.ranks << ',' << r.seconds << ',' << r.updates_per_second << ',' << r.efficiency << ','
       << r.points_per_rank << ',' << r.norm << ',' << r.mb_per_second << '\n';
  return os.str();
}

std::string to_json(const std::vector<WeakScalingResult>& results) {
  auto a = nlohmann::json::array();
  for (const auto& r : results) a.push_back(row(r));
  return a.dump(1);
}

std::vector<WeakScalingResult> results_from_json(const std::string& text) {
  std::vector<WeakScalingResult> out;
  for (const auto& j : nlohmann::json::parse(text)) {
    WeakScalingResult r;
    r.kernel = j.at("kernel").get<std::string>();
    r.ranks = j.at("ranks").get<int>();
    r.seconds = j.at("seconds").get<double>();
    r.updates_per_second = j.at("updates_per_second").get<double>();
    r.efficiency = j.at("efficiency").get<double>();
    r.points_per_rank = j.at("points_per_rank").get<std::int64_t>();
    r.norm = j.at("norm").get<double>();
    r.mb_per_second = j.at("mb_per_second").get<double>();
    out.push_back(r);
  }
  return out;
}

void emit_report(const std::vector<WeakScalingResult>& results, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write report " + path.string());
  out << (path.extension() == ".json" ? to_json(results) + "\n" : to_csv(results));
  if (!out) throw std::runtime_error("cannot write report " + path.string());
}

}  // namespace tapestry::bench
