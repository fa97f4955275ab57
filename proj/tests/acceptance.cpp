#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <thread>
#include <unistd.h>

#include "httplib.h"
#include "support/exchange_cases.hpp"
#include "support/riemann.hpp"
#include "support/scenarios.hpp"
#include "tapestry/amr/driver.hpp"
#include "tapestry/amr/transfer.hpp"
#include "tapestry/bench/bench.hpp"
#include "tapestry/io/output.hpp"
#include "tapestry/monitor/monitor.hpp"
#include "tapestry/wave/wave.hpp"

using namespace tapestry;
using namespace tapestry::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const char* name, const std::function<Outcome()>& check) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome r;
  try {
    r = check();
  } catch (const std::exception& e) {
    r = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!r.pass) ++failures;
  std::printf("%s %s: %s (%.1f s)\n", r.pass ? "PASS" : "FAIL", name, r.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("tapestry-acceptance-" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Outcome cost_model() {
  bench::CostModelInput in;
  in.levels = 16;
  in.base = 1024;
  in.gridfns = 512;
  in.flops = 10000;
  in.extra_flops = 22000;
  in.steps = 6000;
  in.rate = 2e15;
  const auto e = bench::estimate_cost(in);
  const std::uint64_t tib64 = 64ull << 40;
  const double pf = e.petaflops(), days = e.runtime_days();
  const long double finest = e.level_steps.back();
  const bool ok = e.memory_bytes == tib64 && std::abs(pf - 1.3e7) <= 0.05 * 1.3e7 && std::abs(days - 75.0) <= 7.5 &&
                  finest == 32768.0L * 6000.0L;
  return {ok, fmt("memory %llu bytes, %.4e PF, %.2f days, finest steps %.0Lf",
                  static_cast<unsigned long long>(e.memory_bytes), pf, days, finest)};
}

Outcome ghost_overhead() {
  const double a = bench::ghost_overhead(10, 3), b = bench::ghost_overhead(20, 3);
  const bool ok = std::abs(a - 3.096) < 1e-12 && std::abs(b - 1.197) < 1e-12;
  return {ok, fmt("o=10 g=3: %.6f, o=20 g=3: %.6f", a, b)};
}

Outcome driver_equivalence() {
  std::string detail;
  bool ok = true;
  for (int ranks : {1, 2, 4, 8}) {
    std::map<std::string, std::vector<double>> data[2];
    int n = 0;
    for (const char* driver : {"unigrid", "amr"}) {
      auto o = wave_cube(24, ranks, driver);
      o["amr::nlevels"] = I(1);
      auto sim = build({"wave"}, o);
      sim->run_until(64);
      data[n++] = owned_data(*sim, true);
    }
    const bool same = bit_identical(data[0], data[1]);
    ok = ok && same;
    detail += fmt("%d ranks %s; ", ranks, same ? "identical" : "DIFFER");
  }
  return {ok, detail + "64 steps on 24^3"};
}

Outcome exchange_equivalence() {
  int agree = 0, oracle = 0;
  std::string first_bad;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const auto c = random_case(seed);
    const auto dec = unigrid::decompose(c.domain, c.nranks);
    auto a = random_patches(c, dec);
    auto b = a;
    comm::Transport t;
    const comm::Executor exec;
    unigrid::exchange_directional(c.domain, dec, a, "test::fields", t, exec);
    unigrid::exchange_neighbors(c.domain, dec, b, "test::fields", t, exec);
    if (same_ext_data(a, b)) ++agree;
    else if (first_bad.empty()) first_bad = "strategies differ at seed " + std::to_string(seed);
    std::string why;
    if (ghosts_match_oracle(c, dec, a, &why)) ++oracle;
    else if (first_bad.empty()) first_bad = "oracle mismatch " + why;
  }
  return {agree == 200 && oracle == 200,
          fmt("%d/200 bit-identical, %d/200 match the global oracle%s", agree, oracle,
              first_bad.empty() ? "" : ("; " + first_bad).c_str())};
}

double plane_wave_error(std::int64_t n, double t_final) {
  auto o = wave_cube(n, 1);
  o["sim::iterations"] = I(1000000);
  o["sim::final_time"] = R(t_final);
  auto sim = build({"wave"}, o);
  sim->run_until(1000000);
  const auto wp = wave::WaveParams::from(sim->params());
  const auto& lev = sim->driver().level(0);
  double sum = 0.0, count = 0.0;
  for (const auto& p : lev.patches) {
    const Array3 phi = p.group(wave::group_name).var(0);
    const IndexBox& b = p.owned;
    for (auto k = b.lo[2]; k <= b.hi[2]; ++k)
      for (auto j = b.lo[1]; j <= b.hi[1]; ++j)
        for (auto i = b.lo[0]; i <= b.hi[0]; ++i) {
          const double exact =
              wave::plane_wave(wp, {lev.geom.x(0, i), lev.geom.x(1, j), lev.geom.x(2, k)}, sim->time())[0];
          const double e = phi(i, j, k) - exact;
          sum += e * e;
          count += 1.0;
        }
  }
  return std::sqrt(sum / count);
}

Outcome convergence() {
  const double e32 = plane_wave_error(32, 0.5), e64 = plane_wave_error(64, 0.5);
  const double order = std::log2(e32 / e64);
  return {order >= 3.8, fmt("L2 error %.3e (32^3), %.3e (64^3), order %.3f", e32, e64, order)};
}

double poly5(double x, double y, double z) {
  return 0.7 + x - 2.0 * y * y + 0.5 * x * x * x * z + std::pow(x, 5) - 1.3 * y * y * std::pow(z, 3) +
         0.25 * std::pow(z, 5) * std::pow(y, 4) * x;
}

Outcome amr_subcycling() {
  auto o = wave_cube(32, 1, "amr");
  o["amr::nlevels"] = I(4);
  o["amr::centres"] = S("0.5,0.5,0.5:16,12,10");
  o["amr::buffer_factor"] = I(0);
  auto sim = build({"wave"}, o);
  sim->step();
  bool steps_ok = sim->driver().num_levels() == 4;
  std::string steps;
  for (int l = 0; l < sim->driver().num_levels(); ++l) {
    const auto s = sim->driver().level(l).steps;
    steps_ok = steps_ok && s == (std::int64_t{1} << l);
    steps += fmt("%lld ", static_cast<long long>(s));
  }

  const VariableGroup group{"test::poly", {"u"}, 0, 1};
  Level coarse, fine;
  coarse.geom.h = 0.1;
  fine.index = 1;
  fine.geom.h = 0.05;
  Patch cp;
  cp.owned = cp.ext = IndexBox{{0, 0, 0}, {20, 20, 20}};
  cp.groups.emplace(group.name, GroupData(group, cp.owned));
  const Array3 cu = cp.group(group.name).var(0);
  for (auto k = 0; k <= 20; ++k)
    for (auto j = 0; j <= 20; ++j)
      for (auto i = 0; i <= 20; ++i) cu(i, j, k) = poly5(coarse.geom.x(0, i), coarse.geom.x(1, j), coarse.geom.x(2, k));
  coarse.patches.push_back(std::move(cp));
  Patch fp;
  fp.owned = fp.ext = IndexBox{{10, 10, 10}, {30, 30, 30}};
  fp.groups.emplace(group.name, GroupData(group, fp.owned));
  fine.patches.push_back(std::move(fp));
  amr::prolong(coarse, fine, group.name, amr::InterpSpec{5, 0}, {{fine.patches[0].owned}}, comm::Executor{});

  double max_exact = 0.0, err_all = 0.0, err_coincident = 0.0;
  const Array3 fu = fine.patches[0].group(group.name).var(0);
  for (auto k = 10; k <= 30; ++k)
    for (auto j = 10; j <= 30; ++j)
      for (auto i = 10; i <= 30; ++i) {
        const double exact = poly5(fine.geom.x(0, i), fine.geom.x(1, j), fine.geom.x(2, k));
        const double e = std::abs(fu(i, j, k) - exact);
        max_exact = std::max(max_exact, std::abs(exact));
        err_all = std::max(err_all, e);
        if (i % 2 == 0 && j % 2 == 0 && k % 2 == 0) err_coincident = std::max(err_coincident, e);
      }
  err_all /= max_exact;
  err_coincident /= max_exact;
  const bool ok = steps_ok && err_all <= 1e-10 && err_coincident <= 1e-12;
  return {ok, fmt("level steps %sprolongation rel err %.2e, coincident %.2e", steps.c_str(), err_all, err_coincident)};
}

Outcome hydro() {
  const int n = 400;
  const double h = 1.0 / n;
  auto sod = build({"hydro"}, {{"grid::nx", I(n)},
                               {"grid::ny", I(7)},
                               {"grid::nz", I(7)},
                               {"grid::h", R(h)},
                               {"grid::xmin", R(h / 2)},
                               {"grid::ymin", R(h / 2)},
                               {"grid::zmin", R(h / 2)},
                               {"grid::boundary", S("outer-copy")},
                               {"hydro::initial_data", S("sod")},
                               {"mol::scheme", S("rk3")},
                               {"sim::final_time", R(0.2)},
                               {"sim::iterations", I(1000000)}});
  sod->run_until(1000000);
  const ExactRiemann exact({1.0, 0.0, 1.0}, {0.125, 0.0, 0.1}, 1.4);
  const auto data = owned_data(*sod);
  const auto& D = data.at("0/hydro::conserved/D");
  double linf = 0.0, worst_x = 0.0;
  for (int k = 0; k < 7; ++k)
    for (int j = 0; j < 7; ++j)
      for (int i = 0; i < n; ++i) {
        const double x = (i + 0.5) * h;
        const double e = std::abs(D[static_cast<std::size_t>((k * 7 + j) * n + i)] -
                                  exact.sample((x - 0.5) / sod->time()).rho);
        if (e > linf) {
          linf = e;
          worst_x = x;
        }
      }

  auto smooth = build({"hydro"}, {{"grid::nx", I(16)},
                                  {"grid::ny", I(16)},
                                  {"grid::nz", I(16)},
                                  {"grid::h", R(1.0 / 16)},
                                  {"hydro::initial_data", S("smooth")},
                                  {"mol::scheme", S("rk3")},
                                  {"driver::nranks", I(2)}});
  auto sums = [&] {
    std::map<std::string, std::pair<double, double>> s;
    for (const auto& [k, v] : owned_data(*smooth)) {
      auto& [sum, abs_sum] = s[k];
      for (double x : v) {
        sum += x;
        abs_sum += std::abs(x);
      }
    }
    return s;
  };
  const auto before = sums();
  smooth->run_until(100);
  const auto after = sums();
  double drift = 0.0;
  for (const auto& [k, v] : before) drift = std::max(drift, std::abs(after.at(k).first - v.first) / v.second);

  const bool ok = linf < 0.02 && drift < 1e-11 && smooth->iteration() == 100;
  return {ok, fmt("Sod t=%.3f Linf(rho) %.4f at x=%.4f (limit 0.02); periodic drift %.2e over 100 steps (limit 1e-11)",
                  sod->time(), linf, worst_x, drift)};
}

std::multiset<std::string> dataset_multiset(const std::vector<fs::path>& files) {
  std::multiset<std::string> out;
  for (const auto& f : files)
    for (const auto& d : io::read_container(f))
      out.insert(d.header.identity().dump() +
                 std::string(reinterpret_cast<const char*>(d.values.data()), d.values.size() * sizeof(double)));
  return out;
}

Outcome checkpoint_restart() {
  std::string detail;
  bool ok = true;
  for (const char* driver : {"unigrid", "amr"}) {
    auto o = wave_cube(16, 4, driver);
    if (std::string(driver) == "amr") {
      o["amr::nlevels"] = I(3);
      o["amr::centres"] = S("0.5,0.5,0.5:6,2");
      o["amr::buffer_factor"] = I(0);
    }
    const auto dir = scratch(std::string("checkpoint-") + driver);
    auto full = build({"wave"}, o);
    full->run_until(50);
    io::checkpoint_write(*full, dir);
    full->run_until(100);

    const auto reg = standard_registry({"wave"});
    auto restored = io::checkpoint_restore(dir, reg, [&](const flesh::ParameterTable& p) {
      return make_simulation(reg, p);
    });
    const bool at50 = restored->iteration() == 50;
    restored->run_until(100);
    const bool same = at50 && bit_identical(owned_data(*full, true), owned_data(*restored, true));
    ok = ok && same;
    detail += fmt("%s restart %s; ", driver, same ? "bit-identical" : "DIFFERS");
  }

  auto sim = build({"wave"}, wave_cube(16, 8));
  const auto nth = io::write_vars(*sim, {}, io::parse_strategy("every-nth", 4), scratch("every-nth"));
  const auto per = io::write_vars(*sim, {}, io::parse_strategy("per-rank"), scratch("per-rank"));
  const auto a = dataset_multiset(nth), b = dataset_multiset(per);
  const bool match = nth.size() == 2 && per.size() == 8 && a == b && !a.empty();
  ok = ok && match;
  detail += fmt("every-nth(4) on 8 ranks: %zu files, per-rank: %zu files, %zu datasets %s", nth.size(), per.size(),
                a.size(), a == b ? "match" : "DIFFER");
  return {ok, detail};
}

Outcome weak_scaling() {
  auto k = bench::KernelSpec::defaults("unigrid-wave-pugh");
  k.scratch = scratch("bench");
  const auto rows = bench::run_weak_scaling(k, {1, 2, 4, 8});
  bool ok = rows.size() == 4 && rows.front().efficiency == 1.0;
  std::string detail = "efficiency";
  for (const auto& r : rows) {
    ok = ok && r.efficiency > 0.0 && r.efficiency <= 1.1 && r.points_per_rank == rows.front().points_per_rank &&
         std::isfinite(r.norm);
    detail += fmt(" %d:%.3f", r.ranks, r.efficiency);
  }
  return {ok, detail + fmt(", %lld points per rank", static_cast<long long>(rows.front().points_per_rank))};
}

Outcome monitoring() {
  auto o = wave_cube(16, 2);
  o["sim::iterations"] = I(40);
  const auto ckdir = scratch("monitor");

  auto reference = build({"wave"}, o);
  reference->run_until(40);

  auto sim = build({"wave"}, o, false);
  monitor::MonitorOptions opts;
  opts.checkpoint_dir = ckdir.string();
  monitor::Monitor mon(*sim, opts);
  const int port = mon.start_server("127.0.0.1", 0);
  mon.handle_request("POST", "/control", R"({"action":"pause"})");

  std::atomic<bool> done{false};
  std::string run_error;
  std::thread runner([&] {
    try {
      sim->initialize();
      sim->run_until(40);
    } catch (const std::exception& e) {
      run_error = e.what();
    }
    done = true;
  });

  httplib::Client cli("127.0.0.1", port);
  cli.set_read_timeout(10, 0);
  auto get_status = [&] {
    auto r = cli.Get("/status");
    if (!r || r->status != 200) throw std::runtime_error("GET /status failed");
    return nlohmann::json::parse(r->body);
  };
  auto wait_for = [&](const std::function<bool()>& pred) {
    for (int i = 0; i < 300; ++i) {
      if (pred()) return true;
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    return false;
  };

  std::string detail;
  bool ok = wait_for([&] { return get_status()["state"] == "paused"; });
  const auto s1 = get_status();
  std::this_thread::sleep_for(std::chrono::milliseconds(250));
  const auto s2 = get_status();
  const bool held = s1["iteration"] == s2["iteration"] && s2["state"] == "paused";
  ok = ok && held;
  detail += fmt("paused at iteration %lld %s; ", static_cast<long long>(s2["iteration"].get<std::int64_t>()),
                held ? "held" : "NOT held");

  auto steer = cli.Post("/params", R"({"name":"io::out_every","value":5})", "application/json");
  auto bad = cli.Post("/params", R"({"name":"grid::nx","value":8})", "application/json");
  const bool steer_ok = steer && steer->status == 202 && bad && bad->status == 403;
  ok = ok && steer_ok;
  detail += fmt("steer %d, non-steerable %d; ", steer ? steer->status : -1, bad ? bad->status : -1);

  auto ck = cli.Post("/control", R"({"action":"checkpoint"})", "application/json");
  const auto manifest = ckdir / "it_0" / "checkpoint.json";
  const bool wrote = ck && ck->status == 202 && wait_for([&] { return fs::exists(manifest); });
  ok = ok && wrote;
  detail += wrote ? "checkpoint written; " : "checkpoint MISSING; ";

  auto resume = cli.Post("/control", R"({"action":"resume"})", "application/json");
  ok = ok && resume && resume->status == 202;
  runner.join();
  mon.stop_server();
  ok = ok && done && run_error.empty() && sim->iteration() == 40;

  const std::vector<std::int64_t> want_out{5, 10, 15, 20, 25, 30, 35, 40};
  const bool outputs = sim->output_iterations() == want_out;
  const bool same = bit_identical(owned_data(*reference, true), owned_data(*sim, true));
  ok = ok && outputs && same;
  detail += fmt("outputs at every 5th iteration %s; data %s monitor-disabled run", outputs ? "yes" : "NO",
                same ? "bit-identical to" : "DIFFERS from");
  if (!run_error.empty()) detail += "; run error: " + run_error;
  return {ok, detail};
}

}  // namespace

int main() {
  report("cost-model", cost_model);
  report("ghost-overhead", ghost_overhead);
  report("driver-equivalence", driver_equivalence);
  report("exchange-equivalence", exchange_equivalence);
  report("convergence", convergence);
  report("amr-subcycling", amr_subcycling);
  report("hydro", hydro);
  report("checkpoint-restart", checkpoint_restart);
  report("weak-scaling", weak_scaling);
  report("monitoring", monitoring);
  std::error_code ec;
  fs::remove_all(fs::temp_directory_path() / ("tapestry-acceptance-" + std::to_string(::getpid())), ec);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
