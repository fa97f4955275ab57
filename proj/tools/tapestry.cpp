#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "tapestry/app.hpp"
#include "tapestry/bench/bench.hpp"
#include "tapestry/io/output.hpp"
#include "tapestry/monitor/monitor.hpp"

using namespace tapestry;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int run(const std::string& parfile, const std::vector<std::string>& sets, const std::string& restore_dir,
        int restore_ranks) {
  std::string text = parfile.empty() ? std::string() : slurp(parfile);
  for (const auto& s : sets) text += "\n" + s;
  auto physics = physics_in(text);
  if (physics.empty()) physics = {"wave"};
  auto reg = standard_registry(physics);

  std::unique_ptr<flesh::Simulation> sim;
  if (!restore_dir.empty()) {
    sim = io::checkpoint_restore(
        restore_dir, reg, [&](const flesh::ParameterTable& p) { return make_simulation(reg, p); },
        restore_ranks > 0 ? std::optional<int>(restore_ranks) : std::nullopt);
  } else {
    const auto params = make_parameters(reg, flesh::parse_parameter_file(text, reg.default_parameters()));
    sim = make_simulation(reg, params);
    sim->setup();
  }
  for (const auto& w : sim->schedule_warnings()) std::cerr << "schedule: " << w << '\n';
  auto monitor = monitor::attach_from_params(*sim);
  if (restore_dir.empty()) sim->initialize();

  const auto target = sim->params().get_int("sim::iterations");
  sim->run_until(target);
  sim->shutdown();

  std::printf("iteration %lld time %.17g\n", static_cast<long long>(sim->iteration()), sim->time());
  for (const auto& e : sim->registry().evolved())
    if (const auto* g = sim->registry().find_group(e.group))
      for (const auto& v : g->variables) {
        const auto name = io::dataset_name(g->name, v);
        std::printf("%s l2 %.17g linf %.17g\n", name.c_str(), sim->driver().reduce("l2", name),
                    sim->driver().reduce("linf", name));
      }
  for (const auto& t : sim->timer_report())
    std::printf("timer %s %.6f s %lld calls\n", t.name.c_str(), t.seconds, static_cast<long long>(t.calls));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tapestry: component-based PDE simulation framework"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "run a simulation from a parameter file");
  std::string parfile, restore_dir;
  std::vector<std::string> sets;
  int restore_ranks = 0;
  run_cmd->add_option("parfile", parfile, "parameter file");
  run_cmd->add_option("--set", sets, "extra 'thorn::name = value' assignment");
  run_cmd->add_option("--restore", restore_dir, "continue from a checkpoint directory");
  run_cmd->add_option("--ranks", restore_ranks, "rank count when restoring");

  auto* bench_cmd = app.add_subcommand("bench", "weak-scaling benchmark");
  std::string kernel = "unigrid-wave-pugh", report;
  std::vector<int> ranks{1, 2, 4, 8};
  std::int64_t memory = 0;
  int steps = 0;
  bool sequential = false;
  bench_cmd->add_option("--kernel", kernel, "kernel")->check(CLI::IsMember(bench::kernel_names()));
  bench_cmd->add_option("--ranks", ranks, "rank counts")->delimiter(',');
  bench_cmd->add_option("--report", report, "write a .csv or .json report");
  bench_cmd->add_option("--memory", memory, "bytes per rank");
  bench_cmd->add_option("--steps", steps, "timed steps");
  bench_cmd->add_flag("--sequential", sequential, "run simulated ranks on one thread");

  auto* est_cmd = app.add_subcommand("estimate", "petascale cost model");
  bench::CostModelInput in;
  est_cmd->add_option("--levels", in.levels)->required();
  est_cmd->add_option("--base", in.base)->required();
  est_cmd->add_option("--gridfns", in.gridfns)->required();
  est_cmd->add_option("--flops", in.flops)->required();
  est_cmd->add_option("--extra-flops", in.extra_flops);
  est_cmd->add_option("--steps", in.steps)->required();
  est_cmd->add_option("--rate", in.rate)->required();
  est_cmd->add_option("--bytes", in.bytes_per_value);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return run(parfile, sets, restore_dir, restore_ranks);
    if (*bench_cmd) {
      auto k = bench::KernelSpec::defaults(kernel);
      if (memory > 0) k.memory_per_rank = memory;
      if (steps > 0) k.steps = steps;
      k.parallel = !sequential;
      const auto results = bench::run_weak_scaling(k, ranks);
      std::cout << bench::to_csv(results);
      if (!report.empty()) bench::emit_report(results, report);
      return 0;
    }
    if (*est_cmd) {
      const auto e = bench::estimate_cost(in);
      std::printf("memory_bytes %llu\n", static_cast<unsigned long long>(e.memory_bytes));
      std::printf("memory_tib %.6f\n", static_cast<double>(e.memory_bytes) / 1099511627776.0);
      std::printf("total_flops %.6Le\n", e.total_flops);
      std::printf("total_petaflops %.6e\n", e.petaflops());
      std::printf("finest_level_steps %.0Lf\n", e.level_steps.back());
      std::printf("runtime_seconds %.6Le\n", e.runtime_seconds);
      std::printf("runtime_days %.3f\n", e.runtime_days());
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
