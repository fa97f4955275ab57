#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace tapestry::bench {

struct CostModelInput {
  int levels = 16;
  std::int64_t base = 1024;  // points per dimension
  std::int64_t gridfns = 512;
  std::int64_t bytes_per_value = 8;
  double flops = 10e3;        // per point and step
  double extra_flops = 22e3;  // additional physics, per point and step
  double steps = 6000;        // base level steps
  double rate = 2e15;         // sustained flop/s

  void validate() const;
};

struct CostEstimate {
  std::uint64_t memory_bytes = 0;
  long double total_flops = 0;
  std::vector<long double> level_steps;  // s0 * 2^l
  long double runtime_seconds = 0;

  double petaflops() const { return static_cast<double>(total_flops / 1e15L); }
  double runtime_days() const { return static_cast<double>(runtime_seconds / 86400.0L); }
};

/// memory = L N^3 G bytes; flops = sum over levels of N^3 (f0 + f1) s0 2^l.
CostEstimate estimate_cost(const CostModelInput& in);

/// ((o + 2g)^3 - o^3) / o^3.
double ghost_overhead(std::int64_t owned, std::int64_t ghost);

inline const std::vector<std::string>& kernel_names() {
  static const std::vector<std::string> names{"unigrid-wave-pugh", "unigrid-wave-amr1lev", "amr8lev-wave", "amr-hydro",
                                              "io-checkpoint"};
  return names;
}

struct KernelSpec {
  std::string name = "unigrid-wave-pugh";
  std::int64_t memory_per_rank = 8'000'000;  // bytes; io-checkpoint: payload per rank
  int steps = 10;
  /// Run simulated ranks on that many worker threads (timing) rather than
  /// sequentially.
  bool parallel = true;
  std::filesystem::path scratch = "bench-scratch";

  /// Desk-scale defaults per kernel.
  static KernelSpec defaults(const std::string& name);
};

struct WeakScalingResult {
  std::string kernel;
  int ranks = 1;
  double seconds = 0.0;
  double updates_per_second = 0.0;
  double efficiency = 1.0;
  std::int64_t points_per_rank = 0;
  /// L2 norm of the first evolved variable at the end, for content checks.
  double norm = 0.0;
  /// io-checkpoint only.
  double mb_per_second = 0.0;
};

/// One result per rank count (io-checkpoint: one per rank count and output
/// strategy). Efficiency is T(first rank count) / T(n) for the same kernel
/// row; wall time excludes setup, initial data and shutdown.
std::vector<WeakScalingResult> run_weak_scaling(const KernelSpec& kernel, const std::vector<int>& ranks);

std::string to_csv(const std::vector<WeakScalingResult>& results);
std::string to_json(const std::vector<WeakScalingResult>& results);
std::vector<WeakScalingResult> results_from_json(const std::string& text);
/// Format chosen by extension: .json, otherwise CSV.
void emit_report(const std::vector<WeakScalingResult>& results, const std::filesystem::path& path);

}  // namespace tapestry::bench
