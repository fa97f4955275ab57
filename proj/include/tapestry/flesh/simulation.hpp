#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tapestry/comm/transport.hpp"
#include "tapestry/flesh/driver.hpp"
#include "tapestry/flesh/parameters.hpp"
#include "tapestry/flesh/registry.hpp"
#include "tapestry/flesh/timers.hpp"

namespace tapestry::flesh {

/// Raised when a running simulation is asked to change a parameter that is
/// not steerable.
struct SteeringError : ParameterError {
  using ParameterError::ParameterError;
};

/// A schedule item failed on some block.
struct ItemError : std::runtime_error {
  ItemError(std::string item, int block, const std::string& what);
  std::string item;
  int block = -1;  // -1 for global items
};

struct SteeringEntry {
  std::int64_t iteration = 0;
  std::string name;
  std::string old_value;
  std::string new_value;
};

struct SteeringAck {
  std::int64_t effective_iteration = 0;
  bool no_op = false;
};

/// Restorable run state recorded in checkpoints.
struct RunState {
  std::int64_t iteration = 0;
  double time = 0.0;
};

/// The flesh at run time: owns the parameter table, the active driver, the
/// resolved schedule and the timers, and drives the iteration loop.
class Simulation {
 public:
  Simulation(Registry registry, ParameterTable params, std::unique_ptr<Driver> driver);
  ~Simulation();
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  /// Allocate storage and run STARTUP.
  void setup();
  /// Run INITIAL on every level, then ANALYSIS and OUTPUT for iteration 0.
  void initialize();
  /// Start from restored data instead of initial data.
  void resume(const RunState& state);
  /// One full iteration: steering, evolution, ANALYSIS, OUTPUT, boundary hooks.
  void step();
  /// sim::final_time when declared and positive, else 0 (no limit). The last
  /// step is shortened to land on it.
  double final_time() const;
  bool reached_final_time() const;
  /// Step until `iteration` or the final time is reached, or termination is requested.
  void run_until(std::int64_t iteration);
  /// Run SHUTDOWN.
  void shutdown();

  /// Run every item of `bin`. With level >= 0 block-local items only visit
  /// that level; otherwise every level in turn.
  void run_bin(Bin bin, int level = -1);
  const std::vector<ScheduleItem>& schedule(Bin bin) const;
  const std::vector<std::string>& schedule_warnings() const { return warnings_; }

  const Registry& registry() const { return registry_; }
  const ParameterTable& params() const { return params_; }
  Driver& driver() { return *driver_; }
  const Driver& driver() const { return *driver_; }
  Timers& timers() { return timers_; }
  const Timers& timers() const { return timers_; }
  TimerReport timer_report() const { return timers_.report(); }
  const comm::Executor& executor() const { return exec_; }

  std::int64_t iteration() const { return iteration_; }
  double time() const { return time_; }
  Bin active_bin() const { return active_bin_; }
  bool running() const { return running_; }

  /// Queue a parameter change taking effect at the start of `at_iteration`
  /// (default: the next iteration). Before setup() the change applies at once.
  SteeringAck set_parameter(const std::string& name, const ParamValue& value,
                            std::optional<std::int64_t> at_iteration = std::nullopt);
  std::vector<SteeringEntry> steering_log() const;
  std::string steering_log_text() const;

  /// Called at every iteration boundary, after OUTPUT (and once after initialize).
  void add_boundary_hook(std::function<void(Simulation&)> hook);
  void request_termination() { terminate_ = true; }
  bool termination_requested() const { return terminate_; }

  void record_output(std::int64_t iteration) { output_iterations_.push_back(iteration); }
  const std::vector<std::int64_t>& output_iterations() const { return output_iterations_; }

 private:
  struct Pending {
    std::int64_t at;
    std::string name;
    ParamValue value;
  };

  void apply_pending(std::int64_t iteration);
  void boundary();
  void run_item(const ScheduleItem& item, int level);

  Registry registry_;
  ParameterTable params_;
  std::unique_ptr<Driver> driver_;
  Timers timers_;
  comm::Executor exec_;
  std::vector<std::vector<ScheduleItem>> schedule_;
  std::vector<std::string> warnings_;

  std::int64_t iteration_ = 0;
  double time_ = 0.0;
  Bin active_bin_ = Bin::startup;
  bool running_ = false;
  bool terminate_ = false;

  mutable std::mutex steer_mutex_;
  std::vector<Pending> pending_;
  std::vector<SteeringEntry> log_;

  std::vector<std::function<void(Simulation&)>> hooks_;
  std::vector<std::int64_t> output_iterations_;
};

}  // namespace tapestry::flesh
