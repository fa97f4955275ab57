#include "tapestry/flesh/simulation.hpp"

#include <algorithm>
#include <sstream>

namespace tapestry::flesh {

ItemError::ItemError(std::string item_name, int block_id, const std::string& what)
    : std::runtime_error("schedule item '" + item_name + "'" +
                         (block_id >= 0 ? " failed on block " + std::to_string(block_id) : std::string(" failed")) +
                         ": " + what),
      item(std::move(item_name)),
      block(block_id) {}

Simulation::Simulation(Registry registry, ParameterTable params, std::unique_ptr<Driver> driver)
    : registry_(std::move(registry)), params_(std::move(params)), driver_(std::move(driver)) {
  if (!driver_) throw std::invalid_argument("simulation needs a driver");
  for (const auto& spec : registry_.parameters())
    if (!params_.has(spec.name)) params_.declare(spec);
  if (params_.has("driver::workers")) exec_.set_workers(static_cast<int>(params_.get_int("driver::workers")));
  for (Bin b : all_bins) schedule_.push_back(resolve_schedule(registry_.items(), b, &warnings_));
}

Simulation::~Simulation() = default;

const std::vector<ScheduleItem>& Simulation::schedule(Bin bin) const { return schedule_[static_cast<std::size_t>(bin)]; }

void Simulation::setup() {
  driver_->setup(*this);
  running_ = true;
  run_bin(Bin::startup);
}

void Simulation::initialize() {
  run_bin(Bin::initial);
  driver_->post_initial(*this);
  time_ = driver_->level(0).time;
  run_bin(Bin::analysis);
  run_bin(Bin::output);
  boundary();
}

void Simulation::resume(const RunState& state) {
  iteration_ = state.iteration;
  time_ = state.time;
  boundary();
}

void Simulation::step() {
  apply_pending(iteration_ + 1);
  double dt = driver_->timestep(*this);
  if (const double tf = final_time(); tf > 0.0) dt = std::min(dt, tf - time_);
  driver_->advance(*this, dt);
  ++iteration_;
  time_ = driver_->level(0).time;
  run_bin(Bin::analysis);
  run_bin(Bin::output);
  boundary();
}

double Simulation::final_time() const {
  return params_.has("sim::final_time") ? params_.get_real("sim::final_time") : 0.0;
}

bool Simulation::reached_final_time() const {
  const double tf = final_time();
  return tf > 0.0 && time_ >= tf * (1.0 - 1e-14);
}

void Simulation::run_until(std::int64_t iteration) {
  while (iteration_ < iteration && !terminate_ && !reached_final_time()) step();
}

void Simulation::shutdown() {
  run_bin(Bin::shutdown);
  running_ = false;
}

void Simulation::boundary() {
  for (auto& h : hooks_) h(*this);
}

void Simulation::add_boundary_hook(std::function<void(Simulation&)> hook) { hooks_.push_back(std::move(hook)); }

void Simulation::run_bin(Bin bin, int level) {
  active_bin_ = bin;
  for (const auto& item : schedule(bin)) {
    auto scope = timers_.scope(item.name);
    if (item.global) {
      try {
        item.global(*this);
      } catch (const ItemError&) {
        throw;
      } catch (const std::exception& e) {
        throw ItemError(item.name, -1, e.what());
      }
    } else if (level >= 0) {
      run_item(item, level);
    } else {
      for (int l = 0; l < driver_->num_levels(); ++l) run_item(item, l);
    }
    const int first = level >= 0 ? level : 0;
    const int last = level >= 0 ? level : driver_->num_levels() - 1;
    for (const auto& g : item.sync_groups)
      for (int l = first; l <= last; ++l) driver_->sync(l, g);
  }
}

void Simulation::run_item(const ScheduleItem& item, int l) {
  Level& lev = driver_->level(l);
  exec_.parallel_for(static_cast<int>(lev.patches.size()), [&](int p) {
    Patch& patch = lev.patches[static_cast<std::size_t>(p)];
    BlockContext ctx{patch, l, lev.geom, lev.time, iteration_, params_};
    try {
      item.local(ctx);
    } catch (const std::exception& e) {
      throw ItemError(item.name, patch.id, e.what());
    }
  });
}

SteeringAck Simulation::set_parameter(const std::string& name, const ParamValue& value,
                                      std::optional<std::int64_t> at_iteration) {
  const auto& spec = params_.spec(name);
  ParamValue v = value;
  if (spec.kind == ParamKind::real && std::holds_alternative<std::int64_t>(v))
    v = static_cast<double>(std::get<std::int64_t>(v));
  spec.check(v);
  std::lock_guard lock(steer_mutex_);
  if (!running_) {
    const std::string old = format_value(params_.get(name));
    params_.set(name, v);
    log_.push_back({iteration_, name, old, format_value(v)});
    return {iteration_, old == format_value(v)};
  }
  if (!spec.steerable) throw SteeringError("parameter " + name + " is not steerable while the simulation runs");
  const std::int64_t at = std::max(at_iteration.value_or(iteration_ + 1), iteration_ + 1);
  const bool same = format_value(params_.get(name)) == format_value(v);
  pending_.push_back({at, name, v});
  return {at, same};
}

void Simulation::apply_pending(std::int64_t iteration) {
  std::lock_guard lock(steer_mutex_);
  std::vector<Pending> keep;
  for (auto& p : pending_) {
    if (p.at > iteration) {
      keep.push_back(std::move(p));
      continue;
    }
    const std::string old = format_value(params_.get(p.name));
    params_.set(p.name, p.value);
    log_.push_back({iteration, p.name, old, format_value(params_.get(p.name))});
  }
  pending_ = std::move(keep);
}

std::vector<SteeringEntry> Simulation::steering_log() const {
  std::lock_guard lock(steer_mutex_);
  return log_;
}

std::string Simulation::steering_log_text() const {
  std::ostringstream os;
  for (const auto& e : steering_log()) os << e.iteration << ' ' << e.name << ' ' << e.old_value << ' ' << e.new_value << '\n';
  return os.str();
}

}  // namespace tapestry::flesh
