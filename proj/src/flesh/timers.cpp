#include "tapestry/flesh/timers.hpp"

namespace tapestry::flesh {

void Timers::add(const std::string& name, double seconds) {
  std::lock_guard lock(mutex_);
  auto [it, fresh] = index_.emplace(name, entries_.size());
  if (fresh) entries_.push_back({name, 0.0, 0});
  auto& e = entries_[it->second];
  e.seconds += seconds < 0.0 ? 0.0 : seconds;
  e.calls += 1;
}

TimerReport Timers::report() const {
  std::lock_guard lock(mutex_);
  return entries_;
}

void Timers::clear() {
  std::lock_guard lock(mutex_);
  entries_.clear();
  index_.clear();
}

}  // namespace tapestry::flesh
