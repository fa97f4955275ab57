#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace tapestry::flesh {

struct TimerEntry {
  std::string name;
  double seconds = 0.0;
  std::int64_t calls = 0;
};

using TimerReport = std::vector<TimerEntry>;

/// Cumulative wall-clock timers keyed by name. Thread-safe.
class Timers {
 public:
  void add(const std::string& name, double seconds);
  /// Entries in order of first use.
  TimerReport report() const;
  void clear();

  class Scope {
   public:
    Scope(Timers& t, std::string name) : timers_(t), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
    ~Scope() {
      timers_.add(name_, std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count());
    }
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

   private:
    Timers& timers_;
    std::string name_;
    std::chrono::steady_clock::time_point start_;
  };

  Scope scope(std::string name) { return Scope(*this, std::move(name)); }

 private:
  mutable std::mutex mutex_;
  std::vector<TimerEntry> entries_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace tapestry::flesh
