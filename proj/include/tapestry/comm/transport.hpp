#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <vector>

#include "tapestry/grid/box.hpp"

namespace tapestry::comm {

/// Immutable once handed to Transport::send.
struct Message {
  int source = 0;
  int dest = 0;
  int phase = 0;
  int region = 0;  // sender-local region id, used for ordering only
  IndexBox box;
  int num_vars = 1;
  std::vector<double> payload;  // box.volume() * num_vars values, var-major
};

struct TrafficStats {
  std::int64_t messages = 0;
  std::int64_t payload_values = 0;
  std::map<int, std::int64_t> sent_by_rank;
  std::map<std::pair<int, int>, std::int64_t> sent_by_rank_phase;
};

/// In-process stand-in for a message-passing layer. Ranks post messages
/// concurrently; delivery order is fixed by (phase, source, region).
class Transport {
 public:
  void send(Message m);
  /// Remove and return every pending message for `dest`, in delivery order.
  std::vector<Message> receive(int dest);
  bool idle() const;

  const TrafficStats& stats() const { return stats_; }
  void reset_stats() { stats_ = {}; }

 private:
  mutable std::mutex mutex_;
  std::map<int, std::vector<Message>> pending_;
  TrafficStats stats_;
};

/// Runs per-rank work either sequentially or on a set of worker threads.
/// Results must not depend on which.
class Executor {
 public:
  explicit Executor(int workers = 1) : workers_(workers < 1 ? 1 : workers) {}
  int workers() const { return workers_; }
  void set_workers(int w) { workers_ = w < 1 ? 1 : w; }

  /// Calls fn(i) for i in [0, n). The exception from the lowest failing index
  /// is rethrown after all tasks finish.
  void parallel_for(int n, const std::function<void(int)>& fn) const;

 private:
  int workers_;
};

}  // namespace tapestry::comm
