#include "tapestry/comm/transport.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <stdexcept>
#include <thread>

namespace tapestry::comm {

void Transport::send(Message m) {
  if (static_cast<std::int64_t>(m.payload.size()) != m.box.volume() * m.num_vars)
    throw std::logic_error("message payload does not match its region volume");
  std::lock_guard lock(mutex_);
  stats_.messages += 1;
  stats_.payload_values += static_cast<std::int64_t>(m.payload.size());
  stats_.sent_by_rank[m.source] += 1;
  stats_.sent_by_rank_phase[{m.source, m.phase}] += 1;
  pending_[m.dest].push_back(std::move(m));
}

std::vector<Message> Transport::receive(int dest) {
  std::vector<Message> out;
  {
    std::lock_guard lock(mutex_);
    auto it = pending_.find(dest);
    if (it == pending_.end()) return out;
    out = std::move(it->second);
    pending_.erase(it);
  }
  std::sort(out.begin(), out.end(), [](const Message& a, const Message& b) {
    if (a.phase != b.phase) return a.phase < b.phase;
    if (a.source != b.source) return a.source < b.source;
    return a.region < b.region;
  });
  return out;
}

bool Transport::idle() const {
  std::lock_guard lock(mutex_);
  return pending_.empty();
}

void Executor::parallel_for(int n, const std::function<void(int)>& fn) const {
  if (n <= 0) return;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  auto run_one = [&](int i) {
    try {
      fn(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  };
  if (workers_ <= 1 || n == 1) {
    for (int i = 0; i < n; ++i) run_one(i);
  } else {
    std::atomic<int> next{0};
    const int nthreads = std::min(workers_, n);
    std::vector<std::jthread> threads;
    threads.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t)
      threads.emplace_back([&] {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) run_one(i);
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace tapestry::comm
