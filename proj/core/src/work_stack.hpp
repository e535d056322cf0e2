#pragma once

// LIFO leaf processing shared by both partitioning phases. prepare and apply
// run under the tree lock; decide runs unlocked and may be concurrent.

#include <condition_variable>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "commutree/tree.hpp"

namespace commutree::detail {

template <class Input, class Decision, class Prepare, class Decide, class Apply>
void run_work_stack(std::vector<NodeId>& stack, int workers, Prepare prepare, Decide decide,
                    Apply apply) {
  if (workers <= 1) {
    while (!stack.empty()) {
      const NodeId id = stack.back();
      stack.pop_back();
      Input in = prepare(id);
      Decision d = decide(in);
      apply(id, in, d);
    }
    return;
  }
  std::mutex mu;
  std::condition_variable cv;
  int active = 0;
  std::exception_ptr error;
  auto worker = [&] {
    std::unique_lock lock(mu);
    for (;;) {
      cv.wait(lock, [&] { return !stack.empty() || active == 0 || error; });
      if (error || (stack.empty() && active == 0)) {
        cv.notify_all();
        return;
      }
      const NodeId id = stack.back();
      stack.pop_back();
      ++active;
      try {
        Input in = prepare(id);
        lock.unlock();
        Decision d = decide(in);
        lock.lock();
        apply(id, in, d);
      } catch (...) {
        if (!lock.owns_lock()) lock.lock();
        if (!error) error = std::current_exception();
      }
      --active;
      cv.notify_all();
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace commutree::detail
