#pragma once

#include <algorithm>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace qpu {

/// Persistent worker pool with a blocking index-range fan-out. Work items are
/// addressed by index, so results land in caller-owned slots and never depend
/// on scheduling; any reduction over them happens on the calling thread in
/// index order.
class ThreadPool {
 public:
  explicit ThreadPool(unsigned threads) {
    const unsigned n = threads == 0 ? 1 : threads;
    workers_.reserve(n > 0 ? n - 1 : 0);
    for (unsigned t = 1; t < n; ++t) {
      workers_.emplace_back([this, t] { worker_loop(t); });
    }
  }

  ~ThreadPool() {
    {
      std::lock_guard lock(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& w : workers_) w.join();
  }

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  unsigned size() const { return static_cast<unsigned>(workers_.size()) + 1; }

  /// Runs fn(i) for every i in [0, n), blocking until all calls return.
  /// Indices are split into one contiguous chunk per worker; the calling
  /// thread takes chunk 0.
  void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    const unsigned chunks = size();
    if (chunks == 1 || n == 1) {
      for (std::size_t i = 0; i < n; ++i) fn(i);
      return;
    }
    {
      std::lock_guard lock(mu_);
      job_ = &fn;
      job_n_ = n;
      pending_ = static_cast<int>(chunks) - 1;
      ++generation_;
    }
    cv_.notify_all();
    run_chunk(0, n, fn);
    std::unique_lock lock(mu_);
    done_cv_.wait(lock, [this] { return pending_ == 0; });
    job_ = nullptr;
  }

 private:
  void run_chunk(unsigned chunk, std::size_t n, const std::function<void(std::size_t)>& fn) {
    const std::size_t per = (n + size() - 1) / size();
    const std::size_t lo = chunk * per;
    const std::size_t hi = std::min(n, lo + per);
    for (std::size_t i = lo; i < hi; ++i) fn(i);
  }

  void worker_loop(unsigned chunk) {
    std::uint64_t seen = 0;
    for (;;) {
      const std::function<void(std::size_t)>* job = nullptr;
      std::size_t n = 0;
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
        if (stop_) return;
        seen = generation_;
        job = job_;
        n = job_n_;
      }
      if (job != nullptr) run_chunk(chunk, n, *job);
      {
        std::lock_guard lock(mu_);
        if (--pending_ == 0) done_cv_.notify_one();
      }
    }
  }

  std::vector<std::thread> workers_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable done_cv_;
  const std::function<void(std::size_t)>* job_ = nullptr;
  std::size_t job_n_ = 0;
  std::uint64_t generation_ = 0;
  int pending_ = 0;
  bool stop_ = false;
};

}  // namespace qpu
