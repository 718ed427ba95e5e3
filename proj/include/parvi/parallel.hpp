#pragma once

#include <algorithm>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace parvi {

// Fixed set of worker threads executing data-parallel loops over a static
// contiguous partition. Chunk c always covers the same index range for a
// given (count, width), and the caller blocks until every chunk is done, so
// results written to disjoint slots do not depend on scheduling.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t width) : width_(std::max<std::size_t>(width, 1)) {
    errors_.resize(width_);
    for (std::size_t w = 1; w < width_; ++w) threads_.emplace_back([this, w] { worker(w); });
  }

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  ~WorkerPool() {
    {
      std::lock_guard lock(mutex_);
      stopping_ = true;
      ++generation_;
    }
    start_.notify_all();
    for (auto& t : threads_) t.join();
  }

  std::size_t width() const { return width_; }

  // Calls fn(begin, end) for each chunk of [0, count). If chunks throw, the
  // exception of the lowest chunk is rethrown.
  void run(std::size_t count, const std::function<void(std::size_t, std::size_t)>& fn) {
    if (width_ == 1 || count < 2) {
      if (count) fn(0, count);
      return;
    }
    {
      std::lock_guard lock(mutex_);
      task_ = &fn;
      count_ = count;
      pending_ = width_ - 1;
      std::fill(errors_.begin(), errors_.end(), nullptr);
      ++generation_;
    }
    start_.notify_all();
    execute(0);
    {
      std::unique_lock lock(mutex_);
      done_.wait(lock, [this] { return pending_ == 0; });
      task_ = nullptr;
    }
    for (auto& e : errors_)
      if (e) std::rethrow_exception(e);
  }

 private:
  void execute(std::size_t w) {
    const std::size_t begin = count_ * w / width_;
    const std::size_t end = count_ * (w + 1) / width_;
    if (begin == end) return;
    try {
      (*task_)(begin, end);
    } catch (...) {
      errors_[w] = std::current_exception();
    }
  }

  void worker(std::size_t w) {
    std::size_t seen = 0;
    for (;;) {
      {
        std::unique_lock lock(mutex_);
        start_.wait(lock, [&] { return generation_ != seen; });
        seen = generation_;
        if (stopping_) return;
      }
      execute(w);
      {
        std::lock_guard lock(mutex_);
        --pending_;
      }
      done_.notify_one();
    }
  }

  std::size_t width_;
  std::vector<std::thread> threads_;
  std::vector<std::exception_ptr> errors_;
  std::mutex mutex_;
  std::condition_variable start_;
  std::condition_variable done_;
  const std::function<void(std::size_t, std::size_t)>* task_ = nullptr;
  std::size_t count_ = 0;
  std::size_t pending_ = 0;
  std::size_t generation_ = 0;
  bool stopping_ = false;
};

}  // namespace parvi
