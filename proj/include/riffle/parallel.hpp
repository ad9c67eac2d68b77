#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace riffle {

// Runs `work(stream)` for every stream in [0, streams) on up to `threads`
// workers and returns the per-stream results in stream order. The caller
// reduces them in that fixed order, so the outcome is independent of `threads`.
template <typename Result, typename Work>
std::vector<Result> map_streams(std::uint32_t streams, unsigned threads, Work&& work) {
  std::vector<Result> results(streams);
  threads = std::max(1u, std::min<unsigned>(threads, streams));
  if (threads == 1) {
    for (std::uint32_t s = 0; s < streams; ++s) results[s] = work(s);
    return results;
  }
  std::atomic<std::uint32_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::uint32_t s = next.fetch_add(1);
      if (s >= streams) return;
      try {
        results[s] = work(s);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = streams;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

inline unsigned default_thread_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  void add(const CompensatedSum& other) {
    add(other.sum_);
    add(other.comp_);
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace riffle
