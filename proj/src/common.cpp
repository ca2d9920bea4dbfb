#include "orlhom/common.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numbers>
#include <thread>
#include <vector>

namespace orlhom {

double counter_gaussian(std::uint64_t seed, std::uint64_t i) {
  // Two uniforms per index pair; Box-Muller, cosine branch for even i,
  // sine branch for odd i.
  std::uint64_t pair = i / 2;
  std::uint64_t h1 = mix64(seed ^ mix64(pair));
  std::uint64_t h2 = mix64(h1 ^ 0xda3e39cb94b95bdbULL);
  double u1 = uniform01(h1);
  double u2 = uniform01(h2);
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * std::numbers::pi * u2;
  return (i % 2 == 0) ? r * std::cos(theta) : r * std::sin(theta);
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  if (jobs < 1) jobs = 1;
  std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace orlhom
