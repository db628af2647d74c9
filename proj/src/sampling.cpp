#include "mixcheck/sampling.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

#include "mixcheck/types.hpp"

namespace mixcheck {

const char* to_string(EvalFault f) {
  switch (f) {
    case EvalFault::none: return "none";
    case EvalFault::div_by_zero: return "division by zero";
    case EvalFault::log_domain: return "log of non-positive value";
    case EvalFault::sqrt_domain: return "sqrt of negative value";
    case EvalFault::pow_domain: return "pow with non-real result";
    case EvalFault::not_finite: return "non-finite result";
    case EvalFault::undefined: return "undefined at this point";
    case EvalFault::quadrature: return "quadrature failure";
  }
  return "unknown";
}

const char* to_string(Axis a) { return a == Axis::x ? "x" : "y"; }

std::size_t worker_count() {
  if (const char* env = std::getenv("MIXCHECK_THREADS")) {
    long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<std::size_t>(n);
  }
  std::size_t hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(worker_count(), n);
  if (workers <= 1 || n < 32) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        body(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace mixcheck
