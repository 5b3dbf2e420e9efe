#include "trgeo/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <thread>
#include <vector>

#include "trgeo/error.hpp"

namespace trgeo {

namespace {
std::atomic<int> g_threads{1};
}

double compensated_sum(std::span<const double> values) {
  CompensatedSum acc;
  for (double v : values) acc.add(v);
  return acc.value();
}

void set_thread_count(int count) { g_threads.store(std::max(1, count)); }

int thread_count() { return g_threads.load(); }

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const auto workers = static_cast<std::size_t>(thread_count());
  if (workers <= 1 || count < 2 * workers) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, w, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  // first failing chunk in index order wins, independent of timing
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

RichardsonResult richardson_central(std::span<const double> estimates, std::span<const double> steps, double noise) {
  if (estimates.empty() || estimates.size() != steps.size())
    fail(ErrorKind::InvalidArgument, "richardson_central needs matching non-empty inputs");
  RichardsonResult out;
  out.order = std::numeric_limits<double>::quiet_NaN();
  const std::size_t m = estimates.size();
  if (m == 1) {
    out.value = estimates[0];
    return out;
  }
  // One elimination level of the h^2 term, using the two finest steps.
  const double h1 = steps[m - 2];
  const double h2 = steps[m - 1];
  const double ratio2 = (h1 / h2) * (h1 / h2);
  out.value = (ratio2 * estimates[m - 1] - estimates[m - 2]) / (ratio2 - 1.0);

  if (m >= 3) {
    const double d1 = estimates[m - 3] - estimates[m - 2];
    const double d2 = estimates[m - 2] - estimates[m - 1];
    const double scale = std::max({std::abs(estimates[m - 1]), std::abs(estimates[m - 2]), 1e-300});
    const double floor = std::max(64.0 * std::numeric_limits<double>::epsilon() * scale, noise);
    if (std::abs(d1) <= floor && std::abs(d2) <= floor) {
      out.exact = true;
      out.order = std::numeric_limits<double>::infinity();
    } else if (std::abs(d2) > 0.0) {
      out.order = std::log(std::abs(d1 / d2)) / std::log(steps[m - 3] / steps[m - 2]);
    }
  }
  return out;
}

}  // namespace trgeo
