#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>

namespace trgeo {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Neumaier-compensated accumulator. Reductions always add in node order so the
// result does not depend on how per-node work was scheduled.
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
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double compensated_sum(std::span<const double> values);

// Worker count used by parallel_for. Defaults to 1; the CLI sets it from
// --threads or TRGEO_THREADS.
void set_thread_count(int count);
int thread_count();

// Runs body(i) for i in [0, count). Each index is visited exactly once and
// bodies must only write to slots owned by their index.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

// Central-difference style extrapolation helpers.
struct RichardsonResult {
  double value = 0.0;      // extrapolated estimate
  double order = 0.0;      // observed convergence order (NaN when undefined)
  bool exact = false;      // successive estimates agree to rounding
};

// estimates[k] computed with step steps[k], steps halving, leading error ~ step^2.
// `noise` is the absolute rounding level of the estimates; differences below it
// mark the result exact.
RichardsonResult richardson_central(std::span<const double> estimates, std::span<const double> steps,
                                    double noise = 0.0);

}  // namespace trgeo
