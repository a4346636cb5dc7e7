#pragma once

#include <functional>

namespace cuspforge {

/// Composite Simpson rule on [a, b] with panels no wider than `step`.
/// The panel count is rounded up to an even number; a == b yields 0.
double simpson(const std::function<double(double)>& f, double a, double b, double step);

struct RichardsonCheck {
  double value = 0.0;         // integral at the requested step
  double refined = 0.0;       // integral at half the step
  double relative_change = 0.0;
};

/// Simpson at `step` and `step / 2`, returning both and their relative change.
RichardsonCheck simpson_checked(const std::function<double(double)>& f, double a, double b,
                                double step);

/// Bisection on a bracketing interval. `f(lo)` and `f(hi)` must differ in sign
/// (or one of them be zero). Stops when the bracket is below `xtol`.
double bisect(const std::function<double(double)>& f, double lo, double hi, double xtol,
              int max_iter = 200);

}  // namespace cuspforge
