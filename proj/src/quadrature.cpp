#include "cuspforge/quadrature.hpp"

#include <cmath>
#include <string>

#include "cuspforge/error.hpp"

namespace cuspforge {

double simpson(const std::function<double(double)>& f, double a, double b, double step) {
  if (a == b) return 0.0;
  if (!(step > 0.0)) throw Error("simpson: step must be positive");
  const double width = b - a;
  long panels = static_cast<long>(std::ceil(std::fabs(width) / step));
  if (panels < 2) panels = 2;
  if (panels % 2 != 0) ++panels;
  const double h = width / static_cast<double>(panels);

  double odd = 0.0;
  double even = 0.0;
  for (long i = 1; i < panels; ++i) {
    const double x = a + h * static_cast<double>(i);
    if (i % 2 == 1)
      odd += f(x);
    else
      even += f(x);
  }
  return h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even);
}

RichardsonCheck simpson_checked(const std::function<double(double)>& f, double a, double b,
                                double step) {
  RichardsonCheck out;
  out.value = simpson(f, a, b, step);
  out.refined = simpson(f, a, b, step / 2.0);
  const double scale = std::max(std::fabs(out.refined), 1e-300);
  out.relative_change = std::fabs(out.refined - out.value) / scale;
  return out;
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double xtol,
              int max_iter) {
  double flo = f(lo);
  if (flo == 0.0) return lo;
  double fhi = f(hi);
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0)) {
    throw Error("bisect: root not bracketed on [" + std::to_string(lo) + ", " +
                std::to_string(hi) + "]");
  }
  for (int iter = 0; iter < max_iter && (hi - lo) > xtol; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fmid = f(mid);
    if (fmid == 0.0) return mid;
    if ((fmid < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace cuspforge
