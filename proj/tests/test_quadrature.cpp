#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cuspforge/error.hpp"
#include "cuspforge/quadrature.hpp"

using namespace cuspforge;

TEST_CASE("simpson integrates polynomials up to cubic exactly") {
  auto cubic = [](double x) { return 4.0 * x * x * x - 3.0 * x + 1.0; };
  // antiderivative x^4 - 1.5 x^2 + x on [-1, 2]: (16 - 6 + 2) - (1 - 1.5 - 1) = 13.5
  CHECK(simpson(cubic, -1.0, 2.0, 0.7) == doctest::Approx(13.5).epsilon(1e-14));
}

TEST_CASE("simpson on smooth integrand and empty interval") {
  CHECK(simpson([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, 1e-3) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(simpson([](double) { return 1.0; }, 3.0, 3.0, 0.1) == 0.0);
}

TEST_CASE("richardson check reports both steps") {
  const RichardsonCheck r = simpson_checked([](double x) { return std::exp(x); }, 0.0, 1.0, 1e-2);
  CHECK(r.value == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-10));
  CHECK(r.relative_change < 1e-9);
}

TEST_CASE("bisect finds bracketed roots and rejects unbracketed ones") {
  const double root = bisect([](double x) { return x * x - 2.0; }, 0.0, 2.0, 1e-14);
  CHECK(root == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));
  CHECK_THROWS_AS(bisect([](double x) { return x * x + 1.0; }, -1.0, 1.0, 1e-10), Error);
}
