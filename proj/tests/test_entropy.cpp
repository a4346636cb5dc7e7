#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cuspforge/entropy.hpp"
#include "cuspforge/error.hpp"

using namespace cuspforge;

namespace {

FlatLattice golden() {
  Eigen::MatrixXd B(3, 3);
  B << 1.0, 0.0, 0.0, 0.3, 1.2, 0.0, 0.1, 0.2, 1.5;
  return FlatLattice(B);
}

ManifoldAssembly golden_assembly() { return assemble(100.0, {golden()}, 0.1, 4, AssemblyMode::close); }

ManifoldAssembly core_only(int n) {
  ManifoldAssembly a;
  a.n = n;
  a.eps = 0.1;
  a.core_volume = 10.0;
  a.total_volume = 10.0;
  a.w_volume = 10.0;
  a.w_fraction = 1.0;
  a.conditions.curvature = true;
  return a;
}

// Hyperbolic ball volume by brute Simpson in the linear domain, for small r.
double ball_volume(int n, double r) {
  const double sphere = 2 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
  const int panels = 20000;
  const double h = r / panels;
  double sum = 0.0;
  for (int i = 0; i <= panels; ++i) {
    const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * std::pow(std::sinh(h * i), n - 1);
  }
  return sphere * sum * h / 3.0;
}

}  // namespace

TEST_CASE("core-only assembly gives exactly n-1") {
  for (int n : {3, 4, 6}) {
    const EntropyCertificate c = bw_bound(core_only(n), 1000, 1);
    CHECK(c.bw_integral == static_cast<double>(n - 1));
    CHECK(c.mc_stderr == 0.0);
    CHECK(c.mc_samples == 0);
  }
}

TEST_CASE("golden fixture: W contribution, cap and determinism") {
  const ManifoldAssembly a = golden_assembly();
  const EntropyCertificate c = bw_bound(a, 20000, 42);
  CHECK(c.bw_integral >= 3.0 * a.w_fraction - 3.0 * c.mc_stderr);
  CHECK(c.bw_integral >= 3.0 * 0.9 - 3.0 * c.mc_stderr);
  CHECK(c.bw_integral <= 3.0 * std::sqrt(1.1) + 1e-6);
  CHECK(c.integrand_max <= 3.0 * std::sqrt(1.1) + 1e-6);
  for (const RegionEstimate& r : c.regions) CHECK(r.integrand_min >= 0.0);

  const EntropyCertificate d = bw_bound(a, 20000, 42);
  CHECK(d.bw_integral == c.bw_integral);
  CHECK(d.mc_stderr == c.mc_stderr);
  const EntropyCertificate e = bw_bound(a, 20000, 43);
  CHECK(e.bw_integral != c.bw_integral);
}

TEST_CASE("stderr scales like 1/sqrt(samples)") {
  const ManifoldAssembly a = golden_assembly();
  const double s1 = bw_bound(a, 10000, 42).mc_stderr;
  const double s4 = bw_bound(a, 40000, 42).mc_stderr;
  REQUIRE(s4 > 0.0);
  const double ratio = s1 / s4;
  CHECK(ratio > 2.0 / 1.5);
  CHECK(ratio < 2.0 * 1.5);
}

TEST_CASE("bw_bound refuses uncertified assemblies") {
  ManifoldAssembly a = core_only(4);
  a.conditions.curvature = false;
  CHECK_THROWS_AS(bw_bound(a, 100, 1), Error);
}

TEST_CASE("rescaling law") {
  EntropyCertificate c;
  c.n = 4;
  c.bound_before = 2.7;
  const EntropyCertificate same = rescale_bound(c, 0.0);
  CHECK(same.lambda == 1.0);
  CHECK(same.bound_after == 2.7);
  const EntropyCertificate r = rescale_bound(c, 0.1);
  CHECK(r.lambda == std::sqrt(1.1));
  CHECK(r.bound_after == 2.7 / std::sqrt(1.1));
  CHECK(r.eps_bar == doctest::Approx(3.0 * (1.0 - 0.9 / std::sqrt(1.1))).epsilon(1e-15));
}

TEST_CASE("eps_bar strictly decreases toward 0") {
  double prev = INFINITY;
  for (double eps : {0.2, 0.1, 0.05, 0.01}) {
    const double e = eps_bar(4, eps);
    CHECK(e < prev);
    prev = e;
  }
  CHECK(prev < 0.02 * 3);
  CHECK(eps_bar(4, 1e-9) < 1e-8);
}

TEST_CASE("model volume entropy") {
  CHECK(std::fabs(model_volume_entropy(2, 30.0) - 1.0) < 0.1);
  CHECK(std::fabs(model_volume_entropy(4, 30.0) - 3.0) < 0.1);
  CHECK(model_volume_entropy(4, 12.0) ==
        doctest::Approx(std::log(ball_volume(4, 12.0)) / 12.0).epsilon(1e-9));
  double prev = -INFINITY;
  for (double r = 10.0; r <= 200.0; r += 10.0) {
    const double h = model_volume_entropy(4, r);
    CHECK(h > prev);
    CHECK(h < 3.0);
    prev = h;
  }
  CHECK(std::isfinite(model_volume_entropy(8, 500.0)));
  CHECK_THROWS(model_volume_entropy(4, 5.0));
}

TEST_CASE("chain report wording") {
  EntropyCertificate core = rescale_bound(bw_bound(core_only(4), 10, 1), 0.0);
  const std::string ok = entropy_chain_report(core);
  CHECK(ok.find("h_v >= 3") != std::string::npos);

  const ManifoldAssembly a = golden_assembly();
  const EntropyCertificate g = rescale_bound(bw_bound(a, 5000, 42), 0.1);
  std::ostringstream expect;
  expect.precision(10);
  expect << "h_v >= " << g.bound_after;
  CHECK(entropy_chain_report(g).find(expect.str()) != std::string::npos);

  core.pinching_certified = false;
  const std::string refused = entropy_chain_report(core);
  CHECK(refused.find("REFUSED") != std::string::npos);
  CHECK(refused.find("h_v >=") == std::string::npos);
}
