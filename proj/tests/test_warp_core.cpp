#include <doctest.h>

#include <cmath>

#include "cuspforge/error.hpp"
#include "cuspforge/warp_core.hpp"

using namespace cuspforge;

namespace {

// Independent smoothstep cutoff and tube formulas, written out directly.
double oracle_phi(double t, double r) {
  if (t <= 1.0) return 1.0;
  if (t >= r) return 0.0;
  const double u = (t - 1.0) / (r - 1.0);
  return 1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
}

double oracle_s(double t, double r) { return 0.5 * (std::exp(t) - oracle_phi(t, r) * std::exp(-t)); }
double oracle_c(double t, double r) { return 0.5 * (std::exp(t) + oracle_phi(t, r) * std::exp(-t)); }

}  // namespace

TEST_CASE("cutoff invariants on a dense grid") {
  for (double eps : {1.0, 0.3, 0.1}) {
    const CutoffProfile cut = make_cutoff(eps);
    const double r = cut.r_eps();
    REQUIRE(r > 1.0);
    CHECK(cut.eval(0.5) == 1.0);
    CHECK(cut.eval(r + 1.0) == 0.0);
    CHECK(cut.deriv1(1.0) == 0.0);
    CHECK(cut.deriv2(1.0) == 0.0);
    CHECK(std::fabs(cut.deriv1(r)) < 1e-14);
    CHECK(std::fabs(cut.deriv2(r)) < 1e-12);
    for (double t = 0.0; t <= r + 2.0; t += 1e-3) {
      CHECK(cut.eval(t) >= 0.0);
      CHECK(cut.eval(t) <= 1.0);
      CHECK(cut.deriv1(t) <= 0.0);
      CHECK(cut.eval(t) == doctest::Approx(oracle_phi(t, r)).epsilon(1e-13));
    }
  }
}

TEST_CASE("cutoff derivatives agree with central differences") {
  const CutoffProfile cut(4.0, 0.1);
  const double h = 1e-5;
  for (double t = 1.1; t < 3.95; t += 0.17) {
    const double d1 = (oracle_phi(t + h, 4.0) - oracle_phi(t - h, 4.0)) / (2 * h);
    const double d2 = (oracle_phi(t + h, 4.0) - 2 * oracle_phi(t, 4.0) + oracle_phi(t - h, 4.0)) / (h * h);
    CHECK(cut.deriv1(t) == doctest::Approx(d1).epsilon(1e-7));
    CHECK(cut.deriv2(t) == doctest::Approx(d2).epsilon(1e-4));
  }
}

TEST_CASE("make_cutoff: r_eps nondecreasing as eps shrinks, eps validated") {
  double prev = 0.0;
  for (double eps : {1.0, 0.5, 0.2, 0.1, 0.05, 0.01}) {
    const double r = make_cutoff(eps).r_eps();
    CHECK(r >= prev);
    prev = r;
  }
  CHECK_THROWS(make_cutoff(0.0));
  CHECK_THROWS(make_cutoff(1.5));
}

TEST_CASE("make_cutoff reports infeasibility under a low ceiling") {
  CutoffOptions opts;
  opts.r_ceiling = 1.5;
  CHECK_THROWS_AS(make_cutoff(0.01, opts), InfeasibleError);
}

TEST_CASE("tube profile closing conditions and exact regions") {
  const CutoffProfile cut = make_cutoff(0.1);
  const WarpProfile w = tube_profile(cut);
  const WarpSample z = w.at(0.0);
  CHECK(z.s == 0.0);
  CHECK(z.ds == 1.0);
  CHECK(z.c == 1.0);
  CHECK(z.dc == 0.0);
  CHECK(w.closes_at_zero());

  const double r = cut.r_eps();
  const WarpSample tail = w.at(r + 1.0);
  CHECK(tail.s == std::exp(r + 1.0) / 2.0);
  CHECK(tail.c == std::exp(r + 1.0) / 2.0);
  for (double t : {0.2, 0.7, 1.0}) {
    CHECK(w.at(t).s == doctest::Approx(std::sinh(t)).epsilon(1e-15));
    CHECK(w.at(t).c == doctest::Approx(std::cosh(t)).epsilon(1e-15));
  }
}

TEST_CASE("tube identities and monotonicity on a dense grid") {
  const CutoffProfile cut = make_cutoff(0.1);
  const WarpProfile w = tube_profile(cut);
  const double r = cut.r_eps();
  for (double t = 0.0; t <= r + 3.0; t += 1e-3) {
    const WarpSample x = w.at(t);
    CHECK(std::fabs(x.c * x.c - x.s * x.s - cut.eval(t)) <= 1e-12 * x.c * x.c);
    CHECK(std::fabs(x.c + x.s - std::exp(t)) <= 1e-12 * std::exp(t));
    CHECK(x.s == doctest::Approx(oracle_s(t, r)).epsilon(1e-12));
    CHECK(x.c == doctest::Approx(oracle_c(t, r)).epsilon(1e-12));
    CHECK(x.c > 0.0);
    if (t > 0.0) {
      CHECK(x.s > 0.0);
      CHECK(x.ds > 0.0);
    }
  }
}

TEST_CASE("tube derivatives agree with central differences of the oracle") {
  const CutoffProfile cut = make_cutoff(0.1);
  const WarpProfile w = tube_profile(cut);
  const double r = cut.r_eps();
  const double h = 1e-5;
  for (double t = 0.3; t < r + 1.0; t += 0.13) {
    const double ds = (oracle_s(t + h, r) - oracle_s(t - h, r)) / (2 * h);
    const double dc = (oracle_c(t + h, r) - oracle_c(t - h, r)) / (2 * h);
    const double d2c = (oracle_c(t + h, r) - 2 * oracle_c(t, r) + oracle_c(t - h, r)) / (h * h);
    CHECK(w.at(t).ds == doctest::Approx(ds).epsilon(1e-8));
    CHECK(w.at(t).dc == doctest::Approx(dc).epsilon(1e-7));
    CHECK(w.at(t).d2c == doctest::Approx(d2c).epsilon(1e-3));
  }
}

TEST_CASE("hyperbolic n=3: both available plane families give -1") {
  const WarpProfile w = hyperbolic_profile();
  const SectionalReport r = sectional_curvatures(w, 1.0, 3);
  REQUIRE(r.K_t_phi);
  REQUIRE(r.K_t_U);
  REQUIRE(r.K_phi_U);
  CHECK_FALSE(r.K_U_V);
  CHECK(*r.K_t_phi == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(*r.K_t_U == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(*r.K_phi_U == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("hyperbolic n=4: K_U_V = -tanh^2") {
  const SectionalReport r = sectional_curvatures(hyperbolic_profile(), 1.0, 4);
  REQUIRE(r.K_U_V);
  CHECK(*r.K_U_V == doctest::Approx(-std::pow(std::tanh(1.0), 2)).epsilon(1e-14));
}

TEST_CASE("flat cylinder and exponential tail") {
  for (double t : {0.3, 1.0, 4.0}) {
    for (double k : sectional_curvatures(flat_profile(), t, 4).defined()) CHECK(k == 0.0);
  }
  const SectionalReport e = sectional_curvatures(exponential_profile(), 2.0, 5);
  CHECK(e.defined().size() == 4);
  for (double k : e.defined()) CHECK(k == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("limit at the axis uses the closing data") {
  const WarpProfile w = tube_profile(make_cutoff(0.1));
  for (double t : {0.0, 1e-10, 1e-9}) {
    const SectionalReport r = sectional_curvatures(w, t, 4);
    CHECK(*r.K_t_phi == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(*r.K_phi_U == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(*r.K_t_U == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(std::fabs(*r.K_U_V) < 1e-9);
  }
}

TEST_CASE("ricci values are the stated sums") {
  const WarpProfile w = tube_profile(make_cutoff(0.1));
  for (int n : {4, 5, 6}) {
    for (double t = 0.05; t < 6.0; t += 0.31) {
      const SectionalReport r = sectional_curvatures(w, t, n);
      CHECK(std::fabs(*r.ric_t - (*r.K_t_phi + (n - 2) * *r.K_t_U)) <= 1e-12);
      CHECK(std::fabs(*r.ric_phi - (*r.K_t_phi + (n - 2) * *r.K_phi_U)) <= 1e-12);
      CHECK(std::fabs(*r.ric_U - (*r.K_t_U + *r.K_phi_U + (n - 3) * *r.K_U_V)) <= 1e-12);
    }
  }
}

TEST_CASE("frame curvature matrix matches the report") {
  const WarpProfile w = tube_profile(make_cutoff(0.1));
  const SectionalReport r = sectional_curvatures(w, 1.7, 5);
  const Eigen::MatrixXd K = frame_curvatures(w, 1.7, 5);
  CHECK(K(0, 1) == *r.K_t_phi);
  CHECK(K(0, 3) == *r.K_t_U);
  CHECK(K(1, 4) == *r.K_phi_U);
  CHECK(K(2, 3) == *r.K_U_V);
  CHECK((K - K.transpose()).norm() == 0.0);
}

TEST_CASE("pinching: constant tail and hyperbolic space") {
  const PinchingCertificate tail =
      certify_pinching(exponential_profile(), 4, 5.0, 10.0, {-1.0, -1.0}, 2.5e-4, 1e-9);
  CHECK(tail.pass);
  CHECK(tail.K_min == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(tail.K_max == doctest::Approx(-1.0).epsilon(1e-12));

  const PinchingCertificate hyp = certify_pinching(hyperbolic_profile(), 4, 0.0, 5.0, {-1.0, 0.0});
  CHECK(hyp.pass);
  CHECK(hyp.K_min == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(hyp.K_max == 0.0);
}

TEST_CASE("pinching: designed tube uses its budget") {
  const CutoffProfile cut = make_cutoff(0.1);
  const WarpProfile w = tube_profile(cut);
  const double b = cut.r_eps() + 2.0;
  const PinchingCertificate ok = certify_pinching(w, 4, 0.0, b, {-1.1, 0.0});
  CHECK(ok.pass);
  CHECK(ok.bound_lo >= -1.1 - 1e-6);
  CHECK(ok.bound_hi <= 1e-6);
  const PinchingCertificate tight = certify_pinching(w, 4, 0.0, b, {-1.0, 0.0});
  CHECK_FALSE(tight.pass);
  REQUIRE(tight.first_violation_t);
  CHECK(tight.K_min < -1.0);
  // the margin may flag the grid segment straddling t = 1
  CHECK(*tight.first_violation_t >= 1.0 - 2 * tight.grid_step);
  CHECK(*tight.first_violation_t < cut.r_eps());
  CHECK_THROWS(certify_pinching(w, 4, 0.0, w.t_max() + 1.0, {-1.1, 0.0}));
}

TEST_CASE("nonpositive certificate bounds every Ricci value below") {
  const CutoffProfile cut = make_cutoff(0.1);
  const WarpProfile w = tube_profile(cut);
  const PinchingCertificate c = certify_pinching(w, 4, 0.0, cut.r_eps() + 2.0, {-1.1, 0.0});
  REQUIRE(c.pass);
  for (const ProfileRow& row : profile_grid(w, 4, 0.0, cut.r_eps() + 2.0, 0.01)) {
    CHECK(*row.K.ric_t >= 3 * c.K_min - 1e-12);
    CHECK(*row.K.ric_phi >= 3 * c.K_min - 1e-12);
    CHECK(*row.K.ric_U >= 3 * c.K_min - 1e-12);
  }
}

TEST_CASE("channel profile: waist, convexity, tail") {
  const CutoffProfile cut = make_cutoff(0.1);
  const double beta = 0.25;
  const WarpProfile w = channel_profile(cut, beta);
  CHECK(w.at(0.0).c == beta);
  CHECK(w.at(0.0).dc == 0.0);
  for (double t = -cut.r_eps() - 2.0; t <= cut.r_eps() + 2.0; t += 1e-2) {
    CHECK(w.at(t).d2c > 0.0);
    CHECK(w.at(t).c == doctest::Approx(w.at(-t).c).epsilon(1e-15));
  }
  const WarpSample tail = w.at(cut.r_eps() + 0.5);
  CHECK(tail.dc == doctest::Approx(tail.c).epsilon(1e-15));
  CHECK(tail.c == doctest::Approx(beta * std::exp(cut.r_eps() + 0.5) / 2.0).epsilon(1e-15));
  const SectionalReport z = sectional_curvatures(w, 0.0, 4);
  CHECK(*z.K_t_U == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(*z.K_U_V == 0.0);
  CHECK_FALSE(z.K_t_phi);
}
