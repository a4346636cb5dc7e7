#include "cuspforge/warp_core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "cuspforge/error.hpp"

namespace cuspforge {

namespace {

// Largest t for which e^t stays finite with headroom for products.
constexpr double kMaxT = 700.0;  // e^t stays finite in double precision
// Below this, -s''/s and -s'c'/(sc) use the Taylor expansion of s at 0.
constexpr double kTaylorCutoff = 1e-8;

// Quintic smoothstep complement psi(u) = 1 - (10u^3 - 15u^4 + 6u^5).
double psi(double u) { return 1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u); }
double psi1(double u) { return -30.0 * u * u * (1.0 - u) * (1.0 - u); }
double psi2(double u) { return -60.0 * u * (1.0 - u) * (1.0 - 2.0 * u); }

}  // namespace

CutoffProfile::CutoffProfile(double r_eps, double eps_budget)
    : r_eps_(r_eps), eps_budget_(eps_budget) {
  if (!(r_eps > 1.0)) throw Error("CutoffProfile: r_eps must exceed 1");
  if (!(eps_budget > 0.0)) throw Error("CutoffProfile: eps budget must be positive");
}

double CutoffProfile::eval(double t) const {
  if (t <= 1.0) return 1.0;
  if (t >= r_eps_) return 0.0;
  return psi((t - 1.0) / (r_eps_ - 1.0));
}

double CutoffProfile::deriv1(double t) const {
  if (t <= 1.0 || t >= r_eps_) return 0.0;
  return psi1((t - 1.0) / (r_eps_ - 1.0)) / (r_eps_ - 1.0);
}

double CutoffProfile::deriv2(double t) const {
  if (t <= 1.0 || t >= r_eps_) return 0.0;
  const double w = r_eps_ - 1.0;
  return psi2((t - 1.0) / w) / (w * w);
}

std::string to_string(WarpKind kind) {
  switch (kind) {
    case WarpKind::tube:
      return "tube";
    case WarpKind::channel:
      return "channel";
    case WarpKind::cusp:
      return "cusp";
  }
  return "unknown";
}

WarpProfile::WarpProfile(WarpKind kind, double t_min, double t_max, Evaluator eval,
                         std::string label)
    : kind_(kind), t_min_(t_min), t_max_(t_max), eval_(std::move(eval)), label_(std::move(label)) {
  if (!(t_max > t_min)) throw Error("WarpProfile: empty domain");
}

WarpSample WarpProfile::at(double t) const { return eval_(t); }

WarpProfile& WarpProfile::with_closing(double s3_at_zero, double c2_at_zero) {
  closes_at_zero_ = true;
  s3_at_zero_ = s3_at_zero;
  c2_at_zero_ = c2_at_zero;
  return *this;
}

WarpProfile& WarpProfile::with_cutoff(double r_eps, double beta) {
  r_eps_ = r_eps;
  beta_ = beta;
  return *this;
}

namespace {

// s and c of the tube at t >= 0, straight from 2c = e^t + phi e^{-t} and
// 2s = e^t - phi e^{-t}, with the sinh/cosh and e^t/2 regions kept exact.
WarpSample tube_sample(const CutoffProfile& cut, double t) {
  WarpSample w;
  w.t = t;
  if (t <= 1.0) {
    const double sh = std::sinh(t);
    const double ch = std::cosh(t);
    w.s = sh;
    w.ds = ch;
    w.d2s = sh;
    w.c = ch;
    w.dc = sh;
    w.d2c = ch;
    return w;
  }
  const double ep = std::exp(t);
  if (t >= cut.r_eps()) {
    const double half = 0.5 * ep;
    w.s = w.ds = w.d2s = half;
    w.c = w.dc = w.d2c = half;
    return w;
  }
  const double em = std::exp(-t);
  const double phi = cut.eval(t);
  const double p1 = cut.deriv1(t);
  const double p2 = cut.deriv2(t);
  // d/dt (phi e^{-t}) = (phi' - phi) e^{-t}; d2/dt2 = (phi'' - 2phi' + phi) e^{-t}
  const double g0 = phi * em;
  const double g1 = (p1 - phi) * em;
  const double g2 = (p2 - 2.0 * p1 + phi) * em;
  w.c = 0.5 * (ep + g0);
  w.dc = 0.5 * (ep + g1);
  w.d2c = 0.5 * (ep + g2);
  w.s = 0.5 * (ep - g0);
  w.ds = 0.5 * (ep - g1);
  w.d2s = 0.5 * (ep - g2);
  return w;
}

}  // namespace

WarpProfile tube_profile(const CutoffProfile& cut) {
  std::ostringstream label;
  label << "tube(r_eps=" << cut.r_eps() << ")";
  WarpProfile w(
      WarpKind::tube, 0.0, kMaxT, [cut](double t) { return tube_sample(cut, std::max(t, 0.0)); },
      label.str());
  w.with_closing(1.0, 1.0).with_cutoff(cut.r_eps());
  return w;
}

WarpProfile channel_profile(const CutoffProfile& cut, double beta) {
  if (!(beta > 0.0)) throw Error("channel_profile: waist beta must be positive");
  std::ostringstream label;
  label << "channel(r_eps=" << cut.r_eps() << ", beta=" << beta << ")";
  WarpProfile w(
      WarpKind::channel, 0.0, kMaxT,
      [cut, beta](double t) {
        const double sign = t < 0.0 ? -1.0 : 1.0;
        const WarpSample base = tube_sample(cut, std::fabs(t));
        WarpSample w;
        w.t = t;
        w.c = beta * base.c;
        w.dc = sign * beta * base.dc;
        w.d2c = beta * base.d2c;
        return w;
      },
      label.str());
  w.with_cutoff(cut.r_eps(), beta);
  return w;
}

WarpProfile hyperbolic_profile(double t_max) {
  WarpProfile w(
      WarpKind::tube, 0.0, t_max,
      [](double t) {
        WarpSample w;
        w.t = t;
        w.s = w.d2s = w.dc = std::sinh(t);
        w.c = w.d2c = w.ds = std::cosh(t);
        return w;
      },
      "sinh/cosh");
  w.with_closing(1.0, 1.0);
  return w;
}

WarpProfile exponential_profile(double t_min, double t_max) {
  return WarpProfile(
      WarpKind::tube, t_min, t_max,
      [](double t) {
        WarpSample w;
        w.t = t;
        const double half = 0.5 * std::exp(t);
        w.s = w.ds = w.d2s = half;
        w.c = w.dc = w.d2c = half;
        return w;
      },
      "exp/2");
}

WarpProfile flat_profile(double t_max) {
  WarpProfile w(
      WarpKind::tube, 0.0, t_max,
      [](double t) {
        WarpSample w;
        w.t = t;
        w.s = t;
        w.ds = 1.0;
        w.c = 1.0;
        return w;
      },
      "flat");
  w.with_closing(0.0, 0.0);
  return w;
}

WarpProfile cusp_profile(double t_max) {
  return WarpProfile(
      WarpKind::cusp, 0.0, t_max,
      [](double t) {
        WarpSample w;
        w.t = t;
        const double f = std::exp(-t);
        w.c = f;
        w.dc = -f;
        w.d2c = f;
        return w;
      },
      "cusp e^-t");
}

std::vector<double> SectionalReport::defined() const {
  std::vector<double> out;
  for (const auto& k : {K_t_phi, K_t_U, K_phi_U, K_U_V})
    if (k) out.push_back(*k);
  return out;
}

SectionalReport sectional_curvatures(const WarpProfile& w, double t, int n) {
  if (n < 3) throw Error("sectional_curvatures: dimension must be at least 3");
  const WarpSample v = w.at(t);
  SectionalReport r;
  r.t = t;
  const double nd = static_cast<double>(n);

  if (w.kind() != WarpKind::tube) {
    // dt^2 + c^2 dsigma^2 on R x R^{n-1}
    r.K_t_U = -v.d2c / v.c;
    r.K_U_V = -(v.dc * v.dc) / (v.c * v.c);
    r.ric_t = (nd - 1.0) * *r.K_t_U;
    r.ric_U = *r.K_t_U + (nd - 2.0) * *r.K_U_V;
    return r;
  }

  if (w.closes_at_zero() && t < kTaylorCutoff) {
    // s = t + a t^3/6 + O(t^5), c' = c''(0) t + O(t^3)
    const double a = w.s3_at_zero();
    const double tt = t * t;
    r.K_t_phi = -a / (1.0 + a * tt / 6.0);
    r.K_phi_U = -w.c2_at_zero() * (1.0 + a * tt / 2.0) / ((1.0 + a * tt / 6.0) * v.c);
  } else {
    r.K_t_phi = -v.d2s / v.s;
    r.K_phi_U = -(v.ds * v.dc) / (v.s * v.c);
  }
  r.K_t_U = -v.d2c / v.c;
  if (n >= 4) r.K_U_V = -(v.dc * v.dc) / (v.c * v.c);

  const double kuv = r.K_U_V.value_or(0.0);
  r.ric_t = *r.K_t_phi + (nd - 2.0) * *r.K_t_U;
  r.ric_phi = *r.K_t_phi + (nd - 2.0) * *r.K_phi_U;
  r.ric_U = *r.K_t_U + *r.K_phi_U + (nd - 3.0) * kuv;
  return r;
}

Eigen::MatrixXd frame_curvatures(const WarpProfile& w, double t, int n) {
  const SectionalReport r = sectional_curvatures(w, t, n);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  auto set = [&K](int i, int j, double v) {
    K(i, j) = v;
    K(j, i) = v;
  };
  if (w.kind() == WarpKind::tube) {
    set(0, 1, *r.K_t_phi);
    for (int u = 2; u < n; ++u) {
      set(0, u, *r.K_t_U);
      set(1, u, *r.K_phi_U);
      for (int v = u + 1; v < n; ++v) set(u, v, *r.K_U_V);
    }
  } else {
    for (int u = 1; u < n; ++u) {
      set(0, u, *r.K_t_U);
      for (int v = u + 1; v < n; ++v) set(u, v, *r.K_U_V);
    }
  }
  return K;
}

PinchingCertificate certify_pinching(const WarpProfile& w, int n, double a, double b,
                                     PinchingTarget target, double grid_step, double tolerance) {
  if (!(grid_step > 0.0)) throw Error("certify_pinching: grid step must be positive");
  if (!(b > a)) throw Error("certify_pinching: empty interval");
  if (a < w.t_min() || b > w.t_max()) {
    std::ostringstream msg;
    msg << "certify_pinching: interval [" << a << ", " << b << "] exceeds profile domain ["
        << w.t_min() << ", " << w.t_max() << "]";
    throw Error(msg.str());
  }

  const long segments = static_cast<long>(std::ceil((b - a) / grid_step));
  const double h = (b - a) / static_cast<double>(segments);
  const long points = segments + 1;

  // series[k][i]: k-th plane curvature at grid point i
  std::array<std::vector<double>, 4> series;
  std::array<bool, 4> present{};
  for (long i = 0; i < points; ++i) {
    const double t = (i == segments) ? b : a + h * static_cast<double>(i);
    const SectionalReport r = sectional_curvatures(w, t, n);
    const std::array<std::optional<double>, 4> ks{r.K_t_phi, r.K_t_U, r.K_phi_U, r.K_U_V};
    for (int k = 0; k < 4; ++k) {
      if (!ks[k]) continue;
      present[k] = true;
      if (series[k].empty()) series[k].reserve(static_cast<std::size_t>(points));
      series[k].push_back(*ks[k]);
    }
  }

  PinchingCertificate cert;
  cert.a = a;
  cert.b = b;
  cert.grid_step = h;
  cert.samples = points;
  cert.target = target;
  cert.tolerance = tolerance;
  cert.K_min = INFINITY;
  cert.K_max = -INFINITY;
  cert.bound_lo = INFINITY;
  cert.bound_hi = -INFINITY;
  double first_bad = INFINITY;

  for (int k = 0; k < 4; ++k) {
    if (!present[k]) continue;
    const std::vector<double>& f = series[k];
    std::vector<double> slope(static_cast<std::size_t>(segments));
    for (long i = 0; i < segments; ++i) slope[i] = std::fabs(f[i + 1] - f[i]) / h;
    for (long i = 0; i < points; ++i) {
      cert.K_min = std::min(cert.K_min, f[i]);
      cert.K_max = std::max(cert.K_max, f[i]);
    }
    for (long i = 0; i < segments; ++i) {
      double local = slope[i];
      if (i > 0) local = std::max(local, slope[i - 1]);
      if (i + 1 < segments) local = std::max(local, slope[i + 1]);
      const double lipschitz = 2.0 * local;
      const double margin = lipschitz * h / 2.0;
      const double mid = 0.5 * (f[i] + f[i + 1]);
      const double hi = std::max({f[i], f[i + 1], mid + margin});
      const double lo = std::min({f[i], f[i + 1], mid - margin});
      cert.margin = std::max(cert.margin, margin);
      cert.bound_lo = std::min(cert.bound_lo, lo);
      cert.bound_hi = std::max(cert.bound_hi, hi);
      if (hi > target.hi + tolerance || lo < target.lo - tolerance)
        first_bad = std::min(first_bad, a + h * static_cast<double>(i));
    }
  }
  cert.pass = std::isinf(first_bad) && std::isfinite(cert.K_min);
  if (!std::isinf(first_bad)) cert.first_violation_t = first_bad;
  return cert;
}

CutoffProfile make_cutoff(double eps, const CutoffOptions& opts) {
  if (!(eps > 0.0) || eps > 1.0) throw Error("make_cutoff: eps must lie in (0, 1]");
  constexpr double kFloor = 1.001;

  auto passes = [&](double r) {
    const WarpProfile w = tube_profile(CutoffProfile(r, eps));
    return certify_pinching(w, 4, 0.0, r + 2.0, {-1.0 - eps, 0.0}, opts.grid_step,
                            opts.tolerance)
        .pass;
  };

  double r = std::min(4.0 / eps, opts.r_ceiling);
  double pass_r = 0.0;
  std::optional<double> fail_r;

  if (passes(r)) {
    pass_r = r;
    while (true) {
      const double cand = std::max(pass_r / 2.0, kFloor);
      if (cand >= pass_r) break;
      if (passes(cand)) {
        pass_r = cand;
      } else {
        fail_r = cand;
        break;
      }
    }
  } else {
    fail_r = r;
    while (true) {
      r *= 2.0;
      if (r > opts.r_ceiling) {
        std::ostringstream msg;
        msg << "make_cutoff: no r_eps <= " << opts.r_ceiling << " certifies K in [" << -1.0 - eps
            << ", 0]";
        throw InfeasibleError(msg.str());
      }
      if (passes(r)) {
        pass_r = r;
        break;
      }
      fail_r = r;
    }
  }

  if (fail_r) {
    double lo = *fail_r;
    while (pass_r - lo > opts.refine_rel * pass_r) {
      const double mid = 0.5 * (lo + pass_r);
      if (passes(mid))
        pass_r = mid;
      else
        lo = mid;
    }
  }
  return CutoffProfile(pass_r, eps);
}

std::vector<ProfileRow> profile_grid(const WarpProfile& w, int n, double a, double b,
                                     double step) {
  if (!(step > 0.0) || !(b >= a)) throw Error("profile_grid: bad grid");
  const long segments = std::max(1L, static_cast<long>(std::llround((b - a) / step)));
  std::vector<ProfileRow> rows;
  rows.reserve(static_cast<std::size_t>(segments + 1));
  for (long i = 0; i <= segments; ++i) {
    const double t = a + (b - a) * static_cast<double>(i) / static_cast<double>(segments);
    rows.push_back({w.at(t), sectional_curvatures(w, t, n)});
  }
  return rows;
}

}  // namespace cuspforge
