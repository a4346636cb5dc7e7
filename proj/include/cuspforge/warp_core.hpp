#pragma once

// Warp-function pairs for the metric dt^2 + s(t)^2 dphi^2 + c(t)^2 dsigma^2,
// the smooth cutoff that interpolates them from sinh/cosh to e^t/2, their
// closed-form sectional/Ricci curvatures, and grid-based pinching
// certificates.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cuspforge {

/// Smooth nonincreasing cutoff: 1 on [0, 1], 0 on [r_eps, inf), quintic
/// smoothstep in between (C^2 joins at both ends).
class CutoffProfile {
 public:
  CutoffProfile(double r_eps, double eps_budget);

  double r_eps() const { return r_eps_; }
  double eps_budget() const { return eps_budget_; }

  double eval(double t) const;
  double deriv1(double t) const;
  double deriv2(double t) const;

 private:
  double r_eps_;
  double eps_budget_;
};

struct CutoffOptions {
  double r_ceiling = 650.0;
  double grid_step = 2.5e-4;
  double tolerance = 1e-6;
  double refine_rel = 0.01;
};

/// Designs a cutoff whose tube profile certifies K in [-1-eps, 0].
/// Throws InfeasibleError if no r_eps below the ceiling passes.
CutoffProfile make_cutoff(double eps, const CutoffOptions& opts = {});

enum class WarpKind { tube, channel, cusp };

std::string to_string(WarpKind kind);

/// Values of the warp functions and their first two derivatives at t.
/// For channel and cusp kinds only the c fields are meaningful.
struct WarpSample {
  double t = 0.0;
  double s = 0.0, ds = 0.0, d2s = 0.0;
  double c = 0.0, dc = 0.0, d2c = 0.0;
};

class WarpProfile {
 public:
  using Evaluator = std::function<WarpSample(double)>;

  WarpProfile(WarpKind kind, double t_min, double t_max, Evaluator eval, std::string label);

  WarpKind kind() const { return kind_; }
  double t_min() const { return t_min_; }
  double t_max() const { return t_max_; }
  const std::string& label() const { return label_; }

  WarpSample at(double t) const;

  /// s(0) = 0 and s'(0) = 1: the circle factor collapses smoothly at t = 0.
  bool closes_at_zero() const { return closes_at_zero_; }
  /// Third derivative s'''(0) and second derivative c''(0), used for the
  /// limit of -s''/s and -s'c'/(sc) as t -> 0.
  double s3_at_zero() const { return s3_at_zero_; }
  double c2_at_zero() const { return c2_at_zero_; }

  /// Set when built by tube_profile / channel_profile.
  std::optional<double> r_eps() const { return r_eps_; }
  double beta() const { return beta_; }

  WarpProfile& with_closing(double s3_at_zero, double c2_at_zero);
  WarpProfile& with_cutoff(double r_eps, double beta = 1.0);

 private:
  WarpKind kind_;
  double t_min_;
  double t_max_;
  Evaluator eval_;
  std::string label_;
  bool closes_at_zero_ = false;
  double s3_at_zero_ = 0.0;
  double c2_at_zero_ = 0.0;
  std::optional<double> r_eps_;
  double beta_ = 1.0;
};

WarpProfile tube_profile(const CutoffProfile& cut);
WarpProfile channel_profile(const CutoffProfile& cut, double beta);

/// s = sinh, c = cosh (hyperbolic space in cylindrical coordinates).
WarpProfile hyperbolic_profile(double t_max = 50.0);
/// s = c = e^t / 2 (constant curvature -1, no closing).
WarpProfile exponential_profile(double t_min = 0.0, double t_max = 50.0);
/// s = t, c = 1 (Euclidean cylindrical coordinates).
WarpProfile flat_profile(double t_max = 50.0);
/// f = e^{-t} horoball cusp, stored in the c slot.
WarpProfile cusp_profile(double t_max = 50.0);

struct SectionalReport {
  double t = 0.0;
  std::optional<double> K_t_phi;
  std::optional<double> K_t_U;
  std::optional<double> K_phi_U;
  std::optional<double> K_U_V;
  std::optional<double> ric_t;
  std::optional<double> ric_phi;
  std::optional<double> ric_U;

  /// Present plane curvatures, in K_t_phi, K_t_U, K_phi_U, K_U_V order.
  std::vector<double> defined() const;
};

SectionalReport sectional_curvatures(const WarpProfile& w, double t, int n);

/// Sectional curvatures of all coordinate planes in the orthonormal frame
/// (e_t, e_phi, e_U1, ...) for tube kind, (e_t, e_U1, ...) otherwise.
/// Entry (i, j) is K(e_i, e_j); the diagonal is zero. The curvature operator
/// of these metrics is diagonal on e_i ^ e_j, so this matrix determines R.
Eigen::MatrixXd frame_curvatures(const WarpProfile& w, double t, int n);

struct PinchingTarget {
  double lo = -1.0;
  double hi = 0.0;
};

struct PinchingCertificate {
  double a = 0.0;
  double b = 0.0;
  double grid_step = 0.0;
  long samples = 0;
  double K_min = 0.0;
  double K_max = 0.0;
  double margin = 0.0;     // largest inter-grid Lipschitz margin applied
  double bound_lo = 0.0;   // smallest margined lower bound
  double bound_hi = 0.0;   // largest margined upper bound
  PinchingTarget target;
  double tolerance = 0.0;
  bool pass = false;
  /// First t where the margined bounds left the target (if any).
  std::optional<double> first_violation_t;
};

PinchingCertificate certify_pinching(const WarpProfile& w, int n, double a, double b,
                                     PinchingTarget target, double grid_step = 2.5e-4,
                                     double tolerance = 1e-6);

/// One row of the profile CSV grid.
struct ProfileRow {
  WarpSample warp;
  SectionalReport K;
};

std::vector<ProfileRow> profile_grid(const WarpProfile& w, int n, double a, double b,
                                     double step);

}  // namespace cuspforge
