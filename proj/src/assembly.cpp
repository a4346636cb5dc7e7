#include "cuspforge/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cuspforge/error.hpp"
#include "cuspforge/quadrature.hpp"

namespace cuspforge {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kCollarDepths = 9;

double rel_diff(double a, double b) {
  const double scale = std::max(std::fabs(a), std::fabs(b));
  return scale == 0.0 ? 0.0 : std::fabs(a - b) / scale;
}

// Simpson over [a, b] split at the cutoff joins, where the integrand is
// only C^2.
double piecewise_simpson(const std::function<double(double)>& f, double a, double b,
                         std::vector<double> breaks, double step) {
  breaks.push_back(a);
  breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double lo = std::max(a, breaks[i]);
    const double hi = std::min(b, breaks[i + 1]);
    if (hi > lo) sum += simpson(f, lo, hi, step);
  }
  return sum;
}

void finish_interface(InterfaceCertificate& cert, double tol) {
  cert.tolerance = tol;
  cert.max_rel_error = 0.0;
  for (const CollarSample& s : cert.samples) cert.max_rel_error = std::max(cert.max_rel_error, s.rel_error);
  cert.pass = cert.max_rel_error <= tol;
}

void check_cusp(const CuspSpec& c, int n) {
  if (c.lattice.rank() != n - 1 || c.lattice.ambient_dim() != n - 1) {
    std::ostringstream msg;
    msg << "cusp lattice must have rank " << n - 1 << " in R^" << n - 1;
    throw LatticeError(msg.str());
  }
  if (c.cut_height < 1.0) {
    std::ostringstream msg;
    msg << "cut height " << c.cut_height << " < 1 leaves no unit collar for gluing";
    throw InfeasibleError(msg.str());
  }
}

}  // namespace

std::string to_string(AssemblyMode mode) { return mode == AssemblyMode::close ? "close" : "double"; }

double cusp_tail_volume(const CuspSpec& c, int n) {
  if (n < 3) throw Error("cusp_tail_volume: dimension must be at least 3");
  const double k = static_cast<double>(n - 1);
  return c.lattice.covolume() * std::exp(-k * c.cut_height) / k;
}

double cusp_tail_volume_quadrature(const CuspSpec& c, int n, double step) {
  if (n < 3) throw Error("cusp_tail_volume: dimension must be at least 3");
  const double k = static_cast<double>(n - 1);
  const double covol = c.lattice.covolume();
  // e^{-k L} < 1e-18 beyond this length.
  const double length = 42.0 / k;
  return simpson([&](double t) { return covol * std::exp(-k * t); }, c.cut_height,
                 c.cut_height + length, step);
}

double cut_height_for_budget(const FlatLattice& lattice, int n, double budget) {
  if (!(budget > 0.0)) throw Error("cut_height_for_budget: budget must be positive");
  if (n < 3) throw Error("cut_height_for_budget: dimension must be at least 3");
  const double k = static_cast<double>(n - 1);
  const double whole = lattice.covolume() / k;
  if (whole <= budget) return 0.0;
  return std::log(whole / budget) / k;
}

double solve_t0(const WarpProfile& tube, double gamma1_length) {
  if (tube.kind() != WarpKind::tube || !tube.r_eps())
    throw Error("solve_t0: needs a tube profile built from a cutoff");
  const double lower = *tube.r_eps() + 1.0;
  const double at_lower = kTwoPi * tube.at(lower).s;
  if (gamma1_length < at_lower * (1.0 - 1e-12)) {
    std::ostringstream msg;
    msg << "solve_t0: |gamma1| = " << gamma1_length << " < 2 pi s(r_eps + 1) = " << at_lower;
    throw Error(msg.str());
  }
  if (gamma1_length <= at_lower) return lower;
  const double upper = std::max(lower, std::log(gamma1_length / std::numbers::pi)) + 1.0;
  if (upper > tube.t_max()) throw Error("solve_t0: |gamma1| beyond the profile domain");
  const double t0 = bisect([&](double t) { return kTwoPi * tube.at(t).s - gamma1_length; }, lower,
                           upper, 1e-15 * upper, 400);
  const double residual = std::fabs(kTwoPi * tube.at(t0).s - gamma1_length);
  if (residual > 1e-10 * gamma1_length) {
    std::ostringstream msg;
    msg << "solve_t0: gluing residual " << residual << " above tolerance";
    throw Error(msg.str());
  }
  return t0;
}

double tube_volume_constant(int n) {
  const double k = static_cast<double>(n - 1);
  return std::exp(k) * std::pow(1.0 + std::exp(-6.0), k) / k;
}

TubeRegion close_cusp(const CuspSpec& c, double eps, int n, const AssemblyOptions& opts) {
  if (n < 3) throw Error("close_cusp: dimension must be at least 3");
  if (n == 3 && !opts.allow_dim3)
    throw Error("close_cusp: n = 3 cusp closing needs the allow-dim3 flag");
  check_cusp(c, n);

  const CutoffProfile cut = make_cutoff(eps, opts.cutoff);
  const WarpProfile prof = tube_profile(cut);
  const double r = cut.r_eps();

  const FlatLattice boundary = rescale(c.lattice, std::exp(-c.cut_height));
  GeneratorSystem gs = greedy_generators(boundary);
  const double l_min = kTwoPi * prof.at(r + 1.0).s;
  choose_k(gs, boundary, l_min, opts.swap_form);
  const double len = gs.gamma1.norm;
  const double t0 = solve_t0(prof, len);
  const double c_t0 = prof.at(t0).c;
  const FlatLattice delta = rescale(project_delta(gs), 1.0 / c_t0);

  auto density = [&](double t) {
    const WarpSample w = prof.at(t);
    return kTwoPi * w.s * std::pow(w.c, n - 2);
  };
  const std::vector<double> breaks{1.0, r};
  const double dvol = delta.covolume();

  TubeRegion tube{prof,
                  cut,
                  c.cut_height,
                  boundary,
                  gs,
                  len,
                  l_min,
                  t0,
                  std::log(len / std::numbers::pi),
                  delta,
                  0.0,
                  0.0,
                  0.0,
                  boundary.covolume(),
                  tube_volume_constant(n),
                  {},
                  {},
                  {}};
  tube.volume = dvol * piecewise_simpson(density, 0.0, t0 + 1.0, breaks, opts.quad_step);
  tube.volume_refined =
      dvol * piecewise_simpson(density, 0.0, t0 + 1.0, breaks, opts.quad_step / 2.0);
  tube.constant_curvature_volume = dvol * simpson(density, r, t0 + 1.0, opts.quad_step);
  tube.pinching = certify_pinching(prof, n, 0.0, t0 + 1.0, {-1.0 - eps, 0.0},
                                   opts.pinch_grid_step, opts.pinch_tol);

  // Collar: depth u past the cut <-> tube radius t0 - u.
  InterfaceCertificate& ic = tube.interface;
  ic.name = "cusp collar <-> tube (t0-1, t0)";
  const Eigen::VectorXd ghat = gs.gamma1.vec / len;
  for (int i = 1; i <= kCollarDepths; ++i) {
    const double u = 0.1 * i;
    const WarpSample w = prof.at(t0 - u);
    const double cusp_scale = std::exp(-u);
    {
      const double a = cusp_scale * len;
      const double b = kTwoPi * w.s;
      ic.samples.push_back({u, "gamma1", a, b, rel_diff(a, b)});
    }
    for (std::size_t j = 1; j < gs.alphas.size(); ++j) {
      const Eigen::VectorXd& alpha = gs.alphas[j].vec;
      const double along = alpha.dot(ghat);
      const double across = (alpha - along * ghat).norm();
      const double sigma_len = delta.basis().row(static_cast<long>(j - 1)).norm();
      const double a = cusp_scale * across;
      const double b = w.c * sigma_len;
      ic.samples.push_back(
          {u, "delta[" + std::to_string(j - 1) + "]", a, b, rel_diff(a, b)});
      if (std::fabs(along) > 1e-14 * alpha.norm()) {
        // Screw part: Delta also rotates the circle by angle 2 pi along / |gamma1|.
        const double angle = kTwoPi * along / len;
        const double ra = cusp_scale * along;
        const double rb = w.s * angle;
        ic.samples.push_back(
            {u, "delta[" + std::to_string(j - 1) + "].rotation", ra, rb, rel_diff(ra, rb)});
      }
    }
  }
  finish_interface(ic, opts.glue_tol);

  tube.witness.rank = n - 1;
  tube.witness.description = "Z x Z^" + std::to_string(n - 2) +
                             " = <gamma1> x Delta acting on the core torus of the tube";
  tube.witness.generators.push_back(gs.gamma1.coeffs);
  for (std::size_t j = 1; j < gs.alphas.size(); ++j)
    tube.witness.generators.push_back(gs.alphas[j].coeffs);
  return tube;
}

ChannelRegion double_channel(const CuspSpec& c, double eps, int n, const AssemblyOptions& opts) {
  if (n < 3) throw Error("double_channel: dimension must be at least 3");
  check_cusp(c, n);
  const CutoffProfile cut = make_cutoff(eps, opts.cutoff);
  const double r = cut.r_eps();
  const double t0 = r + 1.0;
  const double beta = 2.0 * std::exp(-(c.cut_height + t0));
  const WarpProfile prof = channel_profile(cut, beta);

  const double covol = c.lattice.covolume();
  auto density = [&](double t) { return covol * std::pow(prof.at(t).c, n - 1); };
  const std::vector<double> breaks{1.0, r};

  ChannelRegion ch{prof, cut, c.cut_height, c.lattice, beta, t0, 0.0, 0.0, 0.0, 0.0, {}, {}, {}};
  ch.half_volume = piecewise_simpson(density, 0.0, t0 + 1.0, breaks, opts.quad_step);
  ch.volume = 2.0 * ch.half_volume;
  ch.volume_refined =
      2.0 * piecewise_simpson(density, 0.0, t0 + 1.0, breaks, opts.quad_step / 2.0);
  ch.constant_curvature_volume = 2.0 * simpson(density, r, t0 + 1.0, opts.quad_step);
  ch.pinching = certify_pinching(prof, n, 0.0, t0 + 1.0, {-1.0 - eps, 0.0},
                                 opts.pinch_grid_step, opts.pinch_tol);

  InterfaceCertificate& ic = ch.interface;
  ic.name = "mirror collars (+-(t0-1), +-t0) <-> cusp collars";
  for (const double side : {1.0, -1.0}) {
    const std::string tag = side > 0 ? "+" : "-";
    for (int i = 1; i <= kCollarDepths; ++i) {
      const double u = 0.1 * i;
      const double cw = prof.at(side * (t0 - u)).c;
      const double f = std::exp(-(c.cut_height + u));
      for (int j = 0; j < c.lattice.rank(); ++j) {
        const double len = c.lattice.basis().row(j).norm();
        const double a = f * len;
        const double b = cw * len;
        ic.samples.push_back({u, tag + "sigma[" + std::to_string(j) + "]", a, b, rel_diff(a, b)});
      }
    }
  }
  finish_interface(ic, opts.glue_tol);

  ch.witness.rank = n - 1;
  ch.witness.description =
      "Z^" + std::to_string(n - 1) + " = Gamma, fundamental group of the flat totally geodesic waist torus";
  for (int j = 0; j < c.lattice.rank(); ++j) {
    std::vector<std::int64_t> e(static_cast<std::size_t>(c.lattice.rank()), 0);
    e[static_cast<std::size_t>(j)] = 1;
    ch.witness.generators.push_back(e);
  }
  return ch;
}

double cusp_budget(double core_volume, std::size_t cusp_count, double eps, int n) {
  return eps * core_volume /
         (2.0 * static_cast<double>(std::max<std::size_t>(cusp_count, 1)) *
          static_cast<double>(n - 1) * tube_volume_constant(n));
}

namespace {

std::vector<CuspSpec> cut_cusps(double core_volume, const std::vector<FlatLattice>& lattices,
                                double eps, int n, const AssemblyOptions& opts) {
  std::vector<CuspSpec> cusps;
  const double budget = cusp_budget(core_volume, lattices.size(), eps, n);
  for (const FlatLattice& L : lattices) {
    double T = opts.cut_height ? *opts.cut_height
                               : std::max(cut_height_for_budget(L, n, budget), 1.0);
    cusps.push_back({L, T});
  }
  return cusps;
}

void validate_inputs(double core_volume, double eps, int n) {
  if (n < 3) throw Error("assemble: dimension must be at least 3");
  if (!(eps > 0.0) || eps > 1.0) throw Error("assemble: eps must lie in (0, 1]");
  if (!(core_volume > 0.0)) throw Error("assemble: core volume must be positive");
}

void finish_ledger(ManifoldAssembly& a) {
  double regions = 0.0;
  double w = a.core_volume * a.core_copies;
  bool curvature = true;
  bool interfaces = true;
  int best_rank = 0;
  for (const TubeRegion& t : a.tubes) {
    regions += t.volume;
    w += t.constant_curvature_volume;
    curvature = curvature && t.pinching.pass;
    interfaces = interfaces && t.interface.pass;
    best_rank = std::max(best_rank, t.witness.rank);
  }
  for (const ChannelRegion& c : a.channels) {
    regions += c.volume;
    w += c.constant_curvature_volume;
    curvature = curvature && c.pinching.pass;
    interfaces = interfaces && c.interface.pass;
    best_rank = std::max(best_rank, c.witness.rank);
  }
  a.region_volume_sum = regions;
  a.total_volume = a.core_volume * a.core_copies + regions;
  a.w_volume = w;
  a.w_fraction = w / a.total_volume;
  a.core_fraction = a.core_volume * a.core_copies / a.total_volume;

  TheoremConditions& c = a.conditions;
  c.curvature = curvature;
  c.interfaces = interfaces;
  c.volume_checked = a.volume_bound.has_value();
  c.volume = !a.volume_bound || a.total_volume <= *a.volume_bound;
  c.w_fraction = a.w_fraction >= 1.0 - a.eps;
  c.abelian_rank = best_rank >= 2;
}

}  // namespace

ManifoldAssembly double_manifold(double core_volume, const std::vector<FlatLattice>& cusps,
                                 double eps, int n, const AssemblyOptions& opts) {
  validate_inputs(core_volume, eps, n);
  ManifoldAssembly a;
  a.n = n;
  a.eps = eps;
  a.mode = AssemblyMode::doubling;
  a.core_volume = core_volume;
  a.core_copies = 2;
  a.volume_bound = opts.volume_bound;
  a.cusps = cut_cusps(core_volume, cusps, eps, n, opts);
  for (const CuspSpec& c : a.cusps) a.channels.push_back(double_channel(c, eps, n, opts));
  finish_ledger(a);
  return a;
}

ManifoldAssembly assemble(double core_volume, const std::vector<FlatLattice>& cusps, double eps,
                          int n, AssemblyMode mode, const AssemblyOptions& opts) {
  validate_inputs(core_volume, eps, n);
  if (mode == AssemblyMode::doubling) return double_manifold(core_volume, cusps, eps, n, opts);
  if (n == 3 && !opts.allow_dim3)
    throw Error("assemble: cusp closing in dimension 3 needs the allow-dim3 flag");

  ManifoldAssembly a;
  a.n = n;
  a.eps = eps;
  a.mode = mode;
  a.core_volume = core_volume;
  a.core_copies = 1;
  a.volume_bound = opts.volume_bound;
  a.cusps = cut_cusps(core_volume, cusps, eps, n, opts);
  if (opts.swap_form == SwapForm::literal)
    a.warnings.push_back(
        "generator swap k*alpha1 + alpha2 has covering index k; the tube quotient is a k-fold "
        "cover of the cusp collar");
  for (const CuspSpec& c : a.cusps) a.tubes.push_back(close_cusp(c, eps, n, opts));
  finish_ledger(a);
  return a;
}

}  // namespace cuspforge
