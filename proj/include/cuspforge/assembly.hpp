#pragma once

// Cusp-closing and doubling surgeries: cut heights from a volume budget, the
// gluing equation 2 pi s(t0) = |gamma1|, collar-match certificates, region
// volumes and the global curvature/volume ledger.

#include <optional>
#include <string>
#include <vector>

#include "cuspforge/lattice.hpp"
#include "cuspforge/warp_core.hpp"

namespace cuspforge {

/// A torus cusp (0, inf) x_f R^{n-1} / Gamma with f = e^{-t}, kept for t <= cut_height.
struct CuspSpec {
  FlatLattice lattice;
  double cut_height = 0.0;
};

struct AssemblyOptions {
  bool allow_dim3 = false;
  SwapForm swap_form = SwapForm::unimodular;
  CutoffOptions cutoff;
  double pinch_grid_step = 2.5e-4;
  double pinch_tol = 1e-6;
  double quad_step = 1e-3;
  double glue_tol = 1e-9;
  /// Global volume bound v; unchecked when absent.
  std::optional<double> volume_bound;
  /// Forces every cusp's cut height instead of deriving it from the budget.
  std::optional<double> cut_height;
};

/// One sampled comparison of the cusp collar against the glued region.
struct CollarSample {
  double depth = 0.0;
  std::string direction;  // "gamma1" or "delta[i]" / "sigma[i]"
  double cusp_side = 0.0;
  double region_side = 0.0;
  double rel_error = 0.0;
};

struct InterfaceCertificate {
  std::string name;
  std::vector<CollarSample> samples;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct AbelianWitness {
  std::string description;
  int rank = 0;
  std::vector<std::vector<std::int64_t>> generators;  // coefficients against the cusp basis
};

struct TubeRegion {
  WarpProfile profile;
  CutoffProfile cutoff;
  double cut_height = 0.0;
  FlatLattice boundary;  // e^{-T} Gamma: the torus at the cut
  GeneratorSystem generators;
  double gamma1_length = 0.0;
  double l_min = 0.0;
  double t0 = 0.0;
  double t0_closed_form = 0.0;
  FlatLattice delta;  // projected orthogonally to gamma1, scaled by 1/c(t0)
  double volume = 0.0;
  double volume_refined = 0.0;  // Simpson at half step
  double constant_curvature_volume = 0.0;
  double boundary_volume = 0.0;
  double C_n = 0.0;  // tube volume <= C_n * boundary_volume
  PinchingCertificate pinching;
  InterfaceCertificate interface;
  AbelianWitness witness;
};

struct ChannelRegion {
  WarpProfile profile;
  CutoffProfile cutoff;
  double cut_height = 0.0;
  FlatLattice lattice;   // Gamma in the channel's sigma coordinates
  double beta = 0.0;
  double t0 = 0.0;
  double volume = 0.0;
  double half_volume = 0.0;
  double volume_refined = 0.0;
  double constant_curvature_volume = 0.0;
  PinchingCertificate pinching;
  InterfaceCertificate interface;  // both mirror collars
  AbelianWitness witness;
};

enum class AssemblyMode { close, doubling };

std::string to_string(AssemblyMode mode);

struct TheoremConditions {
  bool curvature = false;        // (i)  -1-eps <= K <= 0 on every region
  bool volume = false;           // (ii) vol(M) <= v
  bool volume_checked = false;
  bool w_fraction = false;       // (iii) vol(W) >= (1 - eps) vol(M)
  bool abelian_rank = false;     // (iv) witness of rank >= 2
  bool interfaces = false;
  bool pass() const { return curvature && volume && w_fraction && abelian_rank && interfaces; }
};

struct ManifoldAssembly {
  int n = 0;
  double eps = 0.0;
  AssemblyMode mode = AssemblyMode::close;
  double core_volume = 0.0;  // per copy
  int core_copies = 1;
  std::vector<CuspSpec> cusps;
  std::vector<TubeRegion> tubes;
  std::vector<ChannelRegion> channels;
  double total_volume = 0.0;
  double region_volume_sum = 0.0;
  double w_volume = 0.0;
  double w_fraction = 0.0;
  double core_fraction = 0.0;
  std::optional<double> volume_bound;
  TheoremConditions conditions;
  std::vector<std::string> warnings;
};

/// covol(Gamma) e^{-(n-1)T} / (n-1).
double cusp_tail_volume(const CuspSpec& c, int n);
/// Same integral by Simpson quadrature, for cross-checking.
double cusp_tail_volume_quadrature(const CuspSpec& c, int n, double step = 1e-3);
/// Smallest T >= 0 with cusp_tail_volume <= budget.
double cut_height_for_budget(const FlatLattice& lattice, int n, double budget);

/// t0 >= r_eps + 1 with 2 pi s(t0) = gamma1_length, by bisection.
double solve_t0(const WarpProfile& tube, double gamma1_length);

/// Closed-form ratio bound: tube volume <= C(n) * boundary torus volume.
double tube_volume_constant(int n);

TubeRegion close_cusp(const CuspSpec& c, double eps, int n, const AssemblyOptions& opts = {});
ChannelRegion double_channel(const CuspSpec& c, double eps, int n,
                             const AssemblyOptions& opts = {});

/// Per-cusp tail budget used by assemble().
double cusp_budget(double core_volume, std::size_t cusp_count, double eps, int n);

/// Two copies of the cut manifold joined along each cusp by a channel.
ManifoldAssembly double_manifold(double core_volume, const std::vector<FlatLattice>& cusps,
                                 double eps, int n, const AssemblyOptions& opts = {});

ManifoldAssembly assemble(double core_volume, const std::vector<FlatLattice>& cusps, double eps,
                          int n, AssemblyMode mode, const AssemblyOptions& opts = {});

}  // namespace cuspforge
