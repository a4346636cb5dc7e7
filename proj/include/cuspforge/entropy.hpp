#pragma once

// Entropy lower-bound chain: Monte Carlo estimate of the integral of
// tr sqrt(-R(., v)v) over the unit tangent bundle with normalised Liouville
// measure, the rescaling to curvature >= -1, and the model-space volume
// entropy demo.

#include <cstdint>
#include <string>
#include <vector>

#include "cuspforge/assembly.hpp"

namespace cuspforge {

struct RegionEstimate {
  std::string name;
  double weight = 0.0;  // region volume / total volume
  long samples = 0;
  double mean = 0.0;
  double variance = 0.0;
  double integrand_min = 0.0;
  double integrand_max = 0.0;
};

struct EntropyCertificate {
  int n = 0;
  double eps = 0.0;
  double bw_integral = 0.0;
  double w_fraction = 0.0;
  double w_bound = 0.0;  // (n-1) * w_fraction, the W contribution alone
  double lambda = 1.0;
  double bound_before = 0.0;
  double bound_after = 0.0;
  double eps_bar = 0.0;
  std::uint64_t mc_seed = 0;
  long mc_samples = 0;
  double mc_stderr = 0.0;
  double integrand_max = 0.0;
  bool pinching_certified = false;
  std::vector<RegionEstimate> regions;
};

constexpr long kDefaultSamples = 100000;
constexpr std::uint64_t kDefaultSeed = 42;

/// Stratified Monte Carlo over regions; the hyperbolic core contributes n-1
/// exactly. Throws Error when the assembly failed pinching and
/// CurvatureViolation if a sampled Jacobi operator has a positive eigenvalue.
EntropyCertificate bw_bound(const ManifoldAssembly& a, long samples = kDefaultSamples,
                            std::uint64_t seed = kDefaultSeed);

/// Rescales the metric by 1 + eps so curvature >= -1; the bound divides by
/// sqrt(1 + eps).
EntropyCertificate rescale_bound(EntropyCertificate cert, double eps);

/// (n-1) (1 - (1 - eps) / sqrt(1 + eps)).
double eps_bar(int n, double eps);

/// (1/r) log vol B_r in hyperbolic n-space, evaluated in the log domain.
double model_volume_entropy(int n, double r_max);

/// h_v = h_t >= h_mu >= integral, rendered with the certificate's numbers.
std::string entropy_chain_report(const EntropyCertificate& cert);

}  // namespace cuspforge
