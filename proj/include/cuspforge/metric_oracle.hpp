#pragma once

// Independent curvature path: Riemann tensor of a coordinate metric by
// finite differences of Christoffel symbols, and the Jacobi operator
// R(., v)v assembled either from that tensor or from the closed-form
// warp-product plane curvatures.

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cuspforge/warp_core.hpp"

namespace cuspforge {

/// Metric g(x) in coordinates x = (t, phi, sigma_1, ...) (tube) or
/// x = (t, sigma_1, ...) (channel/cusp).
struct CoordinateMetric {
  int n = 0;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> metric_at;
  std::optional<WarpProfile> provenance;

  /// diag(1, s^2, c^2, ..., c^2) or diag(1, c^2, ..., c^2) by kind.
  static CoordinateMetric from_profile(const WarpProfile& w, int n);
};

/// Fully lowered R_ijkl = <R(d_i, d_j) d_k, d_l>, with
/// R(X, Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z.
/// Sectional curvature K(X, Y) = R(X, Y, Y, X) / |X ^ Y|^2.
class RiemannTensor {
 public:
  explicit RiemannTensor(int n) : n_(n), data_(static_cast<std::size_t>(n * n * n * n), 0.0) {}

  int dim() const { return n_; }
  double& operator()(int i, int j, int k, int l) { return data_[index(i, j, k, l)]; }
  double operator()(int i, int j, int k, int l) const { return data_[index(i, j, k, l)]; }

  /// R(X, Y, Z, W) for coordinate-frame vectors.
  double contract(const Eigen::VectorXd& X, const Eigen::VectorXd& Y, const Eigen::VectorXd& Z,
                  const Eigen::VectorXd& W) const;

 private:
  std::size_t index(int i, int j, int k, int l) const {
    return static_cast<std::size_t>(((i * n_ + j) * n_ + k) * n_ + l);
  }
  int n_;
  std::vector<double> data_;
};

constexpr double kOracleStep = 1e-4;

RiemannTensor riemann_fd(const CoordinateMetric& m, const Eigen::VectorXd& x,
                         double h = kOracleStep);

/// Sectional curvature of span(X, Y) with respect to metric g.
double sectional_from_tensor(const RiemannTensor& R, const Eigen::MatrixXd& g,
                             const Eigen::VectorXd& X, const Eigen::VectorXd& Y);

enum class JacobiPath { finite_difference, closed_form };

struct JacobiOperator {
  Eigen::VectorXd base;
  Eigen::VectorXd v;            // coordinate components
  Eigen::MatrixXd matrix;       // in the orthonormal frame d_a / |d_a|
  Eigen::VectorXd eigenvalues;  // ascending
  Eigen::MatrixXd eigenvectors;
};

/// Throws Error when v is not unit length in g(x) or the metric is not diagonal.
JacobiOperator jacobi_operator(const CoordinateMetric& m, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& v,
                               JacobiPath path = JacobiPath::closed_form,
                               double h = kOracleStep);

/// Closed-form Jacobi matrix in the orthonormal frame from a matrix of
/// frame plane curvatures K(e_i, e_j) and an orthonormal-frame unit vector.
Eigen::MatrixXd jacobi_from_frame_curvatures(const Eigen::MatrixXd& K, const Eigen::VectorXd& v);

constexpr double kClampTol = 1e-7;

/// Sum of sqrt(-lambda) over the spectrum. Eigenvalues in (0, clamp_tol] count
/// as 0; larger positive ones throw CurvatureViolation.
double tr_sqrt_neg(const Eigen::VectorXd& eigenvalues, double clamp_tol = kClampTol);
double tr_sqrt_neg(const JacobiOperator& j, double clamp_tol = kClampTol);

}  // namespace cuspforge
