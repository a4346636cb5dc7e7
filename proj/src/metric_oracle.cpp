#include "cuspforge/metric_oracle.hpp"

#include <cmath>
#include <sstream>

#include "cuspforge/error.hpp"

namespace cuspforge {

CoordinateMetric CoordinateMetric::from_profile(const WarpProfile& w, int n) {
  if (n < 3) throw Error("CoordinateMetric: dimension must be at least 3");
  CoordinateMetric m;
  m.n = n;
  m.provenance = w;
  const bool tube = w.kind() == WarpKind::tube;
  m.metric_at = [w, n, tube](const Eigen::VectorXd& x) {
    const WarpSample v = w.at(x(0));
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
    g(0, 0) = 1.0;
    int first_fiber = 1;
    if (tube) {
      g(1, 1) = v.s * v.s;
      first_fiber = 2;
    }
    for (int i = first_fiber; i < n; ++i) g(i, i) = v.c * v.c;
    return g;
  };
  return m;
}

double RiemannTensor::contract(const Eigen::VectorXd& X, const Eigen::VectorXd& Y,
                               const Eigen::VectorXd& Z, const Eigen::VectorXd& W) const {
  double sum = 0.0;
  for (int i = 0; i < n_; ++i) {
    if (X(i) == 0.0) continue;
    for (int j = 0; j < n_; ++j) {
      if (Y(j) == 0.0) continue;
      for (int k = 0; k < n_; ++k) {
        if (Z(k) == 0.0) continue;
        for (int l = 0; l < n_; ++l) sum += X(i) * Y(j) * Z(k) * W(l) * (*this)(i, j, k, l);
      }
    }
  }
  return sum;
}

namespace {

// gamma[k][i][j] = Gamma^k_ij
using Christoffel = std::vector<double>;

Christoffel christoffel_at(const CoordinateMetric& m, const Eigen::VectorXd& x, double h) {
  const int n = m.n;
  const Eigen::MatrixXd g = m.metric_at(x);
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) throw Error("riemann_fd: metric not positive definite");
  const Eigen::MatrixXd ginv = llt.solve(Eigen::MatrixXd::Identity(n, n));

  // dg[l] = partial_l g
  std::vector<Eigen::MatrixXd> dg(static_cast<std::size_t>(n));
  for (int l = 0; l < n; ++l) {
    Eigen::VectorXd xp = x, xm = x;
    xp(l) += h;
    xm(l) -= h;
    dg[l] = (m.metric_at(xp) - m.metric_at(xm)) / (2.0 * h);
  }

  Christoffel gam(static_cast<std::size_t>(n * n * n), 0.0);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double sum = 0.0;
        for (int l = 0; l < n; ++l) {
          if (ginv(k, l) == 0.0) continue;
          sum += ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        }
        gam[(k * n + i) * n + j] = 0.5 * sum;
      }
  return gam;
}

}  // namespace

RiemannTensor riemann_fd(const CoordinateMetric& m, const Eigen::VectorXd& x, double h) {
  const int n = m.n;
  if (x.size() != n) throw Error("riemann_fd: coordinate vector has wrong dimension");
  if (!(h > 0.0) || h > 1e-2) throw Error("riemann_fd: finite-difference step out of range");
  if (m.provenance && m.provenance->kind() == WarpKind::tube &&
      m.provenance->closes_at_zero() && x(0) < 2.0 * h) {
    std::ostringstream msg;
    msg << "riemann_fd: t = " << x(0) << " is within 2h of the s = 0 axis";
    throw Error(msg.str());
  }

  const Christoffel gam = christoffel_at(m, x, h);
  auto G = [n](const Christoffel& c, int k, int i, int j) { return c[(k * n + i) * n + j]; };

  std::vector<Christoffel> dgam(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    Eigen::VectorXd xp = x, xm = x;
    xp(a) += h;
    xm(a) -= h;
    const Christoffel gp = christoffel_at(m, xp, h);
    const Christoffel gm = christoffel_at(m, xm, h);
    dgam[a].resize(gp.size());
    for (std::size_t q = 0; q < gp.size(); ++q) dgam[a][q] = (gp[q] - gm[q]) / (2.0 * h);
  }

  // R^l_ijk = d_i Gamma^l_jk - d_j Gamma^l_ik + Gamma^l_im Gamma^m_jk - Gamma^l_jm Gamma^m_ik
  const Eigen::MatrixXd g = m.metric_at(x);
  std::vector<double> up(static_cast<std::size_t>(n * n * n * n), 0.0);
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double v = G(dgam[i], l, j, k) - G(dgam[j], l, i, k);
          for (int mm = 0; mm < n; ++mm)
            v += G(gam, l, i, mm) * G(gam, mm, j, k) - G(gam, l, j, mm) * G(gam, mm, i, k);
          up[((l * n + i) * n + j) * n + k] = v;
        }

  RiemannTensor R(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double v = 0.0;
          for (int mm = 0; mm < n; ++mm) v += g(l, mm) * up[((mm * n + i) * n + j) * n + k];
          R(i, j, k, l) = v;
        }
  return R;
}

double sectional_from_tensor(const RiemannTensor& R, const Eigen::MatrixXd& g,
                             const Eigen::VectorXd& X, const Eigen::VectorXd& Y) {
  const double xx = X.dot(g * X);
  const double yy = Y.dot(g * Y);
  const double xy = X.dot(g * Y);
  const double area2 = xx * yy - xy * xy;
  if (!(area2 > 0.0)) throw Error("sectional_from_tensor: degenerate plane");
  return R.contract(X, Y, Y, X) / area2;
}

Eigen::MatrixXd jacobi_from_frame_curvatures(const Eigen::MatrixXd& K, const Eigen::VectorXd& v) {
  const int n = static_cast<int>(K.rows());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    double diag = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != a) diag += K(a, j) * v(j) * v(j);
    J(a, a) = diag;
    for (int b = a + 1; b < n; ++b) {
      J(a, b) = -K(a, b) * v(a) * v(b);
      J(b, a) = J(a, b);
    }
  }
  return J;
}

JacobiOperator jacobi_operator(const CoordinateMetric& m, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& v, JacobiPath path, double h) {
  const int n = m.n;
  if (v.size() != n || x.size() != n) throw Error("jacobi_operator: dimension mismatch");
  const Eigen::MatrixXd g = m.metric_at(x);
  const Eigen::MatrixXd offdiag = g - Eigen::MatrixXd(g.diagonal().asDiagonal());
  if (offdiag.cwiseAbs().maxCoeff() > 0.0) throw Error("jacobi_operator: metric is not diagonal");
  const double norm2 = v.dot(g * v);
  if (std::fabs(norm2 - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg << "jacobi_operator: v is not a unit vector (|v|^2 = " << norm2 << ")";
    throw Error(msg.str());
  }
  const Eigen::VectorXd scale = g.diagonal().cwiseSqrt();

  JacobiOperator out;
  out.base = x;
  out.v = v;
  if (path == JacobiPath::closed_form) {
    if (!m.provenance) throw Error("jacobi_operator: closed form needs a warp profile");
    const Eigen::MatrixXd K = frame_curvatures(*m.provenance, x(0), n);
    out.matrix = jacobi_from_frame_curvatures(K, scale.cwiseProduct(v));
  } else {
    const RiemannTensor R = riemann_fd(m, x, h);
    out.matrix = Eigen::MatrixXd::Zero(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double sum = 0.0;
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) sum += v(j) * v(k) * R(a, j, k, b);
        out.matrix(a, b) = sum / (scale(a) * scale(b));
      }
    out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.matrix);
  out.eigenvalues = es.eigenvalues();
  out.eigenvectors = es.eigenvectors();
  return out;
}

double tr_sqrt_neg(const Eigen::VectorXd& eigenvalues, double clamp_tol) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const double lam = eigenvalues(i);
    if (lam > clamp_tol) {
      std::ostringstream msg;
      msg << "tr_sqrt_neg: Jacobi eigenvalue " << lam << " exceeds clamp tolerance " << clamp_tol
          << " (K <= 0 violated)";
      throw CurvatureViolation(msg.str());
    }
    if (lam < 0.0) sum += std::sqrt(-lam);
  }
  return sum;
}

double tr_sqrt_neg(const JacobiOperator& j, double clamp_tol) {
  return tr_sqrt_neg(j.eigenvalues, clamp_tol);
}

}  // namespace cuspforge
