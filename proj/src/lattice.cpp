#include "cuspforge/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "cuspforge/error.hpp"

namespace cuspforge {

namespace {

constexpr double kTieRel = 1e-12;
constexpr double kEnumerationPad = 1.5;

Eigen::MatrixXd gram_of(const Eigen::MatrixXd& basis) { return basis * basis.transpose(); }

bool sign_normalised(const std::vector<std::int64_t>& z) {
  for (std::int64_t c : z)
    if (c != 0) return c > 0;
  return false;
}

// Sort by norm; vectors whose norms agree to kTieRel are ordered by
// descending coefficient vector.
void order_candidates(std::vector<LatticeVector>& v) {
  std::sort(v.begin(), v.end(), [](const LatticeVector& a, const LatticeVector& b) {
    if (a.norm != b.norm) return a.norm < b.norm;
    return a.coeffs > b.coeffs;
  });
  std::size_t start = 0;
  while (start < v.size()) {
    std::size_t end = start + 1;
    while (end < v.size() && v[end].norm <= v[start].norm * (1.0 + kTieRel)) ++end;
    std::sort(v.begin() + static_cast<long>(start), v.begin() + static_cast<long>(end),
              [](const LatticeVector& a, const LatticeVector& b) { return a.coeffs > b.coeffs; });
    start = end;
  }
}

std::int64_t gcd_of_minors(const std::vector<std::vector<std::int64_t>>& rows) {
  const int i = static_cast<int>(rows.size());
  const int k = static_cast<int>(rows.front().size());
  std::vector<int> cols(static_cast<std::size_t>(i));
  std::iota(cols.begin(), cols.end(), 0);
  std::int64_t g = 0;
  while (true) {
    std::vector<std::vector<std::int64_t>> sub(static_cast<std::size_t>(i),
                                               std::vector<std::int64_t>(static_cast<std::size_t>(i)));
    for (int r = 0; r < i; ++r)
      for (int c = 0; c < i; ++c) sub[r][c] = rows[r][cols[c]];
    g = std::gcd(g, std::llabs(integer_det(sub)));
    if (g == 1) return 1;
    int p = i - 1;
    while (p >= 0 && cols[p] == k - i + p) --p;
    if (p < 0) break;
    ++cols[p];
    for (int q = p + 1; q < i; ++q) cols[q] = cols[q - 1] + 1;
  }
  return g;
}

std::vector<std::int64_t> column(const GeneratorSystem& gs, std::size_t idx) {
  return gs.alphas.at(idx).coeffs;
}

}  // namespace

FlatLattice::FlatLattice(Eigen::MatrixXd basis) : basis_(std::move(basis)) {
  if (basis_.rows() == 0 || basis_.rows() > basis_.cols())
    throw LatticeError("FlatLattice: need 1 <= rank <= ambient dimension");
  if (!basis_.allFinite()) throw LatticeError("FlatLattice: non-finite basis entry");
  gram_ = gram_of(basis_);
  const double det = gram_.determinant();
  const double scale = gram_.diagonal().prod();
  if (!(det > 1e-14 * std::max(scale, 1e-300)))
    throw LatticeError("FlatLattice: basis vectors are linearly dependent (rank-deficient)");
  covolume_ = std::sqrt(det);
}

Eigen::VectorXd FlatLattice::vector(const std::vector<std::int64_t>& coeffs) const {
  if (static_cast<int>(coeffs.size()) != rank())
    throw LatticeError("FlatLattice::vector: coefficient count mismatch");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(ambient_dim());
  for (int i = 0; i < rank(); ++i) v += static_cast<double>(coeffs[i]) * basis_.row(i).transpose();
  return v;
}

double covolume(const FlatLattice& L) { return L.covolume(); }

FlatLattice rescale(const FlatLattice& L, double lambda) {
  if (!(lambda > 0.0)) throw LatticeError("rescale: factor must be positive");
  return FlatLattice(L.basis() * lambda);
}

std::vector<LatticeVector> enumerate_short_vectors(const FlatLattice& L, double radius2,
                                                   std::size_t max_points) {
  const int k = L.rank();
  if (k > kMaxEnumerationRank) throw LatticeError("enumeration limited to rank <= 8");
  Eigen::LLT<Eigen::MatrixXd> llt(L.gram());
  if (llt.info() != Eigen::Success) throw LatticeError("enumeration: Gram matrix not definite");
  const Eigen::MatrixXd R = llt.matrixU();

  std::vector<LatticeVector> out;
  std::vector<std::int64_t> z(static_cast<std::size_t>(k), 0);
  const double slack = 1e-12 * radius2;

  // Depth-first over i = k-1 .. 0, `rem` is the budget left for rows < i+1.
  auto recurse = [&](auto&& self, int i, double rem) -> void {
    double tail = 0.0;
    for (int j = i + 1; j < k; ++j) tail += R(i, j) * static_cast<double>(z[j]);
    const double reach = std::sqrt(std::max(rem, 0.0) + slack) / R(i, i);
    const double centre = -tail / R(i, i);
    const double lo = std::ceil(centre - reach);
    const double hi = std::floor(centre + reach);
    if (hi - lo > 1e9) throw LatticeError("enumeration bound overflow (nearly degenerate basis)");
    for (double zi = lo; zi <= hi; zi += 1.0) {
      z[i] = static_cast<std::int64_t>(zi);
      const double term = R(i, i) * zi + tail;
      const double left = rem - term * term;
      if (left < -slack) continue;
      if (i == 0) {
        if (!sign_normalised(z)) continue;
        LatticeVector lv;
        lv.coeffs = z;
        lv.vec = L.vector(z);
        lv.norm = lv.vec.norm();
        out.push_back(std::move(lv));
        if (out.size() > max_points)
          throw LatticeError("enumeration bound overflow (nearly degenerate basis)");
      } else {
        self(self, i - 1, left);
      }
    }
    z[i] = 0;
  };
  recurse(recurse, k - 1, radius2);
  order_candidates(out);
  return out;
}

LatticeVector shortest_vector(const FlatLattice& L) {
  const double r2 = kEnumerationPad * kEnumerationPad * L.gram().diagonal().minCoeff();
  std::vector<LatticeVector> all = enumerate_short_vectors(L, r2);
  if (all.empty()) throw LatticeError("shortest_vector: enumeration found no vector");
  return all.front();
}

std::string to_string(SwapForm form) {
  return form == SwapForm::unimodular ? "alpha1 + k*alpha2" : "k*alpha1 + alpha2";
}

GeneratorSystem greedy_generators(const FlatLattice& L) {
  const int k = L.rank();
  double r2 = kEnumerationPad * kEnumerationPad * L.gram().diagonal().maxCoeff();
  for (int attempt = 0; attempt < 12; ++attempt, r2 *= 4.0) {
    const std::vector<LatticeVector> cand = enumerate_short_vectors(L, r2);
    GeneratorSystem gs;
    std::vector<std::vector<std::int64_t>> rows;
    for (int i = 0; i < k; ++i) {
      bool found = false;
      for (const LatticeVector& v : cand) {
        rows.push_back(v.coeffs);
        if (gcd_of_minors(rows) == 1) {
          gs.alphas.push_back(v);
          found = true;
          break;
        }
        rows.pop_back();
      }
      if (!found) break;
    }
    if (static_cast<int>(gs.alphas.size()) != k) continue;

    gs.alpha_det = integer_det(rows);
    // Gram-Schmidt gives lower-triangular coordinates with positive diagonal.
    Eigen::MatrixXd A(k, L.ambient_dim());
    for (int i = 0; i < k; ++i) A.row(i) = gs.alphas[i].vec.transpose();
    Eigen::MatrixXd Q(k, L.ambient_dim());
    for (int i = 0; i < k; ++i) {
      Eigen::VectorXd q = A.row(i).transpose();
      for (int j = 0; j < i; ++j) q -= Q.row(j).dot(q) * Q.row(j).transpose();
      Q.row(i) = (q / q.norm()).transpose();
    }
    gs.canonical = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j <= i; ++j) gs.canonical(i, j) = A.row(i).dot(Q.row(j));
    return gs;
  }
  throw LatticeError("greedy_generators: no extendable generator within the search radius");
}

void choose_k(GeneratorSystem& gs, const FlatLattice& L, double l_min, SwapForm form) {
  if (!(l_min > 0.0)) throw LatticeError("choose_k: target length must be positive");
  if (gs.alphas.size() < 2) throw LatticeError("choose_k: need at least two generators");
  const Eigen::VectorXd a1 = gs.alphas[0].vec;
  const Eigen::VectorXd a2 = gs.alphas[1].vec;
  // |u + k w|^2 = |u|^2 + 2k <u,w> + k^2 |w|^2 with (u, w) the fixed / scaled pair.
  const Eigen::VectorXd& u = form == SwapForm::unimodular ? a1 : a2;
  const Eigen::VectorXd& w = form == SwapForm::unimodular ? a2 : a1;
  auto len = [&](std::int64_t k) { return (u + static_cast<double>(k) * w).norm(); };

  std::int64_t k = 1;
  if (len(1) < l_min) {
    const double A = w.squaredNorm();
    const double B = 2.0 * u.dot(w);
    const double C = u.squaredNorm() - l_min * l_min;
    const double root = (-B + std::sqrt(B * B - 4.0 * A * C)) / (2.0 * A);
    k = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(root)) - 1);
    while (len(k) >= l_min && k > 1) --k;
    while (len(k) < l_min) ++k;
  }

  gs.form = form;
  gs.k = k;
  const auto& c1 = gs.alphas[0].coeffs;
  const auto& c2 = gs.alphas[1].coeffs;
  LatticeVector g;
  g.coeffs.resize(c1.size());
  for (std::size_t i = 0; i < c1.size(); ++i)
    g.coeffs[i] = form == SwapForm::unimodular ? c1[i] + k * c2[i] : k * c1[i] + c2[i];
  g.vec = L.vector(g.coeffs);
  g.norm = g.vec.norm();
  gs.gamma1 = g;

  std::vector<std::vector<std::int64_t>> rows{g.coeffs};
  for (std::size_t i = 1; i < gs.alphas.size(); ++i) rows.push_back(column(gs, i));
  gs.unimodular_check = integer_det(rows);
}

FlatLattice sublattice_delta(const GeneratorSystem& gs) {
  const int k = static_cast<int>(gs.alphas.size());
  if (k < 2) throw LatticeError("sublattice_delta: need at least two generators");
  Eigen::MatrixXd B(k - 1, gs.alphas[0].vec.size());
  for (int i = 1; i < k; ++i) B.row(i - 1) = gs.alphas[i].vec.transpose();
  return FlatLattice(B);
}

FlatLattice project_delta(const GeneratorSystem& gs) {
  if (gs.k == 0) throw LatticeError("project_delta: choose_k has not been run");
  const int k = static_cast<int>(gs.alphas.size());
  const int d = static_cast<int>(gs.alphas[0].vec.size());
  const Eigen::VectorXd g = gs.gamma1.vec / gs.gamma1.norm;
  // Orthonormal basis of g^perp: Householder complement.
  Eigen::MatrixXd M(d, 1);
  M.col(0) = g;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
  const Eigen::MatrixXd Qfull = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd perp = Qfull.rightCols(d - 1);
  Eigen::MatrixXd B(k - 1, d - 1);
  for (int i = 1; i < k; ++i) B.row(i - 1) = (perp.transpose() * gs.alphas[i].vec).transpose();
  return FlatLattice(B);
}

std::int64_t integer_det(std::vector<std::vector<std::int64_t>> a) {
  const std::size_t n = a.size();
  if (n == 0) return 1;
  std::int64_t sign = 1;
  std::int64_t prev = 1;
  for (std::size_t p = 0; p + 1 < n; ++p) {
    if (a[p][p] == 0) {
      std::size_t swap = p + 1;
      while (swap < n && a[swap][p] == 0) ++swap;
      if (swap == n) return 0;
      std::swap(a[p], a[swap]);
      sign = -sign;
    }
    for (std::size_t i = p + 1; i < n; ++i)
      for (std::size_t j = p + 1; j < n; ++j) {
        const __int128 num = static_cast<__int128>(a[i][j]) * a[p][p] -
                             static_cast<__int128>(a[i][p]) * a[p][j];
        a[i][j] = static_cast<std::int64_t>(num / prev);
      }
    prev = a[p][p];
  }
  return sign * a[n - 1][n - 1];
}

FlatLattice parse_lattice(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<double>> rows;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw LatticeError("lattice line " + std::to_string(line_no) + ": bad number '" + tok + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw LatticeError("lattice line " + std::to_string(line_no) + ": inconsistent dimension");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw LatticeError("lattice file has no basis vectors");
  const std::size_t m = rows.front().size();
  if (rows.size() != m)
    throw LatticeError("lattice needs " + std::to_string(m) + " basis vectors in R^" +
                       std::to_string(m) + ", got " + std::to_string(rows.size()));
  Eigen::MatrixXd B(static_cast<long>(m), static_cast<long>(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) B(static_cast<long>(i), static_cast<long>(j)) = rows[i][j];
  return FlatLattice(B);
}

FlatLattice read_lattice_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LatticeError("cannot open lattice file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_lattice(ss.str());
  } catch (const LatticeError& e) {
    throw LatticeError(path.string() + ": " + e.what());
  }
}

}  // namespace cuspforge
