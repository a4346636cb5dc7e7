#pragma once

// Flat lattices of cusp cross-sections: covolume, exhaustive shortest-vector
// enumeration, greedy minimal generators with canonical triangular
// coordinates, the long generator gamma1 and the sublattice Delta.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cuspforge {

/// Lattice spanned by the rows of `basis` (rank x ambient). Full-rank cusp
/// lattices are square; sublattices may have rank < ambient dimension.
class FlatLattice {
 public:
  explicit FlatLattice(Eigen::MatrixXd basis);

  int rank() const { return static_cast<int>(basis_.rows()); }
  int ambient_dim() const { return static_cast<int>(basis_.cols()); }
  const Eigen::MatrixXd& basis() const { return basis_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  /// Volume of a fundamental domain inside the span of the basis.
  double covolume() const { return covolume_; }

  Eigen::VectorXd vector(const std::vector<std::int64_t>& coeffs) const;

 private:
  Eigen::MatrixXd basis_;
  Eigen::MatrixXd gram_;
  double covolume_;
};

double covolume(const FlatLattice& L);
FlatLattice rescale(const FlatLattice& L, double lambda);

struct LatticeVector {
  std::vector<std::int64_t> coeffs;  // against the lattice's basis
  Eigen::VectorXd vec;
  double norm = 0.0;
};

constexpr int kMaxEnumerationRank = 8;

/// All nonzero lattice vectors with |v|^2 <= radius2, up to sign (first
/// nonzero coefficient positive), sorted by norm then tie-break order.
/// Throws LatticeError when more than `max_points` would be produced.
std::vector<LatticeVector> enumerate_short_vectors(const FlatLattice& L, double radius2,
                                                   std::size_t max_points = 5'000'000);

/// Minimal-norm nonzero vector; ties go to the lexicographically greatest
/// sign-normalised coefficient vector.
LatticeVector shortest_vector(const FlatLattice& L);

enum class SwapForm {
  unimodular,  // gamma1 = alpha1 + k alpha2
  literal,     // gamma1 = k alpha1 + alpha2 (index k sublattice for k > 1)
};

std::string to_string(SwapForm form);

struct GeneratorSystem {
  std::vector<LatticeVector> alphas;
  /// Rows: alphas in an orthonormal frame where alpha_i has zero entries past i.
  Eigen::MatrixXd canonical;
  /// det of the alphas' integer coordinates against the input basis.
  std::int64_t alpha_det = 0;

  // Filled by choose_k.
  SwapForm form = SwapForm::unimodular;
  std::int64_t k = 0;
  LatticeVector gamma1;
  /// det of (gamma1, alpha2, ..., alpha_m) against the input basis.
  std::int64_t unimodular_check = 0;
};

GeneratorSystem greedy_generators(const FlatLattice& L);

/// Smallest k >= 1 with |gamma1| >= l_min; records gamma1 and the
/// change-of-basis determinant in `gs`.
void choose_k(GeneratorSystem& gs, const FlatLattice& L, double l_min,
              SwapForm form = SwapForm::unimodular);

/// Delta = <alpha2, ..., alpha_m> with its intrinsic covolume.
FlatLattice sublattice_delta(const GeneratorSystem& gs);

/// Delta projected onto the hyperplane orthogonal to gamma1, written in an
/// orthonormal basis of that hyperplane (rank m-1, ambient m-1).
FlatLattice project_delta(const GeneratorSystem& gs);

/// Exact integer determinant (Bareiss).
std::int64_t integer_det(std::vector<std::vector<std::int64_t>> a);

FlatLattice parse_lattice(const std::string& text);
FlatLattice read_lattice_file(const std::filesystem::path& path);

}  // namespace cuspforge
