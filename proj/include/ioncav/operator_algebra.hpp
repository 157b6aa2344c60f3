#pragma once

// Composite Hilbert space (atom x cavity modes), sparse complex operators and
// Lindblad superoperators.
//
// Superoperators act on column-stacked density matrices:
//   vec(A rho B) = (B^T kron A) vec(rho),
// so spre(A) = I kron A and spost(B) = B^T kron I.

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "ioncav/atomic_model.hpp"

namespace ioncav {

using Complex = std::complex<double>;
/// Compressed sparse row operator.
using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;
using DenseMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Atom (8 sublevels) tensored with a list of truncated Fock spaces.
class HilbertSpace {
 public:
  explicit HilbertSpace(std::vector<int> mode_cutoffs);

  int atom_dim() const { return kAtomDim; }
  int mode_count() const { return static_cast<int>(cutoffs_.size()); }
  int cutoff(int mode) const { return cutoffs_.at(mode); }
  int total_dim() const { return total_; }

  /// Flat basis index, atom index outermost then modes in order.
  int index(int atom, std::span<const int> occupations) const;
  int atom_of(int index) const;
  int occupation_of(int index, int mode) const;

 private:
  std::vector<int> cutoffs_;
  std::vector<int> strides_;
  int total_ = 0;
};

/// Hermitian, unit-trace state.
class DensityMatrix {
 public:
  static constexpr double kHermitianTolerance = 1e-10;
  static constexpr double kTraceTolerance = 1e-10;
  static constexpr double kPositivityTolerance = 1e-8;

  /// Validates Hermiticity and trace; throws DomainError otherwise.
  explicit DensityMatrix(DenseMatrix data);

  /// |i><i| in a space of dimension d.
  static DensityMatrix basis_state(int d, int i);
  /// I/d.
  static DensityMatrix maximally_mixed(int d);

  int dim() const { return static_cast<int>(data_.rows()); }
  const DenseMatrix& matrix() const { return data_; }
  Complex operator()(int r, int c) const { return data_(r, c); }

  double min_eigenvalue() const;
  bool is_physical() const { return min_eigenvalue() >= -kPositivityTolerance; }
  double population(int i) const { return data_(i, i).real(); }

 private:
  DenseMatrix data_;
};

SparseMatrix identity(int n);
/// Truncated annihilation operator on Fock states 0..n_max.
SparseMatrix annihilation(int n_max);
SparseMatrix dagger(const SparseMatrix& a);
SparseMatrix tensor(const SparseMatrix& a, const SparseMatrix& b);

/// Drop explicit zeros and compress.
SparseMatrix finalized(SparseMatrix m);

/// |to><from| embedded in the full space, identity on the cavity factors.
SparseMatrix atomic_transfer(const AtomicLevel& from, const AtomicLevel& to, const HilbertSpace& space);
/// Projector onto one atomic manifold.
SparseMatrix manifold_projector(Manifold m, const HilbertSpace& space);
/// Annihilation operator of one cavity mode in the full space.
SparseMatrix mode_annihilation(const HilbertSpace& space, int mode);

double max_abs_entry(const SparseMatrix& m);
double hermiticity_error(const SparseMatrix& m);

SparseMatrix spre(const SparseMatrix& a);
SparseMatrix spost(const SparseMatrix& b);

/// L(rho) = -i[H, rho] + sum_k (C rho C^dag - 1/2 {C^dag C, rho}).
/// Throws DomainError for a non-Hermitian H or mismatched dimensions.
SparseMatrix liouvillian(const SparseMatrix& hamiltonian, std::span<const SparseMatrix> collapse_ops);

ComplexVector vec(const DenseMatrix& m);
DenseMatrix unvec(const ComplexVector& v, int d);

/// Tr[rho A].
Complex expectation(const DensityMatrix& rho, const SparseMatrix& op);

/// Half the trace norm of the (Hermitian) difference.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

}  // namespace ioncav
