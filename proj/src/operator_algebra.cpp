#include "ioncav/operator_algebra.hpp"

#include <cmath>
#include <string>

namespace ioncav {

HilbertSpace::HilbertSpace(std::vector<int> mode_cutoffs) : cutoffs_(std::move(mode_cutoffs)) {
  for (int c : cutoffs_)
    if (c < 1) throw DomainError("Fock cutoff must be at least 1");
  strides_.assign(cutoffs_.size(), 1);
  int stride = 1;
  for (int m = mode_count() - 1; m >= 0; --m) {
    strides_[m] = stride;
    stride *= cutoffs_[m] + 1;
  }
  total_ = kAtomDim * stride;
}

int HilbertSpace::index(int atom, std::span<const int> occupations) const {
  if (static_cast<int>(occupations.size()) != mode_count())
    throw DomainError("occupation list does not match mode count");
  if (atom < 0 || atom >= kAtomDim) throw DomainError("atomic index out of range");
  int idx = 0;
  for (int m = 0; m < mode_count(); ++m) {
    if (occupations[m] < 0 || occupations[m] > cutoffs_[m]) throw DomainError("occupation out of range");
    idx += occupations[m] * strides_[m];
  }
  return atom * (total_ / kAtomDim) + idx;
}

int HilbertSpace::atom_of(int index) const { return index / (total_ / kAtomDim); }

int HilbertSpace::occupation_of(int index, int mode) const {
  return (index / strides_.at(mode)) % (cutoffs_[mode] + 1);
}

DensityMatrix::DensityMatrix(DenseMatrix data) : data_(std::move(data)) {
  if (data_.rows() != data_.cols() || data_.rows() == 0)
    throw DomainError("density matrix must be square and non-empty");
  const double herm = (data_ - data_.adjoint()).cwiseAbs().maxCoeff();
  if (!(herm <= kHermitianTolerance))
    throw DomainError("density matrix is not Hermitian (deviation " + std::to_string(herm) + ")");
  const Complex tr = data_.trace();
  if (!(std::abs(tr - 1.0) <= kTraceTolerance))
    throw DomainError("density matrix trace deviates from one: " + std::to_string(tr.real()));
}

DensityMatrix DensityMatrix::basis_state(int d, int i) {
  DenseMatrix m = DenseMatrix::Zero(d, d);
  m(i, i) = 1.0;
  return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::maximally_mixed(int d) {
  DenseMatrix m = DenseMatrix::Identity(d, d) / static_cast<double>(d);
  return DensityMatrix(std::move(m));
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(data_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

SparseMatrix identity(int n) {
  SparseMatrix m(n, n);
  m.setIdentity();
  return m;
}

SparseMatrix annihilation(int n_max) {
  if (n_max < 1) throw DomainError("annihilation operator needs n_max >= 1");
  std::vector<Eigen::Triplet<Complex>> t;
  for (int n = 1; n <= n_max; ++n) t.emplace_back(n - 1, n, std::sqrt(static_cast<double>(n)));
  SparseMatrix a(n_max + 1, n_max + 1);
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

SparseMatrix dagger(const SparseMatrix& a) { return SparseMatrix(a.adjoint()); }

SparseMatrix finalized(SparseMatrix m) {
  m.prune(Complex(0.0), 0.0);
  m.makeCompressed();
  return m;
}

SparseMatrix tensor(const SparseMatrix& a, const SparseMatrix& b) {
  std::vector<Eigen::Triplet<Complex>> t;
  t.reserve(static_cast<std::size_t>(a.nonZeros()) * static_cast<std::size_t>(b.nonZeros()));
  for (int ra = 0; ra < a.outerSize(); ++ra)
    for (SparseMatrix::InnerIterator ia(a, ra); ia; ++ia)
      for (int rb = 0; rb < b.outerSize(); ++rb)
        for (SparseMatrix::InnerIterator ib(b, rb); ib; ++ib)
          t.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(),
                         ia.value() * ib.value());
  SparseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  out.setFromTriplets(t.begin(), t.end());
  return finalized(std::move(out));
}

SparseMatrix atomic_transfer(const AtomicLevel& from, const AtomicLevel& to, const HilbertSpace& space) {
  const int block = space.total_dim() / kAtomDim;
  const int f = level_index(from);
  const int g = level_index(to);
  std::vector<Eigen::Triplet<Complex>> t;
  t.reserve(block);
  for (int k = 0; k < block; ++k) t.emplace_back(g * block + k, f * block + k, 1.0);
  SparseMatrix m(space.total_dim(), space.total_dim());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SparseMatrix manifold_projector(Manifold manifold, const HilbertSpace& space) {
  SparseMatrix p(space.total_dim(), space.total_dim());
  for (const auto& level : all_levels())
    if (level.manifold == manifold) p += atomic_transfer(level, level, space);
  return finalized(std::move(p));
}

SparseMatrix mode_annihilation(const HilbertSpace& space, int mode) {
  if (mode < 0 || mode >= space.mode_count()) throw DomainError("no such cavity mode");
  SparseMatrix op = identity(kAtomDim);
  for (int m = 0; m < space.mode_count(); ++m)
    op = tensor(op, m == mode ? annihilation(space.cutoff(m)) : identity(space.cutoff(m) + 1));
  return op;
}

double max_abs_entry(const SparseMatrix& m) {
  double out = 0.0;
  for (int r = 0; r < m.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) out = std::max(out, std::abs(it.value()));
  return out;
}

double hermiticity_error(const SparseMatrix& m) {
  if (m.rows() != m.cols()) return INFINITY;
  const SparseMatrix diff = m - SparseMatrix(m.adjoint());
  return max_abs_entry(diff);
}

SparseMatrix spre(const SparseMatrix& a) { return tensor(identity(static_cast<int>(a.rows())), a); }

SparseMatrix spost(const SparseMatrix& b) {
  return tensor(SparseMatrix(b.transpose()), identity(static_cast<int>(b.rows())));
}

SparseMatrix liouvillian(const SparseMatrix& hamiltonian, std::span<const SparseMatrix> collapse_ops) {
  const auto d = hamiltonian.rows();
  if (hamiltonian.cols() != d) throw DomainError("Hamiltonian must be square");
  const double scale = std::max(1.0, max_abs_entry(hamiltonian));
  if (hermiticity_error(hamiltonian) > 1e-10 * scale) throw DomainError("Hamiltonian is not Hermitian");
  for (const auto& c : collapse_ops)
    if (c.rows() != d || c.cols() != d) throw DomainError("collapse operator dimension mismatch");

  const Complex minus_i(0.0, -1.0);
  SparseMatrix l = minus_i * (spre(hamiltonian) - spost(hamiltonian));
  for (const auto& c : collapse_ops) {
    const SparseMatrix cdc = SparseMatrix(c.adjoint()) * c;
    l += tensor(SparseMatrix(c.conjugate()), c);
    l -= 0.5 * (spre(cdc) + spost(cdc));
  }
  return finalized(std::move(l));
}

ComplexVector vec(const DenseMatrix& m) {
  return Eigen::Map<const ComplexVector>(m.data(), m.size());
}

DenseMatrix unvec(const ComplexVector& v, int d) {
  if (v.size() != static_cast<Eigen::Index>(d) * d) throw DomainError("vector length is not d^2");
  return Eigen::Map<const DenseMatrix>(v.data(), d, d);
}

Complex expectation(const DensityMatrix& rho, const SparseMatrix& op) {
  // Tr[rho A] = sum_ij rho_ji A_ij
  Complex acc = 0.0;
  for (int r = 0; r < op.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(op, r); it; ++it) acc += rho(static_cast<int>(it.col()), r) * it.value();
  return acc;
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw DomainError("trace distance needs equal dimensions");
  const DenseMatrix diff = a.matrix() - b.matrix();
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(diff, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace ioncav
