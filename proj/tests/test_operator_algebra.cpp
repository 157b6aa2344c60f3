#include <doctest.h>

#include <random>
#include <vector>

#include "ioncav/operator_algebra.hpp"

using namespace ioncav;

namespace {

DenseMatrix random_dense(int rows, int cols, std::mt19937& rng, double density = 0.5) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::bernoulli_distribution keep(density);
  DenseMatrix m = DenseMatrix::Zero(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      if (keep(rng)) m(i, j) = Complex(u(rng), u(rng));
  return m;
}

SparseMatrix to_sparse(const DenseMatrix& d) { return finalized(SparseMatrix(d.sparseView())); }

DenseMatrix brute_kron(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      for (int k = 0; k < b.rows(); ++k)
        for (int l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

DenseMatrix random_density(int d, std::mt19937& rng) {
  const DenseMatrix a = random_dense(d, d, rng, 1.0);
  DenseMatrix rho = a * a.adjoint();
  return rho / rho.trace();
}

}  // namespace

TEST_CASE("Hilbert space indexing") {
  const HilbertSpace space({2, 3});
  CHECK(space.total_dim() == 8 * 3 * 4);
  CHECK(space.mode_count() == 2);
  int expected = 0;
  for (int a = 0; a < 8; ++a)
    for (int n0 = 0; n0 <= 2; ++n0)
      for (int n1 = 0; n1 <= 3; ++n1) {
        const int occ[] = {n0, n1};
        const int i = space.index(a, occ);
        CHECK(i == expected++);
        CHECK(space.atom_of(i) == a);
        CHECK(space.occupation_of(i, 0) == n0);
        CHECK(space.occupation_of(i, 1) == n1);
      }
  CHECK_THROWS_AS(HilbertSpace({0}), DomainError);
}

TEST_CASE("Kronecker product against dense brute force") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const DenseMatrix a = random_dense(3 + trial, 2 + trial, rng);
    const DenseMatrix b = random_dense(4, 5 - trial % 3, rng);
    const DenseMatrix got = DenseMatrix(tensor(to_sparse(a), to_sparse(b)));
    CHECK((got - brute_kron(a, b)).norm() < 1e-14);
  }
}

TEST_CASE("ladder operators") {
  const SparseMatrix a = annihilation(3);
  const DenseMatrix ad = DenseMatrix(a);
  CHECK(ad(0, 1) == Complex(1.0, 0.0));
  CHECK(std::abs(ad(2, 3) - std::sqrt(3.0)) < 1e-15);
  const DenseMatrix comm = DenseMatrix(SparseMatrix(a * dagger(a))) - DenseMatrix(SparseMatrix(dagger(a) * a));
  for (int n = 0; n < 3; ++n) CHECK(std::abs(comm(n, n) - 1.0) < 1e-14);
  CHECK(std::abs(comm(3, 3) + 3.0) < 1e-14);  // truncation edge
  CHECK_THROWS_AS(annihilation(0), DomainError);
}

TEST_CASE("embedded operators") {
  const HilbertSpace space({1, 1});
  const AtomicLevel s{Manifold::S12, kHalf};
  const AtomicLevel p{Manifold::P12, kHalf};
  const SparseMatrix t = atomic_transfer(s, p, space);
  const int occ[] = {1, 0};
  const int from = space.index(level_index(s), occ);
  const int to = space.index(level_index(p), occ);
  CHECK(t.coeff(to, from) == Complex(1.0, 0.0));
  CHECK(t.nonZeros() == 4);

  SparseMatrix total = manifold_projector(Manifold::S12, space) + manifold_projector(Manifold::P12, space) +
                       manifold_projector(Manifold::D32, space);
  CHECK((DenseMatrix(total) - DenseMatrix::Identity(space.total_dim(), space.total_dim())).norm() < 1e-15);

  const SparseMatrix a_v = mode_annihilation(space, 1);
  const int one_v[] = {0, 1};
  const int vac[] = {0, 0};
  CHECK(a_v.coeff(space.index(3, vac), space.index(3, one_v)) == Complex(1.0, 0.0));
}

TEST_CASE("Liouvillian against a dense brute-force master equation") {
  std::mt19937 rng(11);
  const int d = 5;
  DenseMatrix h = random_dense(d, d, rng);
  h = (h + h.adjoint()).eval();
  std::vector<DenseMatrix> cs = {random_dense(d, d, rng, 0.4), random_dense(d, d, rng, 0.4)};
  std::vector<SparseMatrix> sparse_cs;
  for (const auto& c : cs) sparse_cs.push_back(to_sparse(c));
  const SparseMatrix l = liouvillian(to_sparse(h), sparse_cs);

  const Complex i(0.0, 1.0);
  for (int trial = 0; trial < 3; ++trial) {
    const DenseMatrix rho = random_density(d, rng);
    DenseMatrix expected = -i * (h * rho - rho * h);
    for (const auto& c : cs) {
      const DenseMatrix cdc = c.adjoint() * c;
      expected += c * rho * c.adjoint() - 0.5 * (cdc * rho + rho * cdc);
    }
    const ComplexVector got = l * vec(rho);
    CHECK((unvec(got, d) - expected).norm() < 1e-13);
  }
}

TEST_CASE("Liouvillian preserves trace and Hermiticity") {
  std::mt19937 rng(3);
  const int d = 6;
  DenseMatrix h = random_dense(d, d, rng);
  h = (h + h.adjoint()).eval();
  const std::vector<SparseMatrix> cs = {to_sparse(random_dense(d, d, rng)), to_sparse(random_dense(d, d, rng))};
  const SparseMatrix l = liouvillian(to_sparse(h), cs);
  // vec(I)^dag L = 0
  const ComplexVector id = vec(DenseMatrix::Identity(d, d));
  const ComplexVector row = SparseMatrix(l.adjoint()) * id;
  CHECK(row.norm() < 1e-13);
  const DenseMatrix drho = unvec(l * vec(random_density(d, rng)), d);
  CHECK((drho - drho.adjoint()).norm() < 1e-13);
}

TEST_CASE("Liouvillian rejects bad input") {
  DenseMatrix h(2, 2);
  h << 0, 1, 0, 0;
  CHECK_THROWS_AS(liouvillian(to_sparse(h), {}), DomainError);
  const std::vector<SparseMatrix> cs = {identity(3)};
  CHECK_THROWS_AS(liouvillian(identity(2), cs), DomainError);
}

TEST_CASE("super-operators follow the column-stacking convention") {
  std::mt19937 rng(5);
  const DenseMatrix a = random_dense(3, 3, rng, 1.0);
  const DenseMatrix b = random_dense(3, 3, rng, 1.0);
  const DenseMatrix x = random_dense(3, 3, rng, 1.0);
  CHECK((unvec(spre(to_sparse(a)) * vec(x), 3) - a * x).norm() < 1e-14);
  CHECK((unvec(spost(to_sparse(b)) * vec(x), 3) - x * b).norm() < 1e-14);
}

TEST_CASE("density matrices") {
  CHECK_THROWS_AS(DensityMatrix{DenseMatrix::Identity(2, 2)}, DomainError);
  DenseMatrix nonherm = DenseMatrix::Identity(2, 2) / 2.0;
  nonherm(0, 1) = 0.1;
  CHECK_THROWS_AS(DensityMatrix{nonherm}, DomainError);

  const DensityMatrix mixed = DensityMatrix::maximally_mixed(4);
  const DensityMatrix pure = DensityMatrix::basis_state(4, 2);
  CHECK(pure.population(2) == 1.0);
  CHECK(mixed.min_eigenvalue() == doctest::Approx(0.25));
  CHECK(trace_distance(pure, pure) < 1e-15);
  CHECK(trace_distance(pure, DensityMatrix::basis_state(4, 1)) == doctest::Approx(1.0));
  CHECK(trace_distance(pure, mixed) == doctest::Approx(0.75));
  CHECK(expectation(pure, identity(4)).real() == doctest::Approx(1.0));
}

TEST_CASE("finalized drops explicit zeros") {
  SparseMatrix m(3, 3);
  m.insert(0, 0) = 0.0;
  m.insert(1, 2) = 2.0;
  const SparseMatrix f = finalized(m);
  CHECK(f.nonZeros() == 1);
  CHECK(f.isCompressed());
  CHECK(max_abs_entry(f) == 2.0);
  CHECK(hermiticity_error(identity(3)) == 0.0);
}
