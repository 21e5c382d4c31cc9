#include "pencilscope/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"

using namespace pencilscope;

namespace {

ComplexMatrix reconstruct(const HermitianEigenDecomposition& eig) {
  const int n = static_cast<int>(eig.eigenvalues.size());
  ComplexMatrix out(n, n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        out(i, j) += eig.eigenvalues[k] * eig.eigenvectors[k][i] * std::conj(eig.eigenvectors[k][j]);
  return out;
}

}  // namespace

TEST_CASE("hermitian_eigen: identity has a flat unit spectrum") {
  auto eig = hermitian_eigen(ComplexMatrix::identity(4));
  for (double mu : eig.eigenvalues) CHECK(mu == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("hermitian_eigen: diagonal spectrum comes back sorted") {
  auto eig = hermitian_eigen(ComplexMatrix::diagonal({1.5, 0.5, 2.0, 1.0}));
  std::vector<double> expect = {0.5, 1.0, 1.5, 2.0};
  for (int i = 0; i < 4; ++i) CHECK(eig.eigenvalues[i] == doctest::Approx(expect[i]).epsilon(1e-14));
}

TEST_CASE("hermitian_eigen: 2x2 symmetric flip matrix") {
  ComplexMatrix sigma1{{0, 1}, {1, 0}};
  auto eig = hermitian_eigen(sigma1);
  CHECK(eig.eigenvalues[0] == doctest::Approx(-1.0));
  CHECK(eig.eigenvalues[1] == doctest::Approx(1.0));
}

TEST_CASE("hermitian_eigen: rejects a non-Hermitian input") {
  ComplexMatrix m{{0, 1}, {1.001, 0}};
  CHECK_THROWS_AS(hermitian_eigen(m), Error);
}

TEST_CASE("hermitian_eigen: reconstruction and orthonormality on random input") {
  fixtures::Rng rng(12345);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng.next() % 7);
    ComplexMatrix a = rng.hermitian(n, 2.0);
    auto eig = hermitian_eigen(a);
    ComplexMatrix rec = reconstruct(eig);
    CHECK((rec - a).frobenius_norm() <= 1e-10 * std::max(1.0, a.frobenius_norm()));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Complex ip = inner(eig.eigenvectors[i], eig.eigenvectors[j]);
        CHECK(std::abs(ip - (i == j ? 1.0 : 0.0)) < 1e-11);
      }
  }
}

TEST_CASE("hermitian_eigen: deterministic for identical input bits") {
  fixtures::Rng rng(99);
  ComplexMatrix a = rng.hermitian(5);
  auto e1 = hermitian_eigen(a);
  auto e2 = hermitian_eigen(a);
  for (int i = 0; i < 5; ++i) {
    CHECK(e1.eigenvalues[i] == e2.eigenvalues[i]);
    for (int r = 0; r < 5; ++r) CHECK(e1.eigenvectors[i][r] == e2.eigenvectors[i][r]);
  }
}

TEST_CASE("complex_det: identity and diagonal cases") {
  CHECK(std::abs(complex_det(ComplexMatrix::identity(3)) - 1.0) < 1e-14);
  ComplexMatrix d = ComplexMatrix::diagonal({Complex(2.0, 0.0), Complex(0.0, 3.0)});
  CHECK(std::abs(complex_det(d) - Complex(0.0, 6.0)) < 1e-14);
}

TEST_CASE("inertia: counts split by the tolerance band") {
  Inertia in = inertia(ComplexMatrix::diagonal({-1.0, 2.0, 1.0, -2.0}), 1e-9);
  CHECK(in.n_plus == 2);
  CHECK(in.n_minus == 2);
  CHECK(in.n_zero == 0);

  Inertia neg = inertia(ComplexMatrix::diagonal({-0.5, -1.0, -1.5, -2.0}), 1e-9);
  CHECK(neg.n_plus == 0);
  CHECK(neg.n_minus == 4);

  Inertia zero = inertia(ComplexMatrix::zero(3), 1e-9);
  CHECK(zero.n_zero == 3);
}

TEST_CASE("inertia: invariant under unitary congruence") {
  fixtures::Rng rng(4242);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 3 + static_cast<int>(rng.next() % 4);
    ComplexMatrix a = rng.hermitian(n, 3.0);
    ComplexMatrix u = rng.unitary(n);
    Inertia base = inertia(a, 1e-9);
    Inertia rot = inertia(u.adjoint() * (a * u), 1e-9);
    CHECK(base.n_plus == rot.n_plus);
    CHECK(base.n_minus == rot.n_minus);
    CHECK(base.n_zero == rot.n_zero);
  }
}

TEST_CASE("general_eigenvalues: identity has a triple unit eigenvalue") {
  auto eigs = general_eigenvalues(ComplexMatrix::identity(3));
  REQUIRE(eigs.size() == 1);
  CHECK(std::abs(eigs[0].first - 1.0) < 1e-9);
  CHECK(eigs[0].second == 3);
}

TEST_CASE("general_eigenvalues: JL of the unstable fixture gives double real pairs") {
  auto sys = fixtures::example2();
  auto eigs = general_eigenvalues(sys.jl());
  REQUIRE(eigs.size() == 2);
  std::vector<std::pair<Complex, int>> sorted = eigs;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first.real() < b.first.real(); });
  CHECK(std::abs(sorted[0].first - Complex(-2.0, 0.0)) < 1e-7);
  CHECK(sorted[0].second == 2);
  CHECK(std::abs(sorted[1].first - Complex(2.0, 0.0)) < 1e-7);
  CHECK(sorted[1].second == 2);
}

TEST_CASE("general_eigenvalues: definite fixture stays on the imaginary axis") {
  auto sys = fixtures::example1();
  auto eigs = general_eigenvalues(sys.jl());
  int count = 0;
  for (const auto& [z, m] : eigs) {
    CHECK(std::abs(z.real()) < 1e-8);
    count += m;
  }
  CHECK(count == 4);
}

TEST_CASE("general_eigenvalues: product reproduces the determinant") {
  fixtures::Rng rng(777);
  for (int trial = 0; trial < 12; ++trial) {
    const int n = 2 + static_cast<int>(rng.next() % 5);
    ComplexMatrix a = rng.matrix(n, 1.5);
    Complex det = complex_det(a);
    Complex prod = 1.0;
    for (const auto& [z, m] : general_eigenvalues(a))
      for (int i = 0; i < m; ++i) prod *= z;
    CHECK(std::abs(prod - det) <= 1e-8 * std::max(1.0, std::abs(det)));
  }
}

TEST_CASE("polynomial_roots: cubic with a triple root clusters correctly") {
  // (x - 1)^3 (x + 1) = x^4 - 2x^3 + 2x - 1
  std::vector<Complex> coeffs = {-1.0, 2.0, 0.0, -2.0, 1.0};
  auto roots = polynomial_roots(coeffs);
  auto clustered = cluster_roots(roots, 1e-7, coeffs);
  REQUIRE(clustered.size() == 2);
  CHECK(std::abs(clustered[0].first - Complex(-1.0, 0.0)) < 1e-8);
  CHECK(clustered[0].second == 1);
  CHECK(std::abs(clustered[1].first - Complex(1.0, 0.0)) < 1e-8);
  CHECK(clustered[1].second == 3);
}

TEST_CASE("svd: rank and null space of a rank-deficient matrix") {
  ComplexMatrix a{{1, 2, 3}, {2, 4, 6}, {1, 1, 1}};
  SvdResult s = svd(a);
  CHECK(numerical_rank(s, 1e-10) == 2);
  auto ns = null_space(a, 1e-10);
  REQUIRE(ns.size() == 1);
  ComplexVector prod = a.apply(ns[0]);
  CHECK(norm2(prod) < 1e-12);
}

TEST_CASE("svd: singular values match eigenvalue magnitudes for Hermitian input") {
  fixtures::Rng rng(31);
  ComplexMatrix a = rng.hermitian(5, 2.0);
  SvdResult s = svd(a);
  auto eig = hermitian_eigen(a);
  std::vector<double> mags;
  for (double mu : eig.eigenvalues) mags.push_back(std::abs(mu));
  std::sort(mags.rbegin(), mags.rend());
  for (int i = 0; i < 5; ++i) CHECK(s.singular[i] == doctest::Approx(mags[i]).epsilon(1e-9));
}

TEST_CASE("lstsq_min_norm: recovers the exact solution of a square system") {
  fixtures::Rng rng(55);
  ComplexMatrix a = rng.matrix(4, 1.0);
  ComplexVector x0(4);
  for (int i = 0; i < 4; ++i) x0[i] = rng.complex_in_disk(1.0);
  ComplexVector b = a.apply(x0);
  ComplexVector x = lstsq_min_norm(a, b, 1e-12);
  CHECK(norm2(vec_sub(x, x0)) < 1e-9);
}

TEST_CASE("principal_angles: orthogonal spans give right angles") {
  ComplexVector e1 = {1, 0, 0};
  ComplexVector e2 = {0, 1, 0};
  auto angles = principal_angles({e1}, {e2});
  REQUIRE(angles.size() == 1);
  CHECK(angles[0] == doctest::Approx(std::acos(0.0)));
  auto same = principal_angles({e1}, {e1});
  CHECK(same[0] < 1e-12);
}
