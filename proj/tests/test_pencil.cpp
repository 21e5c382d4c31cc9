#include "pencilscope/pencil.hpp"

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"

using namespace pencilscope;

TEST_CASE("pencil_from_hamiltonian: canonical J squares to the identity under i") {
  auto sys = fixtures::example1();
  // K = iJ here because (iJ)^2 = I.
  ComplexMatrix ij = sys.j();
  ij *= Complex(0.0, 1.0);
  CHECK((sys.k() - ij).max_abs() < 1e-13);

  MatrixPencil p = pencil_from_hamiltonian(sys);
  CHECK(p.kind() == PencilKind::Polynomial);
  CHECK(p.degree() == 1);
  CHECK(p.is_selfadjoint());
  CHECK((p.evaluate(0.0) - sys.l()).max_abs() < 1e-14);
}

TEST_CASE("pencil_from_hamiltonian: J = i*I gives K = -I") {
  ComplexMatrix j = ComplexMatrix::identity(2);
  j *= Complex(0.0, 1.0);
  HamiltonianSystem sys(j, ComplexMatrix::diagonal({1.0, -3.0}));
  ComplexMatrix expected = ComplexMatrix::identity(2);
  expected *= Complex(-1.0);
  CHECK((sys.k() - expected).max_abs() < 1e-14);
}

TEST_CASE("pencil_from_hamiltonian: complex structure matrix still yields Hermitian K") {
  auto sys = fixtures::example3();
  CHECK(sys.k().is_hermitian(1e-14));
}

TEST_CASE("HamiltonianSystem: rejects singular J") {
  ComplexMatrix j = ComplexMatrix::zero(2);
  CHECK_THROWS_AS(HamiltonianSystem(j, ComplexMatrix::identity(2)), Error);
}

TEST_CASE("dde_pencil: zero delay matrix reduces to the shifted resolvent form") {
  ComplexMatrix a{{2.0, 1.0}, {1.0, -1.0}};
  MatrixPencil p = dde_pencil(a, ComplexMatrix::zero(2), 0.7);
  for (Complex lam : {Complex(0.3, 0.0), Complex(-1.0, 2.0)}) {
    ComplexMatrix expect = ComplexMatrix::identity(2);
    expect *= lam;
    expect -= a;
    CHECK((p.evaluate(lam) - expect).max_abs() < 1e-13);
  }
}

TEST_CASE("dde_pencil: at lambda 0 the evaluation is -A - B") {
  ComplexMatrix b = ComplexMatrix::identity(2);
  MatrixPencil p = dde_pencil(ComplexMatrix::zero(2), b, 1.0);
  ComplexMatrix expect = ComplexMatrix::identity(2);
  expect *= Complex(-1.0);
  CHECK((p.evaluate(0.0) - expect).max_abs() < 1e-14);
}

TEST_CASE("evaluate: quadratic fixture at its triple characteristic value") {
  MatrixPencil q1 = fixtures::quadratic1();
  ComplexMatrix at1 = q1.evaluate(1.0);
  CHECK(at1(0, 0) == Complex(0.0));
  CHECK(at1(0, 1) == Complex(0.0));
  CHECK(at1(1, 0) == Complex(0.0));
  CHECK(at1(1, 1) == Complex(4.0));
  CHECK(std::abs(complex_det(q1.evaluate(1.0))) < 1e-14);
}

TEST_CASE("pencil_derivative: linear pencil differentiates to its slope coefficient") {
  auto sys = fixtures::example1();
  MatrixPencil p = pencil_from_hamiltonian(sys);
  MatrixPencil d = p.derivative(1);
  ComplexMatrix minus_k = sys.k();
  minus_k *= Complex(-1.0);
  CHECK((d.evaluate(2.7) - minus_k).max_abs() < 1e-14);
}

TEST_CASE("pencil_derivative: second derivative of the quadratic fixture is 2I") {
  MatrixPencil d2 = fixtures::quadratic1().derivative(2);
  ComplexMatrix expect = ComplexMatrix::identity(2);
  expect *= Complex(2.0);
  CHECK((d2.evaluate(-0.3) - expect).max_abs() < 1e-14);
}

TEST_CASE("pencil_derivative: order beyond the degree vanishes") {
  MatrixPencil d3 = fixtures::quadratic1().derivative(3);
  CHECK(d3.evaluate(1.4).max_abs() == 0.0);
}

TEST_CASE("pencil_derivative: matches central differences on random pencils") {
  fixtures::Rng rng(2024);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 2 + static_cast<int>(rng.next() % 3);
    const int deg = 1 + static_cast<int>(rng.next() % 3);
    std::vector<ComplexMatrix> coeffs;
    for (int k = 0; k <= deg; ++k) coeffs.push_back(rng.matrix(n, 1.0));
    MatrixPencil p = MatrixPencil::polynomial(coeffs);
    MatrixPencil d = p.derivative(1);
    const double lam = rng.uniform(-2.0, 2.0);
    const double h = 1e-5;
    ComplexMatrix fd = p.evaluate(lam + h) - p.evaluate(lam - h);
    fd *= Complex(1.0 / (2.0 * h));
    CHECK((fd - d.evaluate(lam)).max_abs() < 1e-8 * (1.0 + d.evaluate(lam).max_abs()));
  }
}

TEST_CASE("dde derivative: analytic form against central differences") {
  MatrixPencil p = fixtures::dde_scalar();
  MatrixPencil d1 = p.derivative(1);
  MatrixPencil d2 = p.derivative(2);
  const double lam = 0.37;
  const double h = 1e-5;
  Complex fd1 = (p.evaluate(lam + h)(0, 0) - p.evaluate(lam - h)(0, 0)) / (2.0 * h);
  Complex fd2 =
      (p.evaluate(lam + h)(0, 0) - 2.0 * p.evaluate(lam)(0, 0) + p.evaluate(lam - h)(0, 0)) / (h * h);
  CHECK(std::abs(fd1 - d1.evaluate(lam)(0, 0)) < 1e-9);
  CHECK(std::abs(fd2 - d2.evaluate(lam)(0, 0)) < 1e-5);
}

TEST_CASE("is_selfadjoint: Hermitian coefficients pass, perturbed ones fail") {
  CHECK(fixtures::quadratic1().is_selfadjoint());

  ComplexMatrix sigma2{{0.0, Complex(0.0, -1.0)}, {Complex(0.0, 1.0), 0.0}};
  MatrixPencil p = MatrixPencil::polynomial({sigma2, ComplexMatrix::identity(2)});
  CHECK(p.is_selfadjoint());

  ComplexMatrix bad{{1.0, Complex(2.0, 1e-3)}, {2.0, 3.0}};
  MatrixPencil pb = MatrixPencil::polynomial({bad, ComplexMatrix::identity(2)});
  CHECK_FALSE(pb.is_selfadjoint());
}

TEST_CASE("is_selfadjoint: scalar delay pencil with real data passes the probe check") {
  CHECK(fixtures::dde_scalar().is_selfadjoint());
}

TEST_CASE("companion_matrix: linear pencil reduces to a single block") {
  ComplexMatrix l0{{1.0, 0.5}, {0.5, -1.0}};
  MatrixPencil p = MatrixPencil::polynomial({l0, ComplexMatrix::identity(2)});
  ComplexMatrix c = companion_matrix(p);
  REQUIRE(c.rows() == 2);
  ComplexMatrix expect = l0;
  expect *= Complex(-1.0);
  CHECK((c - expect).max_abs() < 1e-14);
}

TEST_CASE("companion_matrix: quadratic fixture spectrum is {1,1,1,-1}") {
  ComplexMatrix c = companion_matrix(fixtures::quadratic1());
  REQUIRE(c.rows() == 4);
  auto eigs = general_eigenvalues(c);
  std::sort(eigs.begin(), eigs.end(),
            [](const auto& a, const auto& b) { return a.first.real() < b.first.real(); });
  REQUIRE(eigs.size() == 2);
  CHECK(std::abs(eigs[0].first - Complex(-1.0, 0.0)) < 1e-7);
  CHECK(eigs[0].second == 1);
  CHECK(std::abs(eigs[1].first - Complex(1.0, 0.0)) < 1e-6);
  CHECK(eigs[1].second == 3);
}

TEST_CASE("companion_matrix: cubic pencil on a 2-dim space is 6x6") {
  fixtures::Rng rng(8);
  std::vector<ComplexMatrix> coeffs;
  for (int k = 0; k < 3; ++k) coeffs.push_back(rng.hermitian(2));
  coeffs.push_back(ComplexMatrix::identity(2));
  ComplexMatrix c = companion_matrix(MatrixPencil::polynomial(coeffs));
  CHECK(c.rows() == 6);
  CHECK(c.cols() == 6);
}

TEST_CASE("companion_matrix: rejects singular leading coefficient") {
  ComplexMatrix l0 = ComplexMatrix::identity(2);
  ComplexMatrix l1 = ComplexMatrix::zero(2);
  l1(0, 0) = 1.0;  // rank deficient
  CHECK_THROWS_AS(companion_matrix(MatrixPencil::polynomial({l0, l1})), Error);
}

TEST_CASE("hankel_form: linear selfadjoint pencil gives its slope block") {
  auto sys = fixtures::example1();
  MatrixPencil p = pencil_from_hamiltonian(sys);
  ComplexMatrix b = hankel_form(p);
  ComplexMatrix minus_k = sys.k();
  minus_k *= Complex(-1.0);
  CHECK((b - minus_k).max_abs() < 1e-14);
}

TEST_CASE("hankel_form: quadratic block pattern [[L1, I], [I, 0]]") {
  MatrixPencil q1 = fixtures::quadratic1();
  ComplexMatrix b = hankel_form(q1);
  REQUIRE(b.rows() == 4);
  const ComplexMatrix& l1 = q1.coefficient(1);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      CHECK(b(i, j) == l1(i, j));
      CHECK(b(i, 2 + j) == (i == j ? Complex(1.0) : Complex(0.0)));
      CHECK(b(2 + i, j) == (i == j ? Complex(1.0) : Complex(0.0)));
      CHECK(b(2 + i, 2 + j) == Complex(0.0));
    }
}

TEST_CASE("hankel_form: intertwines the companion matrix with its adjoint") {
  MatrixPencil q2 = fixtures::quadratic2();
  ComplexMatrix b = hankel_form(q2);
  ComplexMatrix c = companion_matrix(q2);
  ComplexMatrix lhs = b * c;
  ComplexMatrix rhs = c.adjoint() * b;
  CHECK((lhs - rhs).max_abs() < 1e-10);
}

TEST_CASE("characteristic_values: quadratic fixtures factor as expected") {
  auto vals1 = characteristic_values(fixtures::quadratic1());
  REQUIRE(vals1.size() == 2);
  std::sort(vals1.begin(), vals1.end(),
            [](const auto& a, const auto& b) { return a.first.real() < b.first.real(); });
  CHECK(std::abs(vals1[0].first - Complex(-1.0, 0.0)) < 1e-6);
  CHECK(vals1[0].second == 1);
  CHECK(std::abs(vals1[1].first - Complex(1.0, 0.0)) < 1e-6);
  CHECK(vals1[1].second == 3);
}

TEST_CASE("characteristic_values: unstable fixture has only imaginary values") {
  MatrixPencil p = pencil_from_hamiltonian(fixtures::example2());
  auto vals = characteristic_values(p);
  int real_count = 0;
  int total = 0;
  for (const auto& [z, m] : vals) {
    total += m;
    if (std::abs(z.imag()) < 1e-6 * (1.0 + std::abs(z))) real_count += m;
    else CHECK(std::abs(std::abs(z.imag()) - 2.0) < 1e-6);
  }
  CHECK(real_count == 0);
  CHECK(total == 4);
}

TEST_CASE("characteristic_values: definite fixture gives four simple real values") {
  MatrixPencil p = pencil_from_hamiltonian(fixtures::example1());
  auto vals = characteristic_values(p);
  REQUIRE(vals.size() == 4);
  std::vector<double> expect = {-std::sqrt(2.0), -std::sqrt(0.75), std::sqrt(0.75), std::sqrt(2.0)};
  std::vector<double> got;
  for (const auto& [z, m] : vals) {
    CHECK(m == 1);
    CHECK(std::abs(z.imag()) < 1e-8);
    got.push_back(z.real());
  }
  std::sort(got.begin(), got.end());
  for (int i = 0; i < 4; ++i) CHECK(got[i] == doctest::Approx(expect[i]).epsilon(1e-8));
}

TEST_CASE("characteristic_values: conjugation symmetry for selfadjoint pencils") {
  fixtures::Rng rng(606);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 2 + static_cast<int>(rng.next() % 3);
    const int deg = 1 + static_cast<int>(rng.next() % 2);
    std::vector<ComplexMatrix> coeffs;
    for (int k = 0; k < deg; ++k) coeffs.push_back(rng.hermitian(n));
    coeffs.push_back(ComplexMatrix::identity(n));
    auto vals = characteristic_values(MatrixPencil::polynomial(coeffs));
    for (const auto& [z, m] : vals) {
      if (std::abs(z.imag()) < 1e-7 * (1.0 + std::abs(z))) continue;
      bool found = false;
      for (const auto& [w, wm] : vals)
        found = found || (std::abs(w - std::conj(z)) < 1e-5 * (1.0 + std::abs(z)) && wm == m);
      CHECK(found);
    }
  }
}

TEST_CASE("characteristic_values: cross-oracle against the J*L spectrum") {
  fixtures::Rng rng(909);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = (rng.next() % 2 == 0) ? 4 : 6;
    ComplexMatrix j = rng.skew_hermitian(n, 1.0);
    const double jdet = std::abs(complex_det(j));
    if (jdet < 1e-3) continue;
    ComplexMatrix l = rng.hermitian(n, 1.0);
    HamiltonianSystem sys(j, l);
    auto pencil_vals = characteristic_values(pencil_from_hamiltonian(sys));
    auto jl_vals = general_eigenvalues(sys.jl());
    REQUIRE(pencil_vals.size() == jl_vals.size());
    // lambda = i*nu maps one spectrum onto the other.
    for (const auto& [lam, m] : pencil_vals) {
      const Complex nu = Complex(0.0, -1.0) * lam;
      bool found = false;
      for (const auto& [z, zm] : jl_vals)
        found = found || (std::abs(z - nu) < 1e-5 * (1.0 + std::abs(nu)) && zm == m);
      CHECK(found);
    }
  }
}

TEST_CASE("characteristic_values: determinant factors through the root set") {
  fixtures::Rng rng(3131);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 2 + static_cast<int>(rng.next() % 2);
    std::vector<ComplexMatrix> coeffs = {rng.hermitian(n), rng.hermitian(n),
                                         ComplexMatrix::identity(n)};
    MatrixPencil p = MatrixPencil::polynomial(coeffs);
    auto vals = characteristic_values(p);
    const Complex probe = rng.complex_in_disk(1.5);
    Complex expect = complex_det(p.coefficient(2));
    for (const auto& [z, m] : vals)
      for (int i = 0; i < m; ++i) expect *= probe - z;
    const Complex got = complex_det(p.evaluate(probe));
    CHECK(std::abs(got - expect) <= 1e-6 * std::max(1.0, std::abs(expect)));
  }
}
