#include "pencilscope/branches.hpp"

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"

using namespace pencilscope;

TEST_CASE("sample_branches: definite fixture has all branches positive at zero") {
  MatrixPencil p = pencil_from_hamiltonian(fixtures::example1());
  BranchFamily fam = sample_branches(p, -3.0, 3.0, 241);
  REQUIRE(fam.branch_count() == 4);

  auto it = std::lower_bound(fam.grid.begin(), fam.grid.end(), 0.0);
  const int idx = static_cast<int>(it - fam.grid.begin());
  for (int j = 0; j < 4; ++j) CHECK(fam.branches[j].mu[idx] > 0.0);
}

TEST_CASE("sample_branches: asymptotic slopes approach the negated slope spectrum") {
  auto sys = fixtures::example1();
  MatrixPencil p = pencil_from_hamiltonian(sys);
  BranchFamily fam = sample_branches(p, -30.0, 30.0, 601);

  // Far out, d mu / d lambda tends to the negated eigenvalues of K: {+1,+1,-1,-1}.
  std::vector<double> slopes;
  const int g = fam.grid_size();
  for (int j = 0; j < 4; ++j) {
    const double slope = (fam.branches[j].mu[g - 1] - fam.branches[j].mu[g - 2]) /
                         (fam.grid[g - 1] - fam.grid[g - 2]);
    slopes.push_back(slope);
  }
  std::sort(slopes.begin(), slopes.end());
  CHECK(slopes[0] == doctest::Approx(-1.0).epsilon(1e-2));
  CHECK(slopes[1] == doctest::Approx(-1.0).epsilon(1e-2));
  CHECK(slopes[2] == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(slopes[3] == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("sample_branches: indefinite fixture keeps the spectrum away from zero") {
  MatrixPencil p = pencil_from_hamiltonian(fixtures::example2());
  BranchFamily fam = sample_branches(p, -3.0, 3.0, 241);
  double min_abs = 1e300;
  for (const auto& br : fam.branches)
    for (double mu : br.mu) min_abs = std::min(min_abs, std::abs(mu));
  CHECK(min_abs > 0.1);
}

TEST_CASE("sample_branches: values at each grid point are a permutation of the spectrum") {
  MatrixPencil p = pencil_from_hamiltonian(fixtures::example3());
  BranchFamily fam = sample_branches(p, -2.0, 2.0, 101);
  for (int i = 0; i < fam.grid_size(); ++i) {
    auto eig = hermitian_eigen(p.evaluate(fam.grid[i]));
    std::vector<double> got;
    for (const auto& br : fam.branches) got.push_back(br.mu[i]);
    std::sort(got.begin(), got.end());
    for (int j = 0; j < 4; ++j) CHECK(got[j] == eig.eigenvalues[j]);
  }
}

TEST_CASE("sample_branches: rejects non-selfadjoint input") {
  ComplexMatrix bad{{0.0, 1.0}, {2.0, 0.0}};
  MatrixPencil p = MatrixPencil::polynomial({bad, ComplexMatrix::identity(2)});
  CHECK_THROWS_AS(sample_branches(p, -1.0, 1.0, 11), Error);
}

TEST_CASE("find_crossings: definite fixture crossings sit at the analytic roots") {
  // Block determinants factor as (3/4 - lambda^2)(2 - lambda^2).
  MatrixPencil p = pencil_from_hamiltonian(fixtures::example1());
  BranchFamily fam = sample_branches(p, -3.0, 3.0, 241);
  auto events = find_crossings(p, fam);
  REQUIRE(events.size() == 4);
  std::vector<double> expect = {-std::sqrt(2.0), -std::sqrt(0.75), std::sqrt(0.75), std::sqrt(2.0)};
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(events[i].lambda0 - expect[i]) < 1e-8);
    CHECK(events[i].geometric_multiplicity() == 1);
    CHECK(events[i].algebraic_multiplicity() == 1);
  }
}

TEST_CASE("find_crossings: no events when branches stay away from zero") {
  MatrixPencil p = pencil_from_hamiltonian(fixtures::example2());
  BranchFamily fam = sample_branches(p, -3.0, 3.0, 241);
  CHECK(find_crossings(p, fam).empty());
}

TEST_CASE("find_crossings: four transversal crossings with alternating slopes") {
  MatrixPencil p = pencil_from_hamiltonian(fixtures::example3());
  BranchFamily fam = sample_branches(p, -14.0, 14.0, 561);
  auto events = find_crossings(p, fam);
  REQUIRE(events.size() == 4);
  std::vector<int> etas;
  for (const auto& ev : events) {
    REQUIRE(ev.branches.size() == 1);
    CHECK(ev.branches[0].order == 1);
    etas.push_back(ev.branches[0].eta);
  }
  CHECK(etas == std::vector<int>{1, -1, 1, -1});
}

TEST_CASE("find_crossings: cubic tangency produces one order-3 crossing") {
  MatrixPencil p = fixtures::quadratic1();
  BranchFamily fam = sample_branches(p, -2.5, 2.5, 241);
  auto events = find_crossings(p, fam);
  REQUIRE(events.size() == 2);
  CHECK(std::abs(events[0].lambda0 + 1.0) < 1e-8);
  CHECK(events[0].algebraic_multiplicity() == 1);
  CHECK(std::abs(events[1].lambda0 - 1.0) < 1e-4);
  CHECK(events[1].geometric_multiplicity() == 1);
  CHECK(events[1].branches[0].order == 3);
}

TEST_CASE("find_crossings: double kernel splits into orders two and one") {
  MatrixPencil p = fixtures::quadratic2();
  BranchFamily fam = sample_branches(p, -2.5, 2.5, 241);
  auto events = find_crossings(p, fam);
  REQUIRE(events.size() == 2);
  CHECK(std::abs(events[0].lambda0 + 1.0) < 1e-8);
  const CrossingEvent& at1 = events[1];
  CHECK(std::abs(at1.lambda0 - 1.0) < 1e-6);
  REQUIRE(at1.geometric_multiplicity() == 2);
  std::vector<int> orders;
  for (const auto& bv : at1.branches) orders.push_back(bv.order);
  std::sort(orders.begin(), orders.end());
  CHECK(orders == std::vector<int>{1, 2});
  CHECK(at1.algebraic_multiplicity() == 3);
}

TEST_CASE("find_crossings: pure even-order touch without sign change") {
  // Scalar family -lambda^2: one branch grazing zero from below.
  ComplexMatrix minus_one{{-1.0}};
  MatrixPencil p = MatrixPencil::polynomial(
      {ComplexMatrix::zero(1), ComplexMatrix::zero(1), minus_one});
  BranchFamily fam = sample_branches(p, -1.0, 1.0, 87);  // grid avoids hitting 0 exactly
  auto events = find_crossings(p, fam);
  REQUIRE(events.size() == 1);
  CHECK(std::abs(events[0].lambda0) < 1e-7);
  CHECK(events[0].branches[0].order == 2);
  CHECK(events[0].branches[0].eta == -1);
}

TEST_CASE("find_crossings: scalar delay pencil has its root inside (-1, 0)") {
  MatrixPencil p = fixtures::dde_scalar();
  BranchFamily fam = sample_branches(p, -2.0, 2.0, 161);
  auto events = find_crossings(p, fam);
  REQUIRE(events.size() == 1);
  CHECK(events[0].lambda0 > -1.0);
  CHECK(events[0].lambda0 < 0.0);
  // Residual check against the scalar characteristic function.
  const double lam = events[0].lambda0;
  CHECK(std::abs(lam + 1.0 - 0.5 * std::exp(-lam)) < 1e-9);
}

TEST_CASE("order_of_vanishing: transversal crossing reports order one with slope sign") {
  MatrixPencil p = pencil_from_hamiltonian(fixtures::example1());
  BranchFamily fam = sample_branches(p, -3.0, 3.0, 241);
  auto events = find_crossings(p, fam);
  for (const auto& ev : events) {
    auto [m, eta] = order_of_vanishing(p, fam, ev.branches[0].branch_id, ev.lambda0);
    CHECK(m == 1);
    CHECK((eta == 1 || eta == -1));
    // Negative characteristic values rise through zero; positive ones fall.
    CHECK(eta == (ev.lambda0 < 0 ? 1 : -1));
  }
}

TEST_CASE("order_of_vanishing: rejects a non-vanishing point") {
  MatrixPencil p = pencil_from_hamiltonian(fixtures::example1());
  BranchFamily fam = sample_branches(p, -3.0, 3.0, 241);
  CHECK_THROWS_AS(order_of_vanishing(p, fam, 0, 0.1), Error);
}

TEST_CASE("geometric_multiplicity: kernel dimensions of the quadratic fixtures") {
  CHECK(geometric_multiplicity(fixtures::quadratic1(), 1.0) == 1);
  CHECK(geometric_multiplicity(fixtures::quadratic1(), -1.0) == 1);
  CHECK(geometric_multiplicity(fixtures::quadratic2(), 1.0) == 2);
  CHECK(geometric_multiplicity(fixtures::quadratic1(), 0.37) == 0);
}

TEST_CASE("crossing multiplicities agree with the real characteristic values") {
  fixtures::Rng rng(171717);
  int done = 0;
  while (done < 5) {
    const int n = 2 + static_cast<int>(rng.next() % 3);
    const int deg = 1 + static_cast<int>(rng.next() % 3);
    std::vector<ComplexMatrix> coeffs;
    for (int k = 0; k < deg; ++k) coeffs.push_back(rng.hermitian(n));
    coeffs.push_back(ComplexMatrix::identity(n));
    MatrixPencil p = MatrixPencil::polynomial(coeffs);

    std::vector<double> real_vals;
    int real_alg = 0;
    bool awkward = false;
    for (const auto& [z, m] : characteristic_values(p)) {
      if (std::abs(z.imag()) <= 1e-6 * (1.0 + std::abs(z))) {
        real_vals.push_back(z.real());
        real_alg += m;
      } else if (std::abs(z.imag()) < 1e-2) {
        awkward = true;  // too close to the axis to classify robustly
      }
    }
    std::sort(real_vals.begin(), real_vals.end());
    for (size_t i = 0; i + 1 < real_vals.size(); ++i)
      awkward = awkward || (real_vals[i + 1] - real_vals[i] < 5e-2);
    if (awkward) continue;
    ++done;

    double hi = 1.0;
    for (double v : real_vals) hi = std::max(hi, std::abs(v));
    BranchFamily fam = sample_branches(p, -hi - 1.0, hi + 1.0, 241);
    auto events = find_crossings(p, fam);
    int crossing_alg = 0;
    for (const auto& ev : events) crossing_alg += ev.algebraic_multiplicity();
    CHECK(crossing_alg == real_alg);
  }
}

TEST_CASE("crossings of real systems are symmetric under reflection") {
  fixtures::Rng rng(2929);
  int done = 0;
  while (done < 4) {
    ComplexMatrix j(4, 4);
    // Random real invertible skew-symmetric structure matrix.
    double a = rng.uniform(0.5, 2.0), b = rng.uniform(0.5, 2.0);
    j(0, 2) = a;
    j(2, 0) = -a;
    j(1, 3) = b;
    j(3, 1) = -b;
    ComplexMatrix l = rng.real_symmetric(4, 1.5);
    HamiltonianSystem sys(j, l);
    MatrixPencil p = pencil_from_hamiltonian(sys);

    std::vector<double> real_vals;
    bool awkward = false;
    for (const auto& [z, m] : characteristic_values(p)) {
      if (std::abs(z.imag()) <= 1e-6 * (1.0 + std::abs(z))) real_vals.push_back(z.real());
      else if (std::abs(z.imag()) < 1e-2) awkward = true;
    }
    std::sort(real_vals.begin(), real_vals.end());
    for (size_t i = 0; i + 1 < real_vals.size(); ++i)
      awkward = awkward || (real_vals[i + 1] - real_vals[i] < 5e-2);
    if (awkward || real_vals.empty()) continue;
    if (std::abs(real_vals.front()) < 5e-2 || std::abs(real_vals.back()) < 5e-2) continue;
    ++done;

    double hi = 1.0 + std::max(std::abs(real_vals.front()), std::abs(real_vals.back()));
    BranchFamily fam = sample_branches(p, -hi, hi, 241);
    auto events = find_crossings(p, fam);
    CHECK(events.size() % 2 == 0);
    for (const auto& ev : events) {
      bool mirrored = false;
      for (const auto& other : events)
        mirrored = mirrored || (std::abs(other.lambda0 + ev.lambda0) < 1e-6 &&
                                other.algebraic_multiplicity() == ev.algebraic_multiplicity());
      CHECK(mirrored);
    }

    // Total intercept count (with algebraic multiplicity) is even for 2n-dim systems.
    int total = 0;
    for (const auto& ev : events) total += ev.algebraic_multiplicity();
    CHECK(total % 2 == 0);
  }
}
