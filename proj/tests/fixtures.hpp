#pragma once

#include <cstdint>
#include <vector>

#include "pencilscope/pencil.hpp"

namespace fixtures {

using pencilscope::Complex;
using pencilscope::ComplexMatrix;
using pencilscope::ComplexVector;
using pencilscope::HamiltonianSystem;
using pencilscope::MatrixPencil;

inline ComplexMatrix canonical_j4() {
  return ComplexMatrix{{0, 0, 1, 0}, {0, 0, 0, 1}, {-1, 0, 0, 0}, {0, -1, 0, 0}};
}

// Definite system: L = diag(1,2,3,4)/2 with the canonical structure matrix.
inline HamiltonianSystem example1() {
  ComplexMatrix l = ComplexMatrix::diagonal({0.5, 1.0, 1.5, 2.0});
  return HamiltonianSystem(canonical_j4(), l);
}

// Indefinite and fully unstable: branches stay away from zero.
inline HamiltonianSystem example2() {
  ComplexMatrix j{{0, 0, 2, 0}, {0, 0, 0, 1}, {-2, 0, 0, 0}, {0, -1, 0, 0}};
  ComplexMatrix l = ComplexMatrix::diagonal({-1.0, 2.0, 1.0, -2.0});
  return HamiltonianSystem(j, l);
}

// Indefinite but spectrally stable; complex structure matrix breaks the
// left-right symmetry of the branch plot.
inline HamiltonianSystem example3() {
  const Complex mi(0.0, -1.0);
  ComplexMatrix j{{0, mi, 0, 0}, {mi, 0, 0, 0}, {0, 0, 0, mi}, {0, 0, mi, 0}};
  ComplexMatrix l{{1.0, -4.0, 2.5, 0.0},
                  {-4.0, -1.5, 0.0, 0.0},
                  {2.5, 0.0, 4.5, -4.0},
                  {0.0, 0.0, -4.0, 6.5}};
  return HamiltonianSystem(j, l);
}

// Four simple values whose determinant slope happens to track the signature.
inline HamiltonianSystem kreinmatch() {
  ComplexMatrix j{{0, 0, 2, 0}, {0, 0, 0, 1}, {-2, 0, 0, 0}, {0, -1, 0, 0}};
  ComplexMatrix l = ComplexMatrix::diagonal({2.0, -1.0, 1.0, -2.0});
  return HamiltonianSystem(j, l);
}

// Negative definite: determinant slope alone misreads half the signatures.
inline HamiltonianSystem kreinmismatch() {
  ComplexMatrix l = ComplexMatrix::diagonal({-0.5, -1.0, -1.5, -2.0});
  return HamiltonianSystem(canonical_j4(), l);
}

// Quadratic pencil with det = (lambda-1)^3 (lambda+1) and a 1-dim kernel at 1.
inline MatrixPencil quadratic1() {
  ComplexMatrix l0{{1, 2}, {2, 3}};
  ComplexMatrix l1{{-2, -2}, {-2, 0}};
  return MatrixPencil::polynomial({l0, l1, ComplexMatrix::identity(2)});
}

// Same determinant but the pencil vanishes identically at 1 (2-dim kernel).
inline MatrixPencil quadratic2() {
  ComplexMatrix l0{{0, 1}, {1, 0}};
  ComplexMatrix l1{{-1, -1}, {-1, -1}};
  return MatrixPencil::polynomial({l0, l1, ComplexMatrix::identity(2)});
}

struct SweepFixture {
  ComplexMatrix base;
  ComplexMatrix direction;
  ComplexMatrix j;
};

// L(t) = diag(5,1,3,2) + t * (e12 + e21); crossings survive the perturbation.
inline SweepFixture branch_preservation() {
  SweepFixture f;
  f.base = ComplexMatrix::diagonal({5.0, 1.0, 3.0, 2.0});
  f.direction = ComplexMatrix{{0, 1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}};
  const Complex mi(0.0, -1.0);
  const Complex mhi(0.0, -0.5);
  f.j = ComplexMatrix{{0, mi, 0, 0}, {mi, 0, 0, 0}, {0, 0, 0, mhi}, {0, 0, mhi, 0}};
  return f;
}

inline MatrixPencil dde_scalar() {
  ComplexMatrix a{{-1.0}};
  ComplexMatrix b{{0.5}};
  return pencilscope::dde_pencil(a, b, 1.0);
}

// splitmix64; deterministic across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double uniform(double lo, double hi) {
    const double u = static_cast<double>(next() >> 11) / 9007199254740992.0;
    return lo + (hi - lo) * u;
  }

  Complex complex_in_disk(double radius) {
    return Complex(uniform(-radius, radius), uniform(-radius, radius));
  }

  ComplexMatrix matrix(int n, double radius = 1.0) {
    ComplexMatrix m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = complex_in_disk(radius);
    return m;
  }

  ComplexMatrix hermitian(int n, double radius = 1.0) {
    ComplexMatrix m = matrix(n, radius);
    ComplexMatrix h = m + m.adjoint();
    h *= Complex(0.5);
    return h;
  }

  ComplexMatrix real_symmetric(int n, double radius = 1.0) {
    ComplexMatrix m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double v = uniform(-radius, radius);
        m(i, j) = v;
        m(j, i) = v;
      }
    return m;
  }

  ComplexMatrix skew_hermitian(int n, double radius = 1.0) {
    ComplexMatrix m = matrix(n, radius);
    ComplexMatrix s = m - m.adjoint();
    s *= Complex(0.5);
    return s;
  }

  // Random unitary via orthonormalization of a random complex matrix.
  ComplexMatrix unitary(int n) {
    while (true) {
      ComplexMatrix m = matrix(n, 1.0);
      std::vector<ComplexVector> cols;
      for (int j = 0; j < n; ++j) cols.push_back(m.column(j));
      std::vector<ComplexVector> q = pencilscope::orthonormalize(cols, 1e-6);
      if (static_cast<int>(q.size()) != n) continue;
      ComplexMatrix u(n, n);
      for (int j = 0; j < n; ++j) u.set_column(j, q[j]);
      return u;
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace fixtures
