#pragma once

#include <utility>
#include <vector>

#include "pencilscope/complex_matrix.hpp"

namespace pencilscope {

struct HermitianEigenDecomposition {
  std::vector<double> eigenvalues;      // ascending
  std::vector<ComplexVector> eigenvectors;  // unit vectors, same order
};

struct Inertia {
  int n_plus = 0;
  int n_minus = 0;
  int n_zero = 0;
};

/// Full spectrum of a Hermitian matrix by cyclic Jacobi rotations.
/// Deterministic for identical input bits; eigenvectors come out orthonormal
/// by construction, each with its largest-magnitude entry made real positive.
HermitianEigenDecomposition hermitian_eigen(const ComplexMatrix& a);

/// Determinant by pivoted Gaussian elimination.
Complex complex_det(const ComplexMatrix& a);

/// Counts of eigenvalues above zero_tol, below -zero_tol, and inside the band.
Inertia inertia(const ComplexMatrix& a, double zero_tol);

/// Scale-aware default band: 1e-9 * Frobenius norm (floored for the zero matrix).
Inertia inertia(const ComplexMatrix& a);

/// All eigenvalues of a general complex matrix with algebraic multiplicities,
/// via the characteristic polynomial (Faddeev-LeVerrier) and simultaneous
/// root iteration.  Adequate for desk-scale matrices; not a QR replacement.
std::vector<std::pair<Complex, int>> general_eigenvalues(const ComplexMatrix& a);

/// Solve A x = b by pivoted elimination.  Throws SingularJ-agnostic failure via
/// NoConvergence when the pivot collapses; callers guard invertibility themselves.
ComplexVector solve_linear(const ComplexMatrix& a, const ComplexVector& b);

/// Matrix inverse via column-by-column solves.
ComplexMatrix inverse(const ComplexMatrix& a);

struct SvdResult {
  ComplexMatrix u;                 // left singular vectors (columns)
  std::vector<double> singular;    // descending
  ComplexMatrix v;                 // right singular vectors (columns); A = U S V*
};

/// One-sided Jacobi SVD for square (or tall) matrices.  Small singular values
/// come out accurately, which is what the rank decisions downstream need.
SvdResult svd(const ComplexMatrix& a);

/// Numerical rank with a relative threshold on the largest singular value.
int numerical_rank(const SvdResult& s, double rel_tol);

/// Orthonormal basis of the null space of A (columns), threshold relative.
std::vector<ComplexVector> null_space(const ComplexMatrix& a, double rel_tol);

/// Minimum-norm least-squares solution of A x = b with relative rank threshold.
ComplexVector lstsq_min_norm(const ComplexMatrix& a, const ComplexVector& b, double rel_tol);

/// Roots of a polynomial given by coefficients c[0] + c[1] x + ... + c[n] x^n,
/// by Durand-Kerner iteration.  Returns all n roots, unclustered.
std::vector<Complex> polynomial_roots(const std::vector<Complex>& coeffs);

/// Cluster a root list into (value, multiplicity) pairs.  The merge tolerance
/// starts at base_tol*(1+|z|) and widens with candidate multiplicity to absorb
/// the eps^(1/m) scatter that simultaneous iteration leaves on multiple roots;
/// cluster centers are then polished against the supplied polynomial (pass an
/// empty coefficient list to skip polishing).
std::vector<std::pair<Complex, int>> cluster_roots(const std::vector<Complex>& roots,
                                                   double base_tol,
                                                   const std::vector<Complex>& coeffs);

/// Characteristic polynomial coefficients (ascending powers, monic leading 1).
std::vector<Complex> characteristic_polynomial(const ComplexMatrix& a);

/// Principal angles between the spans of two sets of vectors, ascending (radians).
std::vector<double> principal_angles(const std::vector<ComplexVector>& a,
                                     const std::vector<ComplexVector>& b);

/// Orthonormalize a spanning set (modified Gram-Schmidt), dropping dependents.
std::vector<ComplexVector> orthonormalize(const std::vector<ComplexVector>& vs, double drop_tol = 1e-12);

}  // namespace pencilscope
