#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "pencilscope/linalg.hpp"

namespace pencilscope {

enum class PencilKind { Polynomial, DelayTranscendental };

/// A lambda-parametrized matrix family.  Internally this is a matrix polynomial
/// plus an optional exponential term exp(-tau*lambda)*E, which covers both the
/// polynomial case (E absent) and the delay form lambda*I - A - exp(-tau*lambda)*B.
/// The exponential form is closed under differentiation, so derivative pencils
/// stay in the same representation.
class MatrixPencil {
 public:
  static MatrixPencil polynomial(std::vector<ComplexMatrix> coefficients);
  static MatrixPencil delay(const ComplexMatrix& a, const ComplexMatrix& b, double tau);

  PencilKind kind() const { return exp_term_ ? PencilKind::DelayTranscendental : PencilKind::Polynomial; }
  int dimension() const { return dim_; }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }

  const std::vector<ComplexMatrix>& coefficients() const { return coeffs_; }
  const ComplexMatrix& coefficient(int k) const { return coeffs_[k]; }

  double delay_tau() const { return tau_; }
  /// A and B of the delay form; only meaningful for DelayTranscendental pencils.
  ComplexMatrix delay_a() const;
  ComplexMatrix delay_b() const;

  ComplexMatrix evaluate(Complex lambda) const;
  MatrixPencil derivative(int order = 1) const;
  bool is_selfadjoint() const;

  /// Largest coefficient Frobenius norm; a scale for tolerance decisions.
  double coefficient_scale() const;

 private:
  MatrixPencil() = default;

  int dim_ = 0;
  std::vector<ComplexMatrix> coeffs_;          // ascending powers of lambda
  std::optional<ComplexMatrix> exp_term_;      // adds exp(-tau*lambda) * (*exp_term_)
  double tau_ = 0.0;
};

/// The pair (J, L) with J invertible skew-Hermitian and L Hermitian, plus the
/// cached Hermitian K = (iJ)^(-1) that turns the spectral problem into a
/// selfadjoint linear pencil L - lambda*K.
class HamiltonianSystem {
 public:
  HamiltonianSystem(ComplexMatrix j, ComplexMatrix l);

  const ComplexMatrix& j() const { return j_; }
  const ComplexMatrix& l() const { return l_; }
  const ComplexMatrix& k() const { return k_; }
  int dimension() const { return l_.rows(); }

  ComplexMatrix jl() const { return j_ * l_; }
  bool is_real(double tol = 1e-12) const;

 private:
  ComplexMatrix j_, l_, k_;
};

/// Block form J = [[0, I], [-I, 0]], L = diag(L_plus, L_minus).
struct CanonicalHamiltonian {
  ComplexMatrix l_plus;
  ComplexMatrix l_minus;

  CanonicalHamiltonian(ComplexMatrix lp, ComplexMatrix lm);
  int block_dimension() const { return l_plus.rows(); }
  HamiltonianSystem assemble() const;
};

MatrixPencil pencil_from_hamiltonian(const HamiltonianSystem& sys);
MatrixPencil dde_pencil(const ComplexMatrix& a, const ComplexMatrix& b, double tau);

/// Block companion matrix of a polynomial pencil with invertible leading
/// coefficient; its ordinary spectrum is the pencil's characteristic values.
ComplexMatrix companion_matrix(const MatrixPencil& pencil);

/// Block-Hankel matrix built from coefficients 1..p; Hermitian for selfadjoint
/// pencils and intertwines the companion matrix with its adjoint.
ComplexMatrix hankel_form(const MatrixPencil& pencil);

/// Characteristic values with algebraic multiplicities, clustered.
std::vector<std::pair<Complex, int>> characteristic_values(const MatrixPencil& pencil);

/// Nearest real characteristic value within the radius, when the pencil is
/// polynomial and the algebraic route is available; empty otherwise.  Used to
/// polish graphically located crossings.
std::optional<double> nearest_real_characteristic_value(const MatrixPencil& pencil, double lambda,
                                                        double radius);

}  // namespace pencilscope
