#pragma once

#include <utility>
#include <vector>

#include "pencilscope/branches.hpp"

namespace pencilscope {

/// Closed polygonal path in the complex plane (first vertex repeated last is
/// optional; the path always closes back to the first vertex).
struct Contour {
  std::vector<Complex> vertices;
  int samples_per_edge = 32;

  static Contour rectangle(double re_lo, double re_hi, double im_lo, double im_hi,
                           int samples_per_edge = 32);
};

/// det(L(lambda) - mu*I); restricting to mu = 0 gives a determinant-based
/// characteristic-value detector, and the mu direction separates the
/// individual eigenvalue branches.
Complex evans_krein(const MatrixPencil& pencil, Complex lambda, double mu);

/// det(L(lambda) - mu*S) for Hermitian positive definite S.
Complex evans_krein_generalized(const MatrixPencil& pencil, const ComplexMatrix& s, Complex lambda,
                                double mu);

/// Signature of a simple real characteristic value from partial derivatives:
/// kappa = -sign(d/dlambda det / d/dmu det) at (lambda0; 0).
int signature_from_evans(const MatrixPencil& pencil, double lambda0);

struct EvansSignatureDetail {
  int kappa = 0;
  double d_lambda = 0.0;  // derivative of det(L(lambda)) at lambda0
  double d_mu = 0.0;      // mu-derivative at (lambda0; 0)
};
EvansSignatureDetail signature_from_evans_detail(const MatrixPencil& pencil, double lambda0);

/// m-th derivative of the vanishing branch at a geometric-multiplicity-one
/// characteristic value: -(d^m/dlambda^m det)/(d/dmu det) at (lambda0; 0).
double high_order_derivative_gm1(const MatrixPencil& pencil, double lambda0, int order);

/// Branch slopes at a semisimple characteristic value of multiplicity k, as the
/// roots of the degree-k polynomial built from the mixed partial derivatives.
std::vector<double> semisimple_slopes(const MatrixPencil& pencil, double lambda0);

/// Mixed partial d^(n+j) E / d mu^n d lambda^j at (lambda0; 0) with noise estimate.
DerivativeEstimate evans_mixed_partial(const MatrixPencil& pencil, double lambda0, int n_mu,
                                       int n_lambda);

/// Phase winding of det(L(lambda) - mu*I) along the contour divided by 2*pi:
/// the count of enclosed characteristic values with algebraic multiplicity.
int winding_number(const MatrixPencil& pencil, const Contour& contour, double mu = 0.0);

}  // namespace pencilscope
