#include "pencilscope/pencil.hpp"

#include <algorithm>
#include <cmath>

namespace pencilscope {

namespace {

void require_all_square_same(const std::vector<ComplexMatrix>& ms, const char* who) {
  if (ms.empty()) fail(ErrorCode::DimensionMismatch, std::string(who) + ": no coefficients");
  const int n = ms.front().rows();
  for (const ComplexMatrix& m : ms) {
    if (!m.square() || m.rows() != n)
      fail(ErrorCode::DimensionMismatch, std::string(who) + ": coefficients must be square and equal-sized");
    if (!m.all_finite()) fail(ErrorCode::InvariantViolation, std::string(who) + ": non-finite entries");
  }
}

}  // namespace

MatrixPencil MatrixPencil::polynomial(std::vector<ComplexMatrix> coefficients) {
  require_all_square_same(coefficients, "MatrixPencil::polynomial");
  // Trim exact-zero leading coefficients so degree() means what it says.
  while (coefficients.size() > 1 && coefficients.back().max_abs() == 0.0) coefficients.pop_back();
  MatrixPencil p;
  p.dim_ = coefficients.front().rows();
  p.coeffs_ = std::move(coefficients);
  return p;
}

MatrixPencil MatrixPencil::delay(const ComplexMatrix& a, const ComplexMatrix& b, double tau) {
  if (!a.square() || !b.square() || a.rows() != b.rows())
    fail(ErrorCode::DimensionMismatch, "delay pencil needs square A, B of equal size");
  if (!(tau > 0.0) || !std::isfinite(tau))
    fail(ErrorCode::InvariantViolation, "delay pencil needs finite tau > 0");
  const int n = a.rows();
  MatrixPencil p;
  p.dim_ = n;
  ComplexMatrix minus_a = a;
  minus_a *= Complex(-1.0);
  p.coeffs_ = {minus_a, ComplexMatrix::identity(n)};
  ComplexMatrix minus_b = b;
  minus_b *= Complex(-1.0);
  p.exp_term_ = minus_b;
  p.tau_ = tau;
  return p;
}

ComplexMatrix MatrixPencil::delay_a() const {
  ComplexMatrix a = coeffs_[0];
  a *= Complex(-1.0);
  return a;
}

ComplexMatrix MatrixPencil::delay_b() const {
  ComplexMatrix b = exp_term_ ? *exp_term_ : ComplexMatrix::zero(dim_);
  b *= Complex(-1.0);
  return b;
}

ComplexMatrix MatrixPencil::evaluate(Complex lambda) const {
  // Horner over the polynomial part.
  ComplexMatrix acc = coeffs_.back();
  for (int k = degree() - 1; k >= 0; --k) {
    acc *= lambda;
    acc += coeffs_[k];
  }
  if (exp_term_) {
    const Complex w = std::exp(-tau_ * lambda);
    ComplexMatrix e = *exp_term_;
    e *= w;
    acc += e;
  }
  return acc;
}

MatrixPencil MatrixPencil::derivative(int order) const {
  if (order < 1) fail(ErrorCode::InvariantViolation, "derivative order must be positive");
  MatrixPencil d = *this;
  for (int pass = 0; pass < order; ++pass) {
    std::vector<ComplexMatrix> next;
    if (d.coeffs_.size() <= 1) {
      next = {ComplexMatrix::zero(dim_)};
    } else {
      for (size_t k = 1; k < d.coeffs_.size(); ++k) {
        ComplexMatrix c = d.coeffs_[k];
        c *= Complex(static_cast<double>(k));
        next.push_back(std::move(c));
      }
    }
    d.coeffs_ = std::move(next);
    if (d.exp_term_) {
      *d.exp_term_ *= Complex(-d.tau_);
    }
  }
  // Drop zero high-order coefficients but keep at least the constant term.
  while (d.coeffs_.size() > 1 && d.coeffs_.back().max_abs() == 0.0) d.coeffs_.pop_back();
  return d;
}

double MatrixPencil::coefficient_scale() const {
  double s = 0.0;
  for (const ComplexMatrix& c : coeffs_) s = std::max(s, c.frobenius_norm());
  if (exp_term_) s = std::max(s, exp_term_->frobenius_norm());
  return s;
}

bool MatrixPencil::is_selfadjoint() const {
  const double tol = 1e-10 * std::max(coefficient_scale(), 1e-30);
  if (kind() == PencilKind::Polynomial) {
    for (const ComplexMatrix& c : coeffs_)
      if (!c.is_hermitian(tol)) return false;
    return true;
  }
  // Delay form: probe L(conj(lambda))* - L(lambda) at a fixed set of complex points.
  static const Complex probes[] = {{0.3, 0.7}, {-1.1, 0.4}, {2.0, -1.3}, {-0.6, -2.1}, {0.9, 1.9}};
  for (Complex lam : probes) {
    ComplexMatrix diff = evaluate(std::conj(lam)).adjoint() - evaluate(lam);
    if (diff.max_abs() > 1e-9 * std::max(coefficient_scale(), 1e-30) * (1.0 + std::abs(std::exp(-tau_ * lam))))
      return false;
  }
  return true;
}

HamiltonianSystem::HamiltonianSystem(ComplexMatrix j, ComplexMatrix l)
    : j_(std::move(j)), l_(std::move(l)) {
  if (!j_.square() || !l_.square() || j_.rows() != l_.rows())
    fail(ErrorCode::DimensionMismatch, "J and L must be square matrices of equal size");
  if (j_.rows() % 2 != 0)
    fail(ErrorCode::InvariantViolation, "invertible skew-Hermitian J forces even dimension");
  const double jscale = std::max(j_.frobenius_norm(), 1e-30);
  const double lscale = std::max(l_.frobenius_norm(), 1e-30);
  if (!j_.is_skew_hermitian(1e-12 * jscale))
    fail(ErrorCode::InvariantViolation, "J is not skew-Hermitian");
  if (!l_.is_hermitian(1e-12 * lscale)) fail(ErrorCode::InvariantViolation, "L is not Hermitian");

  const int n = j_.rows();
  ComplexMatrix ij = j_;
  ij *= Complex(0.0, 1.0);
  const Complex det = complex_det(ij);
  if (std::abs(det) < 1e-10 * std::pow(jscale, n))
    fail(ErrorCode::SingularJ, "J is numerically singular");
  k_ = inverse(ij);
  // (iJ) is Hermitian, so K is too; symmetrize rounding residue.
  for (int i = 0; i < n; ++i) {
    k_(i, i) = Complex(k_(i, i).real(), 0.0);
    for (int jj = i + 1; jj < n; ++jj) {
      Complex m = 0.5 * (k_(i, jj) + std::conj(k_(jj, i)));
      k_(i, jj) = m;
      k_(jj, i) = std::conj(m);
    }
  }
}

bool HamiltonianSystem::is_real(double tol) const {
  const double js = std::max(j_.frobenius_norm(), 1e-30);
  const double ls = std::max(l_.frobenius_norm(), 1e-30);
  return j_.is_real(tol * js) && l_.is_real(tol * ls);
}

CanonicalHamiltonian::CanonicalHamiltonian(ComplexMatrix lp, ComplexMatrix lm)
    : l_plus(std::move(lp)), l_minus(std::move(lm)) {
  if (!l_plus.square() || !l_minus.square() || l_plus.rows() != l_minus.rows())
    fail(ErrorCode::DimensionMismatch, "canonical blocks must be square and equal-sized");
  const double ps = std::max(l_plus.frobenius_norm(), 1e-30);
  const double ms = std::max(l_minus.frobenius_norm(), 1e-30);
  if (!l_plus.is_hermitian(1e-12 * ps) || !l_minus.is_hermitian(1e-12 * ms))
    fail(ErrorCode::InvariantViolation, "canonical blocks must be Hermitian");
}

HamiltonianSystem CanonicalHamiltonian::assemble() const {
  const int n = block_dimension();
  ComplexMatrix j(2 * n, 2 * n);
  ComplexMatrix l(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    j(i, n + i) = 1.0;
    j(n + i, i) = -1.0;
    for (int jj = 0; jj < n; ++jj) {
      l(i, jj) = l_plus(i, jj);
      l(n + i, n + jj) = l_minus(i, jj);
    }
  }
  return HamiltonianSystem(std::move(j), std::move(l));
}

MatrixPencil pencil_from_hamiltonian(const HamiltonianSystem& sys) {
  ComplexMatrix minus_k = sys.k();
  minus_k *= Complex(-1.0);
  return MatrixPencil::polynomial({sys.l(), std::move(minus_k)});
}

MatrixPencil dde_pencil(const ComplexMatrix& a, const ComplexMatrix& b, double tau) {
  return MatrixPencil::delay(a, b, tau);
}

ComplexMatrix companion_matrix(const MatrixPencil& pencil) {
  if (pencil.kind() != PencilKind::Polynomial)
    fail(ErrorCode::InvariantViolation, "companion form exists only for polynomial pencils");
  const int p = pencil.degree();
  if (p < 1) fail(ErrorCode::InvariantViolation, "companion form needs degree >= 1");
  const int n = pencil.dimension();
  const ComplexMatrix& lead = pencil.coefficient(p);
  const double lead_scale = std::max(lead.frobenius_norm(), 1e-30);
  if (std::abs(complex_det(lead)) < 1e-10 * std::pow(lead_scale, n))
    fail(ErrorCode::SingularLeadingCoefficient, "leading coefficient is numerically singular");

  const ComplexMatrix lead_inv = inverse(lead);
  ComplexMatrix c(p * n, p * n);
  for (int blk = 0; blk + 1 < p; ++blk)
    for (int i = 0; i < n; ++i) c(blk * n + i, (blk + 1) * n + i) = 1.0;
  for (int blk = 0; blk < p; ++blk) {
    ComplexMatrix tl = lead_inv * pencil.coefficient(blk);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) c((p - 1) * n + i, blk * n + j) = -tl(i, j);
  }
  return c;
}

ComplexMatrix hankel_form(const MatrixPencil& pencil) {
  if (pencil.kind() != PencilKind::Polynomial)
    fail(ErrorCode::InvariantViolation, "Hankel form exists only for polynomial pencils");
  const int p = pencil.degree();
  if (p < 1) fail(ErrorCode::InvariantViolation, "Hankel form needs degree >= 1");
  const int n = pencil.dimension();
  ComplexMatrix b(p * n, p * n);
  for (int bi = 0; bi < p; ++bi)
    for (int bj = 0; bj < p; ++bj) {
      const int k = bi + bj + 1;
      if (k > p) continue;
      const ComplexMatrix& blk = pencil.coefficient(k);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) b(bi * n + i, bj * n + j) = blk(i, j);
    }
  return b;
}

std::vector<std::pair<Complex, int>> characteristic_values(const MatrixPencil& pencil) {
  return general_eigenvalues(companion_matrix(pencil));
}

std::optional<double> nearest_real_characteristic_value(const MatrixPencil& pencil, double lambda,
                                                        double radius) {
  if (pencil.kind() != PencilKind::Polynomial || pencil.degree() < 1) return std::nullopt;
  std::optional<double> best;
  try {
    for (const auto& [z, m] : characteristic_values(pencil)) {
      if (std::abs(z.imag()) > 1e-6 * (1.0 + std::abs(z))) continue;
      const double gap = std::abs(z.real() - lambda);
      if (gap > radius) continue;
      if (!best || gap < std::abs(*best - lambda)) best = z.real();
    }
  } catch (const Error&) {
    return std::nullopt;
  }
  return best;
}

}  // namespace pencilscope
