#include "pencilscope/index.hpp"

#include <algorithm>
#include <cmath>

namespace pencilscope {

namespace {

// Real characteristic values sit within this band of the axis; the window and
// grid heuristics below assume desk-scale problems.
bool is_real_value(Complex z) { return std::abs(z.imag()) <= 1e-6 * (1.0 + std::abs(z)); }

int auto_steps(double lo, double hi) {
  const int per_unit = 48;
  const int steps = static_cast<int>((hi - lo) * per_unit);
  return std::clamp(steps, 181, 481);
}

struct SignatureSums {
  int kappa_pos = 0;         // sum of kappa over lambda > 0
  int kappa_neg = 0;         // sum over lambda < 0
  int kappa_plus_pos = 0;    // sum of kappa^+ over lambda > 0
  int kappa_minus_neg = 0;   // sum of kappa^- over lambda < 0
  int kappa_plus_neg = 0;
  int kappa_minus_pos = 0;
};

SignatureSums signature_sums(const MatrixPencil& pencil, const BranchFamily& family,
                             const std::vector<CrossingEvent>& events, double zero_band) {
  SignatureSums out;
  for (const CrossingEvent& ev : events) {
    if (std::abs(ev.lambda0) <= zero_band) continue;  // handled by the zero counts
    KreinReport rep = value_signature(pencil, family, ev);
    if (ev.lambda0 > 0.0) {
      out.kappa_pos += rep.kappa();
      out.kappa_plus_pos += rep.kappa_plus;
      out.kappa_minus_pos += rep.kappa_minus;
    } else {
      out.kappa_neg += rep.kappa();
      out.kappa_plus_neg += rep.kappa_plus;
      out.kappa_minus_neg += rep.kappa_minus;
    }
  }
  return out;
}

double spectral_radius(const std::vector<std::pair<Complex, int>>& eigs) {
  double r = 0.0;
  for (const auto& [z, m] : eigs) r = std::max(r, std::abs(z));
  return r;
}

}  // namespace

std::pair<double, double> real_spectrum_window(const MatrixPencil& pencil) {
  double r = 1.0;
  for (const auto& [z, m] : characteristic_values(pencil))
    if (is_real_value(z)) r = std::max(r, std::abs(z.real()));
  return {-(r + 1.0), r + 1.0};
}

ZCounts z_counts(const MatrixPencil& pencil, const BranchFamily& family) {
  ZCounts out;
  const int k = geometric_multiplicity(pencil, 0.0);
  if (k == 0) return out;

  const double tol = 1e-8 * std::max(pencil.evaluate(0.0).frobenius_norm(), pencil.coefficient_scale());
  for (int j = 0; j < family.branch_count(); ++j) {
    auto [mu, vec] = branch_at(pencil, family, j, 0.0);
    (void)vec;
    if (std::abs(mu) > tol) continue;
    auto [m, eta] = order_of_vanishing(pencil, family, j, 0.0);
    if (m % 2 == 1) {
      if (eta > 0) {
        ++out.z_plus_up;    // rises through zero
        ++out.z_minus_down;
      } else {
        ++out.z_plus_down;
        ++out.z_minus_up;
      }
    } else {
      if (eta > 0) {
        ++out.z_plus_up;
        ++out.z_minus_up;
      } else {
        ++out.z_plus_down;  // even order, negative lead: below axis on both sides
        ++out.z_minus_down;
      }
    }
    if (eta > 0)
      ++out.z_plus;
    else
      ++out.z_minus;
  }
  return out;
}

int conservation_check(const MatrixPencil& pencil) {
  auto [lo, hi] = real_spectrum_window(pencil);
  BranchFamily family = sample_branches(pencil, lo, hi, auto_steps(lo, hi));
  return conservation_check(pencil, family);
}

int conservation_check(const MatrixPencil& pencil, const BranchFamily& family) {
  if (pencil.kind() != PencilKind::Polynomial)
    fail(ErrorCode::InvariantViolation, "conservation check needs a polynomial pencil");
  if (!pencil.is_selfadjoint()) fail(ErrorCode::NotSelfadjoint, "conservation check needs a selfadjoint pencil");
  const int p = pencil.degree();
  if (p % 2 != 1) fail(ErrorCode::InvariantViolation, "conservation law requires odd degree");

  const int n = pencil.dimension();
  const int n_minus_l0 = inertia(pencil.coefficient(0)).n_minus;
  ZCounts z = z_counts(pencil, family);
  std::vector<CrossingEvent> events = find_crossings(pencil, family);
  SignatureSums sums = signature_sums(pencil, family, events, 1e-4);

  return n - 2 * n_minus_l0 - z.z_plus_down - z.z_minus_down + sums.kappa_pos - sums.kappa_neg;
}

std::pair<int, int> gker_dimension(const HamiltonianSystem& sys) {
  std::vector<std::pair<Complex, int>> eigs = general_eigenvalues(sys.jl());
  const double ztol = 1e-7 * (1.0 + spectral_radius(eigs));
  int gker = 0;
  for (const auto& [z, m] : eigs)
    if (std::abs(z) <= ztol) gker += m;
  const int ker_l = inertia(sys.l()).n_zero;
  return {gker, ker_l};
}

namespace {

IndexReport build_index_report(const HamiltonianSystem& sys) {
  const MatrixPencil pencil = pencil_from_hamiltonian(sys);
  auto [lo, hi] = real_spectrum_window(pencil);
  BranchFamily family = sample_branches(pencil, lo, hi, auto_steps(lo, hi));
  std::vector<CrossingEvent> events = find_crossings(pencil, family);

  IndexReport rep;
  rep.dimension = sys.dimension();
  rep.n_minus_l0 = inertia(sys.l()).n_minus;
  Inertia lead = inertia(pencil.coefficient(1));
  rep.n_plus_lp = lead.n_plus;
  rep.n_minus_lp = lead.n_minus;
  rep.z = z_counts(pencil, family);

  SignatureSums sums = signature_sums(pencil, family, events, 1e-4);
  rep.kappa_sum_positive = sums.kappa_pos;
  rep.kappa_sum_negative = sums.kappa_neg;
  rep.kappa_plus_sum_positive = sums.kappa_plus_pos;
  rep.kappa_minus_sum_negative = sums.kappa_minus_neg;

  rep.conservation_residual = rep.dimension - 2 * rep.n_minus_l0 - rep.z.z_plus_down -
                              rep.z.z_minus_down + sums.kappa_pos - sums.kappa_neg;

  auto [gker, kerl] = gker_dimension(sys);
  rep.gker_dimension = gker;
  rep.ker_l_dimension = kerl;

  const int zeta2 = gker - rep.z.z_plus_down - rep.z.z_minus_down;
  if (zeta2 % 2 != 0)
    fail(ErrorCode::Inconsistent, "zeta correction did not come out an integer");
  rep.zeta = zeta2 / 2;

  // Direct unstable count from the spectrum of J*L.
  std::vector<std::pair<Complex, int>> eigs = general_eigenvalues(sys.jl());
  const double re_tol = 1e-7 * (1.0 + spectral_radius(eigs));
  int unstable_alg = 0;
  for (const auto& [z, m] : eigs) {
    const double re = std::abs(z.real());
    if (re > re_tol / 3.0 && re < re_tol * 3.0)
      fail(ErrorCode::Inconsistent, "eigenvalue real part sits on the classification boundary");
    if (re > re_tol) unstable_alg += m;
  }
  if (unstable_alg % 2 != 0)
    fail(ErrorCode::Inconsistent, "unstable spectrum has odd total multiplicity");
  rep.n_unstable_direct = unstable_alg / 2;
  rep.n_stable = rep.dimension / 2 - rep.n_unstable_direct;
  return rep;
}

}  // namespace

IndexReport unstable_count(const HamiltonianSystem& sys) {
  IndexReport rep = build_index_report(sys);
  rep.n_unstable_formula =
      rep.n_minus_l0 - rep.zeta - rep.kappa_plus_sum_positive - rep.kappa_minus_sum_negative;
  rep.consistent = rep.n_unstable_formula == rep.n_unstable_direct;
  if (!rep.consistent)
    fail(ErrorCode::Inconsistent, "index formula and direct spectral count disagree");
  return rep;
}

IndexReport full_symmetry_count(const HamiltonianSystem& sys,
                                const std::optional<ComplexMatrix>& involution) {
  if (involution) {
    const ComplexMatrix& u = *involution;
    if (!u.square() || u.rows() != sys.dimension())
      fail(ErrorCode::DimensionMismatch, "involution matrix has the wrong shape");
    for (const ComplexMatrix* a : {&sys.j(), &sys.l()}) {
      ComplexMatrix lhs = (*a) * u;
      ComplexMatrix rhs = u * a->conjugate();
      if ((lhs - rhs).max_abs() > 1e-10 * std::max(a->frobenius_norm(), 1e-30))
        fail(ErrorCode::NotReal, "matrix does not commute with the supplied involution");
    }
  } else if (!sys.is_real()) {
    fail(ErrorCode::NotReal, "system is not entrywise real; supply an involution");
  }

  IndexReport rep = build_index_report(sys);
  const int zeta2 = rep.gker_dimension - 2 * rep.z.z_minus;
  if (zeta2 % 2 != 0)
    fail(ErrorCode::Inconsistent, "symmetric zeta correction did not come out an integer");
  rep.zeta = zeta2 / 2;
  rep.n_unstable_formula = rep.n_minus_l0 - rep.zeta - 2 * rep.kappa_plus_sum_positive;
  rep.parity_holds = ((rep.n_minus_l0 - rep.zeta - rep.n_unstable_direct) % 2 + 2) % 2 == 0;
  rep.consistent = rep.n_unstable_formula == rep.n_unstable_direct;
  if (!rep.consistent)
    fail(ErrorCode::Inconsistent, "symmetric index formula and direct spectral count disagree");
  return rep;
}

CanonicalBoundReport canonical_lower_bound(const CanonicalHamiltonian& can) {
  const int n = can.block_dimension();
  HermitianEigenDecomposition ep = hermitian_eigen(can.l_plus);
  HermitianEigenDecomposition em = hermitian_eigen(can.l_minus);
  const double ptol = 1e-9 * std::max(can.l_plus.frobenius_norm(), 1e-30);
  const double mtol = 1e-9 * std::max(can.l_minus.frobenius_norm(), 1e-30);

  std::vector<ComplexVector> ker_p, ker_m;
  for (int i = 0; i < n; ++i) {
    if (std::abs(ep.eigenvalues[i]) <= ptol) ker_p.push_back(ep.eigenvectors[i]);
    if (std::abs(em.eigenvalues[i]) <= mtol) ker_m.push_back(em.eigenvectors[i]);
  }
  if (!ker_p.empty() && !ker_m.empty()) {
    for (const ComplexVector& a : ker_p)
      for (const ComplexVector& b : ker_m)
        if (std::abs(inner(a, b)) > 1e-8)
          fail(ErrorCode::KernelsNotOrthogonal, "block kernels are not orthogonal");
  }

  // Orthogonal complement of the joint kernel.
  std::vector<ComplexVector> complement;
  {
    std::vector<ComplexVector> joint = ker_p;
    joint.insert(joint.end(), ker_m.begin(), ker_m.end());
    if (joint.empty()) {
      for (int i = 0; i < n; ++i) {
        ComplexVector e(n, 0.0);
        e[i] = 1.0;
        complement.push_back(e);
      }
    } else {
      ComplexMatrix rows(static_cast<int>(joint.size()), n);
      for (size_t r = 0; r < joint.size(); ++r)
        for (int c = 0; c < n; ++c) rows(static_cast<int>(r), c) = std::conj(joint[r][c]);
      complement = null_space(rows, 1e-10);
    }
  }

  CanonicalBoundReport out;
  const int d = static_cast<int>(complement.size());
  if (d > 0) {
    ComplexMatrix q(n, d);
    for (int c = 0; c < d; ++c) q.set_column(c, complement[c]);
    ComplexMatrix mp = q.adjoint() * (can.l_plus * q);
    ComplexMatrix mm = q.adjoint() * (can.l_minus * q);
    out.bound = std::abs(inertia(mp).n_minus - inertia(mm).n_minus);
  }

  HamiltonianSystem sys = can.assemble();
  std::vector<std::pair<Complex, int>> eigs = general_eigenvalues(sys.jl());
  const double rho = spectral_radius(eigs);
  const double band = 1e-7 * (1.0 + rho);
  int n_real = 0;
  for (const auto& [z, m] : eigs) {
    if (std::abs(z.imag()) > band || std::abs(z) <= band) continue;
    // Geometric multiplicity of the real eigenvalue.
    ComplexMatrix shifted = sys.jl();
    for (int i = 0; i < shifted.rows(); ++i) shifted(i, i) -= z.real();
    SvdResult sv = svd(shifted);
    n_real += shifted.rows() - numerical_rank(sv, 1e-8);
  }
  if (n_real % 2 != 0) fail(ErrorCode::Inconsistent, "real spectrum count came out odd");
  out.n_real = n_real;
  out.satisfied = out.n_real / 2 >= out.bound;
  return out;
}

}  // namespace pencilscope
