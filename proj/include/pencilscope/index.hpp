#pragma once

#include <optional>
#include <vector>

#include "pencilscope/krein.hpp"

namespace pencilscope {

/// Crossing counts at lambda = 0, split by the side of the axis and the sign
/// of the approach.  Even-order negative-leading curves land in both down
/// counts; odd-order curves land in exactly one.
struct ZCounts {
  int z_plus_down = 0;   // mu < 0 for small lambda > 0
  int z_minus_down = 0;  // mu < 0 for small lambda < 0
  int z_plus_up = 0;     // mu > 0 for small lambda > 0
  int z_minus_up = 0;    // mu > 0 for small lambda < 0
  int z_plus = 0;        // first nonzero derivative positive
  int z_minus = 0;       // first nonzero derivative negative
};

struct IndexReport {
  int dimension = 0;
  int n_minus_l0 = 0;
  int n_plus_lp = 0;
  int n_minus_lp = 0;
  ZCounts z;
  int kappa_sum_positive = 0;        // sum of kappa over crossings at lambda > 0
  int kappa_sum_negative = 0;        // sum over lambda < 0
  int kappa_plus_sum_positive = 0;   // sum of kappa^+ over lambda > 0
  int kappa_minus_sum_negative = 0;  // sum of kappa^- over lambda < 0
  int conservation_residual = 0;
  int gker_dimension = 0;
  int ker_l_dimension = 0;
  int zeta = 0;
  int n_unstable_formula = 0;
  int n_unstable_direct = 0;
  int n_stable = 0;
  bool consistent = true;
  std::optional<bool> parity_holds;  // full-symmetry count only
};

/// Branch crossing counts at lambda = 0 from a sampled family.
ZCounts z_counts(const MatrixPencil& pencil, const BranchFamily& family);

/// Window wide enough to contain every real characteristic value of the pencil.
std::pair<double, double> real_spectrum_window(const MatrixPencil& pencil);

/// The integer N - 2*N_-(L0) - Z+down - Z-down + sum_{l>0} kappa - sum_{l<0} kappa,
/// which vanishes for every selfadjoint odd-degree pencil with invertible lead.
int conservation_check(const MatrixPencil& pencil);
int conservation_check(const MatrixPencil& pencil, const BranchFamily& family);

/// Unstable count for a linearized Hamiltonian system, computed from the
/// signature sums and cross-checked against the spectrum of J*L directly.
IndexReport unstable_count(const HamiltonianSystem& sys);

/// Specialized count when the system is real entrywise (or real with respect to
/// a supplied unitary involution matrix): n_u = N_-(L) - zeta - 2*sum_{l>0} kappa^+.
IndexReport full_symmetry_count(const HamiltonianSystem& sys,
                                const std::optional<ComplexMatrix>& involution = std::nullopt);

struct CanonicalBoundReport {
  int bound = 0;
  int n_real = 0;  // nonzero real points of sigma(JL), geometric count
  bool satisfied = false;
};

/// Lower bound |N_-(M+) - N_-(M-)| on half the number of nonzero real points
/// of sigma(JL) for canonical-form systems with orthogonal block kernels.
CanonicalBoundReport canonical_lower_bound(const CanonicalHamiltonian& can);

/// (dim gKer(JL), dim Ker(L)).
std::pair<int, int> gker_dimension(const HamiltonianSystem& sys);

}  // namespace pencilscope
