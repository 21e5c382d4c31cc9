#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "pencilscope/pencil.hpp"

namespace pencilscope {

/// Continuity-matched eigenvalue curves of a selfadjoint pencil on a real grid.
/// Branch j at grid point i carries the eigenvalue mu and its unit eigenvector;
/// at every grid point the branch values are a permutation of the sorted
/// spectrum of the evaluated pencil.
struct BranchFamily {
  struct Branch {
    std::vector<double> mu;
    std::vector<ComplexVector> vec;
  };

  std::vector<double> grid;
  std::vector<Branch> branches;
  // permutation[i][j] = index into the ascending spectrum at grid point i
  // occupied by branch j.
  std::vector<std::vector<int>> permutation;

  int branch_count() const { return static_cast<int>(branches.size()); }
  int grid_size() const { return static_cast<int>(grid.size()); }
};

struct BranchVanishing {
  int branch_id = 0;
  int order = 0;   // order of vanishing m
  int eta = 0;     // sign of the first nonvanishing derivative
};

/// A real characteristic value seen as coincident zero crossings of branches.
struct CrossingEvent {
  double lambda0 = 0.0;
  std::vector<BranchVanishing> branches;

  int geometric_multiplicity() const { return static_cast<int>(branches.size()); }
  int algebraic_multiplicity() const {
    int a = 0;
    for (const auto& b : branches) a += b.order;
    return a;
  }
};

struct BranchOptions {
  double overlap_refine = 0.9;   // refine the grid while matched overlap dips below this
  double overlap_floor = 0.6;    // below this at the minimum step the matching is ambiguous
  double h_min_rel = 1e-9;       // minimum step relative to the window width
};

BranchFamily sample_branches(const MatrixPencil& pencil, double lambda_min, double lambda_max,
                             int steps, const BranchOptions& opts = {});

/// Evaluate one matched branch (and its eigenvector) at an arbitrary real point
/// by re-solving the eigenproblem and attaching to the nearest grid eigenvector.
std::pair<double, ComplexVector> branch_at(const MatrixPencil& pencil, const BranchFamily& family,
                                           int branch_id, double lambda);

std::vector<CrossingEvent> find_crossings(const MatrixPencil& pencil, const BranchFamily& family);

/// Order of vanishing and leading-derivative sign of one branch at a crossing.
/// Richardson-extrapolated central differences cross-checked by a local
/// polynomial fit; disagreement raises OrderUndetermined.
std::pair<int, int> order_of_vanishing(const MatrixPencil& pencil, const BranchFamily& family,
                                       int branch_id, double lambda0);

/// dim Ker L(lambda0), counted from the eigenvalues inside the kernel band.
int geometric_multiplicity(const MatrixPencil& pencil, double lambda0);

/// Derivatives 0..max_order of all matched branch eigenvectors at lambda0, via a
/// least-squares polynomial fit per entry over a symmetric stencil.  Index d of
/// the result holds the d-th Taylor coefficient u^(d)/d! of the branch vector.
std::vector<std::vector<ComplexVector>> branch_vector_taylor(const MatrixPencil& pencil,
                                                             const BranchFamily& family,
                                                             const std::vector<int>& branch_ids,
                                                             double lambda0, int max_coeff);

/// Richardson-extrapolated n-th derivative of a scalar function with a noise
/// estimate taken from the spread of the extrapolation table.
struct DerivativeEstimate {
  double value = 0.0;
  double noise = 0.0;
};
DerivativeEstimate richardson_derivative(const std::function<double(double)>& f, double x0, int order,
                                         double base_step);

}  // namespace pencilscope
