#pragma once

#include <utility>
#include <vector>

#include "pencilscope/branches.hpp"

namespace pencilscope {

/// Signature data of one real characteristic value, branch by branch.
struct KreinReport {
  struct PerBranch {
    int branch_id = 0;
    int order = 0;
    int eta = 0;
    int kappa_plus = 0;
    int kappa_minus = 0;
    int kappa() const { return kappa_plus - kappa_minus; }
  };

  double lambda0 = 0.0;
  std::vector<PerBranch> branches;
  int kappa_plus = 0;
  int kappa_minus = 0;
  int kappa() const { return kappa_plus - kappa_minus; }
  int algebraic_multiplicity() const { return kappa_plus + kappa_minus; }
};

/// A maximal chain of generalized characteristic vectors u^[0..m-1].
struct RootChain {
  double lambda0 = 0.0;
  std::vector<ComplexVector> vectors;
  int length() const { return static_cast<int>(vectors.size()); }
};

/// Canonical set of maximal chains, lengths nonincreasing; the chain starters
/// realize the canonical flag of kernel subspaces.
struct CanonicalChainSet {
  double lambda0 = 0.0;
  std::vector<RootChain> chains;
  // flag[s-1] = orthonormal basis of the span of starters of chains of length >= s.
  std::vector<std::vector<ComplexVector>> flag;

  std::vector<int> lengths() const {
    std::vector<int> out;
    for (const auto& c : chains) out.push_back(c.length());
    return out;
  }
  int algebraic_multiplicity() const {
    int a = 0;
    for (const auto& c : chains) a += c.length();
    return a;
  }
};

/// Positive/negative indices of one branch from its order of vanishing and
/// leading-derivative sign: (m/2, m/2) for even m, ((m+eta)/2, (m-eta)/2) odd.
std::pair<int, int> graphical_indices(int order, int eta);

/// Aggregate graphical indices over every branch vanishing at the crossing.
KreinReport value_signature(const MatrixPencil& pencil, const BranchFamily& family,
                            const CrossingEvent& event);
KreinReport value_signature(const MatrixPencil& pencil, const BranchFamily& family, double lambda0);

/// Canonical chain set of a polynomial pencil at a characteristic value, by the
/// greedy flag construction over stacked chain systems solved at rank_tol.
CanonicalChainSet root_chains(const MatrixPencil& pencil, Complex lambda0, double rank_tol = 1e-8);

/// Chains of the shifted resolvent pencil I - delta*(L(lambda)+delta*I)^(-1),
/// with derivatives obtained analytically by resolvent calculus.  Chain lengths
/// and starter spans agree with those of the original pencil.
CanonicalChainSet resolvent_shift_chains(const MatrixPencil& pencil, Complex lambda0, double delta,
                                         double rank_tol = 1e-8);

/// Max residual of the chain equations sum_l L^(l)(lambda0)/l! u^[q-l] = 0.
double chain_residual(const MatrixPencil& pencil, const CanonicalChainSet& chains);

struct GramIndices {
  struct PerChain {
    int kappa_plus = 0;
    int kappa_minus = 0;
  };
  std::vector<PerChain> chains;
  int kappa_plus = 0;
  int kappa_minus = 0;
  int kappa() const { return kappa_plus - kappa_minus; }
};

/// Krein indices from the Gram matrix of each chain lifted to the companion
/// product space and measured in the block-Hankel indefinite form.
GramIndices gram_indices(const MatrixPencil& pencil, double lambda0, const CanonicalChainSet& chains);

/// Chains rebuilt from Taylor coefficients of the matched eigenvector branches
/// vanishing at the crossing; flag subspaces come from the branch eigenvectors.
CanonicalChainSet chains_from_branch_derivatives(const MatrixPencil& pencil,
                                                 const BranchFamily& family,
                                                 const CrossingEvent& event);

}  // namespace pencilscope
