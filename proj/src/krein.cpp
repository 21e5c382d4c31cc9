#include "pencilscope/krein.hpp"

#include <algorithm>
#include <cmath>

namespace pencilscope {

namespace {

// Rank with the ambiguity guard: a singular value sitting within a decade of
// the cutoff means the flag construction cannot be trusted.  The cutoff is
// floored by the problem scale so that noise-only matrices rank as zero
// instead of being measured against their own noise.
int guarded_rank(const std::vector<double>& singular, double rank_tol, double scale) {
  if (singular.empty()) return 0;
  const double cutoff = rank_tol * std::max(singular[0], scale);
  if (cutoff <= 0.0) return 0;
  int r = 0;
  for (double sv : singular) {
    if (sv > cutoff * 10.0) {
      ++r;
    } else if (sv > cutoff / 10.0) {
      fail(ErrorCode::FlagDegenerate, "rank decision within a decade of the tolerance");
    }
  }
  return r;
}

ComplexMatrix pad_rows(const ComplexMatrix& m, int min_rows) {
  if (m.rows() >= min_rows && m.rows() >= m.cols()) return m;
  const int rows = std::max({m.rows(), min_rows, m.cols()});
  ComplexMatrix out(rows, m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

// Right null space with the guard; V comes from accumulated rotations, so the
// returned directions are orthonormal regardless of how tiny the values are.
std::vector<ComplexVector> guarded_null_space(const ComplexMatrix& a, double rank_tol, double scale) {
  SvdResult s = svd(pad_rows(a, a.cols()));
  const int r = guarded_rank(s.singular, rank_tol, scale);
  std::vector<ComplexVector> out;
  for (int k = r; k < static_cast<int>(s.singular.size()); ++k) out.push_back(s.v.column(k));
  return out;
}

// Orthonormal basis of the cokernel (left null space) of A.
std::vector<ComplexVector> guarded_cokernel(const ComplexMatrix& a, double rank_tol, double scale) {
  return guarded_null_space(a.adjoint(), rank_tol, scale);
}

// Min-norm solve with the same floored cutoff as the rank decisions.
ComplexVector min_norm_solve(const ComplexMatrix& a, const ComplexVector& b, double rank_tol,
                             double scale) {
  SvdResult s = svd(pad_rows(a, a.cols()));
  const double cutoff = rank_tol * std::max(s.singular.empty() ? 0.0 : s.singular[0], scale);
  ComplexVector bp = b;
  bp.resize(s.u.rows(), Complex(0.0));
  ComplexVector x(a.cols(), 0.0);
  for (int k = 0; k < static_cast<int>(s.singular.size()); ++k) {
    if (s.singular[k] <= cutoff) continue;
    ComplexVector uk = s.u.column(k);
    Complex coeff = inner(bp, uk) / s.singular[k];
    for (int i = 0; i < a.cols(); ++i) x[i] += coeff * s.v(i, k);
  }
  return x;
}

struct ChainProblem {
  std::vector<ComplexMatrix> taylor;  // S_l = L^(l)(lambda0)/l!, l = 0..cap
  int dim = 0;
};

// Stacked chain-system matrix for levels q = 1..len-1 (unknowns u^[1..len-1]).
ComplexMatrix stacked_matrix(const ChainProblem& cp, int len) {
  const int n = cp.dim;
  const int blocks = len - 1;
  ComplexMatrix a(blocks * n, blocks * n);
  for (int q = 1; q <= blocks; ++q)
    for (int j = 1; j <= q; ++j) {
      const ComplexMatrix& s = cp.taylor[q - j];
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) a((q - 1) * n + r, (j - 1) * n + c) = s(r, c);
    }
  return a;
}

ComplexVector stacked_rhs(const ChainProblem& cp, int len, const ComplexVector& starter) {
  const int n = cp.dim;
  const int blocks = len - 1;
  ComplexVector b(blocks * n, 0.0);
  for (int q = 1; q <= blocks; ++q) {
    ComplexVector sq = cp.taylor[q].apply(starter);
    for (int r = 0; r < n; ++r) b[(q - 1) * n + r] = -sq[r];
  }
  return b;
}

CanonicalChainSet build_chain_set(const ChainProblem& cp, double lambda0_repr, int max_len,
                                  double rank_tol) {
  const int n = cp.dim;
  double scale = 0.0;
  for (const ComplexMatrix& s : cp.taylor) scale = std::max(scale, s.frobenius_norm());
  std::vector<ComplexVector> kernel = guarded_null_space(cp.taylor[0], rank_tol, scale);
  const int k = static_cast<int>(kernel.size());

  CanonicalChainSet out;
  out.lambda0 = lambda0_repr;
  if (k == 0)
    fail(ErrorCode::InvariantViolation, "chain construction at a point with trivial kernel");

  // dims[s] = dim X_s in kernel coordinates; bases[s] spans X_s.
  std::vector<std::vector<ComplexVector>> bases;  // coordinates in the kernel basis
  std::vector<ComplexVector> id_coords;
  for (int i = 0; i < k; ++i) {
    ComplexVector e(k, 0.0);
    e[i] = 1.0;
    id_coords.push_back(e);
  }
  bases.push_back(id_coords);  // X_1

  for (int s = 2; s <= max_len + 1; ++s) {
    if (bases.back().empty()) break;
    const ComplexMatrix a = stacked_matrix(cp, s);
    std::vector<ComplexVector> coker = guarded_cokernel(a, rank_tol, scale);
    if (coker.empty()) {
      bases.push_back(id_coords);  // every starter continues through this level
      continue;
    }
    // Condition matrix on kernel coordinates: rows w* R q_j.
    ComplexMatrix cond(static_cast<int>(coker.size()), k);
    for (int j = 0; j < k; ++j) {
      ComplexVector rhs = stacked_rhs(cp, s, kernel[j]);
      for (size_t w = 0; w < coker.size(); ++w) cond(static_cast<int>(w), j) = inner(rhs, coker[w]);
    }
    std::vector<ComplexVector> xs = guarded_null_space(cond, rank_tol, scale);
    bases.push_back(std::move(xs));
    if (bases.back().empty()) break;
  }
  if (!bases.back().empty())
    fail(ErrorCode::NoConvergence, "chain length search failed to terminate at the cap");

  const int max_chain = static_cast<int>(bases.size()) - 1;  // longest consistent length

  // Pick starters descending so earlier (longer) starters span the deeper flag sets.
  struct Starter {
    ComplexVector coords;
    int length;
  };
  std::vector<Starter> starters;
  for (int s = max_chain; s >= 1; --s) {
    const auto& basis = bases[s - 1];
    const int want = static_cast<int>(basis.size());
    if (static_cast<int>(starters.size()) >= want) continue;
    // Complete the chosen set to a basis of X_s.
    std::vector<ComplexVector> pool;
    for (const Starter& st : starters) pool.push_back(st.coords);
    const size_t already = pool.size();
    for (const ComplexVector& b : basis) pool.push_back(b);
    std::vector<ComplexVector> ortho = orthonormalize(pool);
    for (size_t i = already; i < ortho.size() && static_cast<int>(starters.size()) < want; ++i)
      starters.push_back({ortho[i], s});
  }

  // Solve each chain through its full stacked system at once (min-norm).
  for (const Starter& st : starters) {
    ComplexVector u0(n, 0.0);
    for (int j = 0; j < k; ++j)
      for (int i = 0; i < n; ++i) u0[i] += st.coords[j] * kernel[j][i];
    RootChain chain;
    chain.lambda0 = lambda0_repr;
    chain.vectors.push_back(u0);
    if (st.length > 1) {
      const ComplexMatrix a = stacked_matrix(cp, st.length);
      const ComplexVector b = stacked_rhs(cp, st.length, u0);
      ComplexVector sol = min_norm_solve(a, b, rank_tol, scale);
      for (int q = 1; q < st.length; ++q) {
        ComplexVector uq(n);
        for (int i = 0; i < n; ++i) uq[i] = sol[(q - 1) * n + i];
        chain.vectors.push_back(std::move(uq));
      }
    }
    out.chains.push_back(std::move(chain));
  }
  std::stable_sort(out.chains.begin(), out.chains.end(),
                   [](const RootChain& a, const RootChain& b) { return a.length() > b.length(); });

  // Flag subspaces in ambient coordinates.
  for (int s = 1; s <= max_chain; ++s) {
    std::vector<ComplexVector> span;
    for (const RootChain& c : out.chains)
      if (c.length() >= s) span.push_back(c.vectors[0]);
    if (span.empty()) break;
    out.flag.push_back(orthonormalize(span));
  }
  return out;
}

ChainProblem pencil_chain_problem(const MatrixPencil& pencil, Complex lambda0, int cap) {
  ChainProblem cp;
  cp.dim = pencil.dimension();
  double factorial = 1.0;
  MatrixPencil d = pencil;
  cp.taylor.push_back(pencil.evaluate(lambda0));
  for (int l = 1; l <= cap; ++l) {
    d = d.derivative(1);
    factorial *= l;
    ComplexMatrix m = d.evaluate(lambda0);
    m *= Complex(1.0 / factorial);
    cp.taylor.push_back(std::move(m));
  }
  return cp;
}

}  // namespace

std::pair<int, int> graphical_indices(int order, int eta) {
  if (order < 1 || (eta != 1 && eta != -1))
    fail(ErrorCode::InvariantViolation, "graphical indices need order >= 1 and eta = ±1");
  if (order % 2 == 0) return {order / 2, order / 2};
  return {(order + eta) / 2, (order - eta) / 2};
}

KreinReport value_signature(const MatrixPencil& pencil, const BranchFamily& family,
                            const CrossingEvent& event) {
  KreinReport rep;
  rep.lambda0 = event.lambda0;
  for (const BranchVanishing& bv : event.branches) {
    int m = bv.order, eta = bv.eta;
    if (m == 0) {
      auto [mm, ee] = order_of_vanishing(pencil, family, bv.branch_id, event.lambda0);
      m = mm;
      eta = ee;
    }
    auto [kp, km] = graphical_indices(m, eta);
    rep.branches.push_back({bv.branch_id, m, eta, kp, km});
    rep.kappa_plus += kp;
    rep.kappa_minus += km;
  }
  return rep;
}

KreinReport value_signature(const MatrixPencil& pencil, const BranchFamily& family, double lambda0) {
  CrossingEvent ev;
  ev.lambda0 = lambda0;
  const double scale = 1.0 + pencil.evaluate(lambda0).frobenius_norm();
  for (int j = 0; j < family.branch_count(); ++j) {
    auto [mu, vec] = branch_at(pencil, family, j, lambda0);
    (void)vec;
    if (std::abs(mu) <= 1e-5 * scale) ev.branches.push_back({j, 0, 0});
  }
  if (ev.branches.empty())
    fail(ErrorCode::InvariantViolation, "no branch vanishes at the requested point");
  return value_signature(pencil, family, ev);
}

CanonicalChainSet root_chains(const MatrixPencil& pencil, Complex lambda0, double rank_tol) {
  if (pencil.kind() != PencilKind::Polynomial)
    fail(ErrorCode::InvariantViolation, "root chains are built for polynomial pencils");
  const int cap = pencil.degree() * pencil.dimension() + 1;
  ChainProblem cp = pencil_chain_problem(pencil, lambda0, cap);
  return build_chain_set(cp, lambda0.real(), cap - 1, rank_tol);
}

CanonicalChainSet resolvent_shift_chains(const MatrixPencil& pencil, Complex lambda0, double delta,
                                         double rank_tol) {
  if (pencil.kind() != PencilKind::Polynomial)
    fail(ErrorCode::InvariantViolation, "resolvent shift chains are built for polynomial pencils");
  const int cap = pencil.degree() * pencil.dimension() + 1;
  ChainProblem lp = pencil_chain_problem(pencil, lambda0, cap);

  const int n = pencil.dimension();
  ComplexMatrix shifted = lp.taylor[0];
  for (int i = 0; i < n; ++i) shifted(i, i) += delta;
  const double sc = std::max(shifted.frobenius_norm(), 1e-30);
  if (std::abs(complex_det(shifted)) < 1e-12 * std::pow(sc, n))
    fail(ErrorCode::InvariantViolation, "shift delta does not make the pencil invertible");
  const ComplexMatrix resolvent = inverse(shifted);

  // Taylor coefficients T_l of the resolvent, then M = I - delta * R.
  std::vector<ComplexMatrix> t;
  t.push_back(resolvent);
  for (int l = 1; l <= cap; ++l) {
    ComplexMatrix acc = ComplexMatrix::zero(n);
    for (int i = 0; i < l; ++i) acc += t[i] * lp.taylor[l - i];
    acc = acc * resolvent;
    acc *= Complex(-1.0);
    t.push_back(std::move(acc));
  }

  ChainProblem mp;
  mp.dim = n;
  ComplexMatrix m0 = resolvent;
  m0 *= Complex(-delta);
  for (int i = 0; i < n; ++i) m0(i, i) += 1.0;
  mp.taylor.push_back(std::move(m0));
  for (int l = 1; l <= cap; ++l) {
    ComplexMatrix ml = t[l];
    ml *= Complex(-delta);
    mp.taylor.push_back(std::move(ml));
  }
  return build_chain_set(mp, lambda0.real(), cap - 1, rank_tol);
}

double chain_residual(const MatrixPencil& pencil, const CanonicalChainSet& chains) {
  int max_len = 0;
  for (const RootChain& c : chains.chains) max_len = std::max(max_len, c.length());
  ChainProblem cp = pencil_chain_problem(pencil, Complex(chains.lambda0, 0.0), std::max(max_len, 1));

  double worst = 0.0;
  for (const RootChain& c : chains.chains) {
    double cscale = 1.0;
    for (const ComplexVector& u : c.vectors) cscale = std::max(cscale, norm2(u));
    for (int q = 1; q < c.length(); ++q) {
      ComplexVector acc(cp.dim, 0.0);
      for (int l = 0; l <= q; ++l) {
        ComplexVector term = cp.taylor[l].apply(c.vectors[q - l]);
        acc = vec_add(acc, term);
      }
      worst = std::max(worst, norm2(acc) / (cscale * std::max(pencil.coefficient_scale(), 1.0)));
    }
  }
  return worst;
}

GramIndices gram_indices(const MatrixPencil& pencil, double lambda0, const CanonicalChainSet& chains) {
  if (!pencil.is_selfadjoint())
    fail(ErrorCode::NotSelfadjoint, "Gram indices need a selfadjoint pencil");
  const int p = pencil.degree();
  const int n = pencil.dimension();
  const ComplexMatrix b = hankel_form(pencil);

  GramIndices out;
  for (const RootChain& chain : chains.chains) {
    const int m = chain.length();
    // Jordan block with eigenvalue lambda0, ones on the superdiagonal.
    ComplexMatrix jb(m, m);
    for (int i = 0; i < m; ++i) {
      jb(i, i) = lambda0;
      if (i + 1 < m) jb(i, i + 1) = 1.0;
    }
    ComplexMatrix u(n, m);
    for (int c = 0; c < m; ++c)
      for (int r = 0; r < n; ++r) u(r, c) = chain.vectors[c][r];

    ComplexMatrix v(p * n, m);
    ComplexMatrix block = u;
    for (int i = 0; i < p; ++i) {
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < m; ++c) v(i * n + r, c) = block(r, c);
      if (i + 1 < p) block = block * jb;
    }

    ComplexMatrix w = v.adjoint() * (b * v);
    // Hermitian up to rounding for real lambda0.
    const double wtol = 1e-8 * std::max(w.frobenius_norm(), 1e-12);
    Inertia in = inertia(w, wtol);
    if (in.n_zero > 0)
      fail(ErrorCode::DegenerateGram, "chain Gram matrix has eigenvalues inside the tolerance band");
    out.chains.push_back({in.n_plus, in.n_minus});
    out.kappa_plus += in.n_plus;
    out.kappa_minus += in.n_minus;
  }
  return out;
}

CanonicalChainSet chains_from_branch_derivatives(const MatrixPencil& pencil,
                                                 const BranchFamily& family,
                                                 const CrossingEvent& event) {
  CanonicalChainSet out;
  out.lambda0 = event.lambda0;
  // The expansion point must sit on the characteristic value to full precision
  // or the low-order chain equations inherit the location error; polish it
  // algebraically when the pencil allows.
  if (auto polished = nearest_real_characteristic_value(pencil, event.lambda0,
                                                        1e-3 * (1.0 + std::abs(event.lambda0))))
    out.lambda0 = *polished;

  std::vector<BranchVanishing> ordered = event.branches;
  for (BranchVanishing& bv : ordered) {
    if (bv.order == 0) {
      auto [m, eta] = order_of_vanishing(pencil, family, bv.branch_id, out.lambda0);
      bv.order = m;
      bv.eta = eta;
    }
  }
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const BranchVanishing& a, const BranchVanishing& b) { return a.order > b.order; });

  int max_order = 0;
  std::vector<int> ids;
  for (const BranchVanishing& bv : ordered) {
    ids.push_back(bv.branch_id);
    max_order = std::max(max_order, bv.order);
  }
  std::vector<std::vector<ComplexVector>> taylor =
      branch_vector_taylor(pencil, family, ids, out.lambda0, max_order - 1);

  for (size_t i = 0; i < ordered.size(); ++i) {
    RootChain chain;
    chain.lambda0 = out.lambda0;
    for (int r = 0; r < ordered[i].order; ++r) chain.vectors.push_back(taylor[i][r]);
    // Normalize so the starter has unit length.
    double s = norm2(chain.vectors[0]);
    if (s > 0)
      for (ComplexVector& v : chain.vectors)
        for (Complex& z : v) z /= s;
    out.chains.push_back(std::move(chain));
  }

  for (int s = 1; s <= max_order; ++s) {
    std::vector<ComplexVector> span;
    for (size_t i = 0; i < ordered.size(); ++i)
      if (ordered[i].order >= s) span.push_back(out.chains[i].vectors[0]);
    if (span.empty()) break;
    out.flag.push_back(orthonormalize(span));
  }
  return out;
}

}  // namespace pencilscope
