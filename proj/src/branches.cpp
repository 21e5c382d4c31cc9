#include "pencilscope/branches.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace pencilscope {

namespace {

constexpr double kEps = 2.220446049250313e-16;

int sgn(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

void align_phase(ComplexVector& v, const ComplexVector& ref) {
  Complex ov = inner(v, ref);
  double m = std::abs(ov);
  if (m < 1e-300) return;
  Complex corr = std::conj(ov) / m;
  for (Complex& z : v) z *= corr;
}

struct MatchResult {
  std::vector<int> perm;  // branch j -> ascending-spectrum index
  double min_overlap = 0.0;
};

MatchResult match_to_previous(const std::vector<ComplexVector>& prev_vecs,
                              const std::vector<double>& prev_mu,
                              const HermitianEigenDecomposition& eig) {
  const int n = static_cast<int>(prev_vecs.size());
  std::vector<std::vector<double>> overlap(n, std::vector<double>(n));
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) overlap[j][k] = std::abs(inner(eig.eigenvectors[k], prev_vecs[j]));

  MatchResult out;
  out.perm.assign(n, -1);
  std::vector<bool> row_used(n, false), col_used(n, false);
  out.min_overlap = 1.0;
  for (int pick = 0; pick < n; ++pick) {
    int bj = -1, bk = -1;
    double best = -1.0;
    double best_gap = 0.0;
    for (int j = 0; j < n; ++j) {
      if (row_used[j]) continue;
      for (int k = 0; k < n; ++k) {
        if (col_used[k]) continue;
        const double o = overlap[j][k];
        const double gap = std::abs(eig.eigenvalues[k] - prev_mu[j]);
        const bool better = o > best + 1e-9 || (o > best - 1e-9 && (bj < 0 || gap < best_gap));
        if (better) {
          best = o;
          best_gap = gap;
          bj = j;
          bk = k;
        }
      }
    }
    row_used[bj] = true;
    col_used[bk] = true;
    out.perm[bj] = bk;
    out.min_overlap = std::min(out.min_overlap, best);
  }
  return out;
}

}  // namespace

BranchFamily sample_branches(const MatrixPencil& pencil, double lambda_min, double lambda_max,
                             int steps, const BranchOptions& opts) {
  if (!pencil.is_selfadjoint())
    fail(ErrorCode::NotSelfadjoint, "branch sampling needs a selfadjoint pencil");
  if (!(lambda_min < lambda_max) || steps < 2)
    fail(ErrorCode::InvariantViolation, "branch sampling needs lambda_min < lambda_max and steps >= 2");

  const int n = pencil.dimension();
  const double h_min = (lambda_max - lambda_min) * opts.h_min_rel;

  BranchFamily fam;
  fam.branches.resize(n);

  HermitianEigenDecomposition eig0 = hermitian_eigen(pencil.evaluate(lambda_min));
  fam.grid.push_back(lambda_min);
  fam.permutation.emplace_back(n);
  for (int j = 0; j < n; ++j) {
    fam.permutation.back()[j] = j;
    fam.branches[j].mu.push_back(eig0.eigenvalues[j]);
    fam.branches[j].vec.push_back(eig0.eigenvectors[j]);
  }

  std::vector<ComplexVector> cur_vecs(n);
  std::vector<double> cur_mu(n);
  for (int j = 0; j < n; ++j) {
    cur_vecs[j] = eig0.eigenvectors[j];
    cur_mu[j] = eig0.eigenvalues[j];
  }
  double cur_lambda = lambda_min;

  std::deque<double> pending;
  for (int i = 1; i < steps; ++i)
    pending.push_back(lambda_min + (lambda_max - lambda_min) * i / (steps - 1));

  while (!pending.empty()) {
    double target = pending.front();
    HermitianEigenDecomposition eig = hermitian_eigen(pencil.evaluate(target));
    MatchResult match = match_to_previous(cur_vecs, cur_mu, eig);

    if (match.min_overlap < opts.overlap_refine) {
      if (target - cur_lambda > h_min) {
        pending.push_front(0.5 * (cur_lambda + target));
        continue;
      }
      // Degenerate node: nudge the probe off the collision and re-match.
      double best_overlap = match.min_overlap;
      for (double probe : {target - h_min / 7.0, target + h_min / 7.0}) {
        if (probe <= cur_lambda) continue;
        HermitianEigenDecomposition e2 = hermitian_eigen(pencil.evaluate(probe));
        MatchResult m2 = match_to_previous(cur_vecs, cur_mu, e2);
        if (m2.min_overlap > best_overlap) {
          best_overlap = m2.min_overlap;
          eig = std::move(e2);
          match = std::move(m2);
          target = probe;
        }
      }
      if (match.min_overlap < opts.overlap_floor)
        fail(ErrorCode::MatchingAmbiguous, "eigenvector continuation lost below the overlap floor");
    }

    pending.pop_front();
    fam.grid.push_back(target);
    fam.permutation.emplace_back(n);
    for (int j = 0; j < n; ++j) {
      const int k = match.perm[j];
      fam.permutation.back()[j] = k;
      ComplexVector v = eig.eigenvectors[k];
      align_phase(v, cur_vecs[j]);
      fam.branches[j].mu.push_back(eig.eigenvalues[k]);
      fam.branches[j].vec.push_back(v);
      cur_mu[j] = eig.eigenvalues[k];
      cur_vecs[j] = std::move(v);
    }
    cur_lambda = target;
  }
  return fam;
}

std::pair<double, ComplexVector> branch_at(const MatrixPencil& pencil, const BranchFamily& family,
                                           int branch_id, double lambda) {
  const auto& grid = family.grid;
  auto it = std::lower_bound(grid.begin(), grid.end(), lambda);
  int idx = static_cast<int>(it - grid.begin());
  if (idx >= static_cast<int>(grid.size())) idx = static_cast<int>(grid.size()) - 1;
  if (idx > 0 && std::abs(grid[idx - 1] - lambda) < std::abs(grid[idx] - lambda)) --idx;

  const ComplexVector& ref = family.branches[branch_id].vec[idx];
  HermitianEigenDecomposition eig = hermitian_eigen(pencil.evaluate(lambda));
  int best_k = 0;
  double best = -1.0;
  for (int k = 0; k < static_cast<int>(eig.eigenvalues.size()); ++k) {
    double o = std::abs(inner(eig.eigenvectors[k], ref));
    if (o > best) {
      best = o;
      best_k = k;
    }
  }
  ComplexVector v = eig.eigenvectors[best_k];
  align_phase(v, ref);
  return {eig.eigenvalues[best_k], std::move(v)};
}

namespace {

double branch_value(const MatrixPencil& pencil, const BranchFamily& family, int branch_id,
                    double lambda) {
  return branch_at(pencil, family, branch_id, lambda).first;
}

// Bracketed root polish: bisection with a clamped secant proposal.
double refine_sign_change(const MatrixPencil& pencil, const BranchFamily& family, int branch_id,
                          double a, double b, double fa, double fb) {
  for (int it = 0; it < 200; ++it) {
    const double width = b - a;
    if (width <= 1e-10 * (1.0 + std::abs(a) + std::abs(b))) break;
    double m;
    if (fb != fa) {
      m = (a * fb - b * fa) / (fb - fa);
      const double lo = a + 0.01 * width, hi = b - 0.01 * width;
      if (!(m >= lo && m <= hi)) m = 0.5 * (a + b);
    } else {
      m = 0.5 * (a + b);
    }
    const double fm = branch_value(pencil, family, branch_id, m);
    if (fm == 0.0) return m;
    if (sgn(fm) == sgn(fa)) {
      a = m;
      fa = fm;
    } else {
      b = m;
      fb = fm;
    }
  }
  return 0.5 * (a + b);
}

// Golden-section minimization of |mu| for even-order touch points.
std::pair<double, double> refine_touch(const MatrixPencil& pencil, const BranchFamily& family,
                                       int branch_id, double a, double b) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a);
  double x2 = a + gr * (b - a);
  double f1 = std::abs(branch_value(pencil, family, branch_id, x1));
  double f2 = std::abs(branch_value(pencil, family, branch_id, x2));
  for (int it = 0; it < 120; ++it) {
    if (b - a <= 1e-9 * (1.0 + std::abs(a) + std::abs(b))) break;
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = std::abs(branch_value(pencil, family, branch_id, x1));
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = std::abs(branch_value(pencil, family, branch_id, x2));
    }
  }
  const double xm = 0.5 * (a + b);
  return {xm, std::abs(branch_value(pencil, family, branch_id, xm))};
}

}  // namespace

std::vector<CrossingEvent> find_crossings(const MatrixPencil& pencil, const BranchFamily& family) {
  const int n = family.branch_count();
  const int g = family.grid_size();
  double mu_scale = 0.0;
  for (const auto& br : family.branches)
    for (double m : br.mu) mu_scale = std::max(mu_scale, std::abs(m));
  const double crossing_tol = 1e-9 * (1.0 + mu_scale);
  const double touch_screen = 1e-2 * (1.0 + mu_scale);

  struct RawHit {
    double lambda;
    int branch;
    double abs_mu;  // residual at the hit; smaller means more trustworthy
  };
  std::vector<RawHit> hits;

  for (int j = 0; j < n; ++j) {
    const auto& mu = family.branches[j].mu;
    std::vector<bool> consumed(g, false);
    std::vector<RawHit> branch_hits;

    for (int i = 0; i + 1 < g; ++i) {
      const double fa = mu[i], fb = mu[i + 1];
      if (std::abs(fa) <= crossing_tol || std::abs(fb) <= crossing_tol) continue;
      if (sgn(fa) * sgn(fb) < 0) {
        double root = refine_sign_change(pencil, family, j, family.grid[i], family.grid[i + 1], fa, fb);
        branch_hits.push_back({root, j, std::abs(branch_value(pencil, family, j, root))});
        consumed[i] = consumed[i + 1] = true;
      }
    }
    for (int i = 0; i < g; ++i) {
      if (std::abs(mu[i]) <= crossing_tol && !consumed[i]) {
        branch_hits.push_back({family.grid[i], j, std::abs(mu[i])});
        consumed[i] = true;
      }
    }
    // Even-order zeros never change sign; chase local minima of |mu| down.
    for (int i = 1; i + 1 < g; ++i) {
      if (consumed[i]) continue;
      const double m0 = std::abs(mu[i]);
      if (m0 > touch_screen || m0 <= crossing_tol) continue;
      if (m0 > std::abs(mu[i - 1]) || m0 > std::abs(mu[i + 1])) continue;
      if (sgn(mu[i - 1]) * sgn(mu[i]) < 0 || sgn(mu[i]) * sgn(mu[i + 1]) < 0) continue;
      auto [xm, fm] = refine_touch(pencil, family, j, family.grid[i - 1], family.grid[i + 1]);
      if (fm <= crossing_tol) {
        branch_hits.push_back({xm, j, fm});
        consumed[i] = true;
      }
    }

    // A refinement cascade can leave several sub-tolerance grid points around
    // one zero; collapse coincident hits of this branch onto the best one.
    std::sort(branch_hits.begin(), branch_hits.end(),
              [](const RawHit& a, const RawHit& b) { return a.lambda < b.lambda; });
    size_t h = 0;
    while (h < branch_hits.size()) {
      size_t e = h + 1;
      RawHit best = branch_hits[h];
      while (e < branch_hits.size() &&
             branch_hits[e].lambda - branch_hits[e - 1].lambda <=
                 1e-4 * (1.0 + std::abs(branch_hits[e].lambda))) {
        if (branch_hits[e].abs_mu < best.abs_mu) best = branch_hits[e];
        ++e;
      }
      hits.push_back(best);
      h = e;
    }
  }

  std::sort(hits.begin(), hits.end(), [](const RawHit& a, const RawHit& b) {
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    return a.branch < b.branch;
  });

  // Merge coincident hits across branches.  The merge radius needs to absorb
  // the noise radius of high-order sign-change roots; the event location is
  // taken from the member with the smallest residual.
  std::vector<CrossingEvent> events;
  size_t i = 0;
  while (i < hits.size()) {
    size_t jj = i + 1;
    double lo = hits[i].lambda;
    while (jj < hits.size() && hits[jj].lambda - lo <= 1e-4 * (1.0 + std::abs(lo))) {
      lo = hits[jj].lambda;
      ++jj;
    }
    CrossingEvent ev;
    const RawHit* best = &hits[i];
    for (size_t t = i; t < jj; ++t)
      if (hits[t].abs_mu < best->abs_mu) best = &hits[t];
    ev.lambda0 = best->lambda;
    for (size_t t = i; t < jj; ++t) {
      bool dup = false;
      for (const auto& bv : ev.branches) dup = dup || bv.branch_id == hits[t].branch;
      if (!dup) ev.branches.push_back({hits[t].branch, 0, 0});
    }
    events.push_back(std::move(ev));
    i = jj;
  }

  for (CrossingEvent& ev : events) {
    for (BranchVanishing& bv : ev.branches) {
      auto [m, eta] = order_of_vanishing(pencil, family, bv.branch_id, ev.lambda0);
      bv.order = m;
      bv.eta = eta;
    }
  }
  return events;
}

DerivativeEstimate richardson_derivative(const std::function<double(double)>& f, double x0, int order,
                                         double base_step) {
  struct Node {
    int offset;
    double weight;
  };
  static const std::vector<std::vector<Node>> stencils = {
      {},  // order 0 unused
      {{-1, -0.5}, {1, 0.5}},
      {{-1, 1.0}, {0, -2.0}, {1, 1.0}},
      {{-2, -0.5}, {-1, 1.0}, {1, -1.0}, {2, 0.5}},
      {{-2, 1.0}, {-1, -4.0}, {0, 6.0}, {1, -4.0}, {2, 1.0}},
      {{-3, -0.5}, {-2, 2.0}, {-1, -2.5}, {1, 2.5}, {2, -2.0}, {3, 0.5}},
      {{-3, 1.0}, {-2, -6.0}, {-1, 15.0}, {0, -20.0}, {1, 15.0}, {2, -6.0}, {3, 1.0}},
  };
  if (order < 1 || order >= static_cast<int>(stencils.size()))
    fail(ErrorCode::InvariantViolation, "derivative order out of supported range");

  const auto& st = stencils[order];
  double fscale = 0.0;
  double coefsum = 0.0;
  for (const Node& nd : st) coefsum += std::abs(nd.weight);

  auto estimate = [&](double h) {
    double acc = 0.0;
    for (const Node& nd : st) {
      double v = f(x0 + nd.offset * h);
      fscale = std::max(fscale, std::abs(v));
      acc += nd.weight * v;
    }
    return acc / std::pow(h, order);
  };

  const double e0 = estimate(base_step);
  const double e1 = estimate(base_step / 2.0);
  const double e2 = estimate(base_step / 4.0);
  const double r1 = (4.0 * e1 - e0) / 3.0;
  const double r2 = (4.0 * e2 - e1) / 3.0;
  const double rr = (16.0 * r2 - r1) / 15.0;

  DerivativeEstimate out;
  out.value = rr;
  const double roundoff = 8.0 * kEps * fscale * coefsum / std::pow(base_step / 4.0, order);
  out.noise = std::abs(r2 - r1) + roundoff;
  return out;
}

std::pair<int, int> order_of_vanishing(const MatrixPencil& pencil, const BranchFamily& family,
                                       int branch_id, double lambda0) {
  const int max_order = 6;
  const double h0 = 1e-3 * (1.0 + std::abs(lambda0));
  auto g = [&](double lam) { return branch_value(pencil, family, branch_id, lam); };

  double fscale = 1.0;
  for (int j = -3; j <= 3; ++j) fscale = std::max(fscale, std::abs(g(lambda0 + j * h0)));
  if (std::abs(g(lambda0)) > 1e-4 * fscale)
    fail(ErrorCode::OrderUndetermined, "branch does not vanish at the requested point");

  std::vector<DerivativeEstimate> est(max_order + 1);
  for (int order = 1; order <= max_order; ++order) {
    const double step = h0 * std::pow(2.0, (order - 1) / 2);
    est[order] = richardson_derivative(g, lambda0, order, step);
  }
  // The crossing location itself carries error; a branch vanishing to order m
  // probed at lambda0+delta shows spurious lower derivatives ~ delta * (next
  // derivative).  Absorb that into the zero threshold.
  const double delta_cap = 5e-5 * (1.0 + std::abs(lambda0));
  int m_fd = 0;
  double lead = 0.0;
  for (int order = 1; order <= max_order; ++order) {
    const double transport = order < max_order ? delta_cap * std::abs(est[order + 1].value) : 0.0;
    if (std::abs(est[order].value) > 10.0 * est[order].noise + transport) {
      m_fd = order;
      lead = est[order].value;
      break;
    }
  }
  if (m_fd == 0)
    fail(ErrorCode::OrderUndetermined, "all derivatives below noise up to the order cap");

  // Cross-check: local least-squares polynomial fit of degree m+2.
  const int fit_deg = m_fd + 2;
  const int half = m_fd + 4;
  const double delta = h0 / 2.0;
  const double radius = half * delta;
  std::vector<double> xs, ys;
  for (int j = -half; j <= half; ++j) {
    if (j == 0) continue;
    xs.push_back(j * delta / radius);
    ys.push_back(g(lambda0 + j * delta));
  }
  const int rows = static_cast<int>(xs.size());
  ComplexMatrix vand(rows, fit_deg + 1);
  ComplexVector rhs(rows);
  for (int r = 0; r < rows; ++r) {
    double p = 1.0;
    for (int c = 0; c <= fit_deg; ++c) {
      vand(r, c) = p;
      p *= xs[r];
    }
    rhs[r] = ys[r];
  }
  ComplexVector coef = lstsq_min_norm(vand, rhs, 1e-12);
  double resid2 = 0.0;
  for (int r = 0; r < rows; ++r) {
    Complex pred = 0.0;
    double p = 1.0;
    for (int c = 0; c <= fit_deg; ++c) {
      pred += coef[c] * p;
      p *= xs[r];
    }
    resid2 += std::norm(rhs[r] - pred);
  }
  const double sigma = std::sqrt(resid2 / rows);
  double amax = 0.0;
  for (int c = 1; c <= fit_deg; ++c) amax = std::max(amax, std::abs(coef[c]));
  int m_fit = 0;
  for (int c = 1; c <= fit_deg; ++c) {
    if (std::abs(coef[c]) > std::max(10.0 * sigma, 0.03 * amax)) {
      m_fit = c;
      break;
    }
  }
  const double lead_fit = coef[m_fd].real();

  if (m_fit != m_fd || sgn(lead_fit) != sgn(lead))
    fail(ErrorCode::OrderUndetermined, "finite differences and local fit disagree on the order");
  return {m_fd, sgn(lead)};
}

int geometric_multiplicity(const MatrixPencil& pencil, double lambda0) {
  ComplexMatrix m = pencil.evaluate(lambda0);
  const double tol = 1e-8 * std::max(m.frobenius_norm(), pencil.coefficient_scale());
  HermitianEigenDecomposition eig = hermitian_eigen(m);
  int k = 0;
  for (double mu : eig.eigenvalues)
    if (std::abs(mu) <= tol) ++k;
  return k;
}

std::vector<std::vector<ComplexVector>> branch_vector_taylor(const MatrixPencil& pencil,
                                                             const BranchFamily& family,
                                                             const std::vector<int>& branch_ids,
                                                             double lambda0, int max_coeff) {
  const double h0 = 1e-3 * (1.0 + std::abs(lambda0));
  // Fit two degrees past the needed coefficients: truncation aliases into
  // coefficient r amplified by radius^-r, so headroom is not optional.
  const int half = max_coeff + 6;
  const double delta = h0 / 2.0;
  const double radius = half * delta;

  std::vector<std::vector<ComplexVector>> out;
  for (int branch_id : branch_ids) {
    // Stencil avoids the point itself, where degenerate eigenvectors can mix.
    std::vector<double> xs;
    std::vector<ComplexVector> vs;
    for (int j = -half; j <= half; ++j) {
      if (j == 0) continue;
      auto [mu, v] = branch_at(pencil, family, branch_id, lambda0 + j * delta);
      (void)mu;
      xs.push_back(j * delta / radius);
      vs.push_back(std::move(v));
    }
    // Common smooth gauge: align every sample against the first one.
    for (size_t s = 1; s < vs.size(); ++s) align_phase(vs[s], vs[0]);

    const int rows = static_cast<int>(xs.size());
    const int deg = max_coeff + 3;
    ComplexMatrix vand(rows, deg + 1);
    for (int r = 0; r < rows; ++r) {
      double p = 1.0;
      for (int c = 0; c <= deg; ++c) {
        vand(r, c) = p;
        p *= xs[r];
      }
    }
    const int dim = pencil.dimension();
    std::vector<ComplexVector> taylor(max_coeff + 1, ComplexVector(dim, 0.0));
    for (int entry = 0; entry < dim; ++entry) {
      ComplexVector rhs(rows);
      for (int r = 0; r < rows; ++r) rhs[r] = vs[r][entry];
      ComplexVector coef = lstsq_min_norm(vand, rhs, 1e-12);
      for (int c = 0; c <= max_coeff; ++c) taylor[c][entry] = coef[c] / std::pow(radius, c);
    }
    out.push_back(std::move(taylor));
  }
  return out;
}

}  // namespace pencilscope
