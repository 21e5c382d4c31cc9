#include "pencilscope/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pencilscope {

namespace {

constexpr double kEps = 2.220446049250313e-16;

void require_square(const ComplexMatrix& a, const char* who) {
  if (!a.square()) fail(ErrorCode::DimensionMismatch, std::string(who) + " requires a square matrix");
}

// Fix the vector phase so the largest-magnitude entry is real positive.
void canonicalize_phase(ComplexVector& v) {
  int imax = 0;
  double best = -1.0;
  for (size_t i = 0; i < v.size(); ++i) {
    double m = std::abs(v[i]);
    if (m > best + 1e-15) {
      best = m;
      imax = static_cast<int>(i);
    }
  }
  if (best <= 0.0) return;
  Complex phase = v[imax] / best;
  Complex corr = std::conj(phase);
  for (Complex& z : v) z *= corr;
  v[imax] = Complex(std::abs(v[imax]), 0.0);
}

}  // namespace

HermitianEigenDecomposition hermitian_eigen(const ComplexMatrix& a) {
  require_square(a, "hermitian_eigen");
  const int n = a.rows();
  const double scale = a.frobenius_norm();
  if (!a.all_finite()) fail(ErrorCode::NotHermitian, "matrix has non-finite entries");
  if (!a.is_hermitian(1e-12 * std::max(scale, 1e-300)))
    fail(ErrorCode::NotHermitian, "matrix fails the Hermitian symmetry check");

  ComplexMatrix w = a;
  // Symmetrize away representation noise below the check tolerance.
  for (int i = 0; i < n; ++i) {
    w(i, i) = Complex(w(i, i).real(), 0.0);
    for (int j = i + 1; j < n; ++j) {
      Complex m = 0.5 * (w(i, j) + std::conj(w(j, i)));
      w(i, j) = m;
      w(j, i) = std::conj(m);
    }
  }

  ComplexMatrix vecs = ComplexMatrix::identity(n);
  const double thresh = 1e-13 * std::max(scale, 1e-300);
  const int max_sweeps = 100;

  bool converged = (n <= 1);
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += std::norm(w(p, q));
    off = std::sqrt(2.0 * off);
    if (off <= thresh) {
      converged = true;
      break;
    }
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const Complex apq = w(p, q);
        const double g = std::abs(apq);
        if (g <= 1e-18 * std::max(scale, 1e-300)) {
          w(p, q) = 0.0;
          w(q, p) = 0.0;
          continue;
        }
        const double app = w(p, p).real();
        const double aqq = w(q, q).real();
        const Complex phase = apq / g;
        const double tau = (aqq - app) / (2.0 * g);
        const double sgn = tau >= 0.0 ? 1.0 : -1.0;
        const double t = 1.0 / (tau + sgn * std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const Complex sp = s * phase;  // rotation entry R(p,q) = s*e^{i phi}

        // Apply R* W R on the (p,q) plane, keeping W Hermitian explicitly.
        for (int k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const Complex wkp = w(k, p);
          const Complex wkq = w(k, q);
          w(k, p) = c * wkp - std::conj(sp) * wkq;
          w(k, q) = sp * wkp + c * wkq;
          w(p, k) = std::conj(w(k, p));
          w(q, k) = std::conj(w(k, q));
        }
        const double new_app = app - t * g;
        const double new_aqq = aqq + t * g;
        w(p, p) = new_app;
        w(q, q) = new_aqq;
        w(p, q) = 0.0;
        w(q, p) = 0.0;

        for (int k = 0; k < n; ++k) {
          const Complex vkp = vecs(k, p);
          const Complex vkq = vecs(k, q);
          vecs(k, p) = c * vkp - std::conj(sp) * vkq;
          vecs(k, q) = sp * vkp + c * vkq;
        }
      }
    }
  }

  if (!converged && n > 1) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += std::norm(w(p, q));
    if (std::sqrt(2.0 * off) > thresh)
      fail(ErrorCode::NoConvergence, "Jacobi sweeps exhausted before off-diagonal threshold");
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> diag(n);
  for (int i = 0; i < n; ++i) diag[i] = w(i, i).real();
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return diag[i] < diag[j]; });

  HermitianEigenDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n);
  for (int k = 0; k < n; ++k) {
    out.eigenvalues[k] = diag[order[k]];
    ComplexVector v = vecs.column(order[k]);
    double nv = norm2(v);
    if (nv > 0.0)
      for (Complex& z : v) z /= nv;
    canonicalize_phase(v);
    out.eigenvectors[k] = std::move(v);
  }
  return out;
}

Complex complex_det(const ComplexMatrix& a) {
  require_square(a, "complex_det");
  const int n = a.rows();
  if (n == 0) return 1.0;
  ComplexMatrix w = a;
  Complex det = 1.0;
  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = std::abs(w(k, k));
    for (int i = k + 1; i < n; ++i) {
      double m = std::abs(w(i, k));
      if (m > best) {
        best = m;
        piv = i;
      }
    }
    if (best == 0.0) return 0.0;
    if (piv != k) {
      for (int j = k; j < n; ++j) std::swap(w(k, j), w(piv, j));
      det = -det;
    }
    det *= w(k, k);
    const Complex inv_piv = 1.0 / w(k, k);
    for (int i = k + 1; i < n; ++i) {
      const Complex f = w(i, k) * inv_piv;
      if (f == Complex(0.0)) continue;
      for (int j = k; j < n; ++j) w(i, j) -= f * w(k, j);
    }
  }
  return det;
}

Inertia inertia(const ComplexMatrix& a, double zero_tol) {
  if (zero_tol <= 0.0) fail(ErrorCode::InvariantViolation, "inertia needs zero_tol > 0");
  HermitianEigenDecomposition eig = hermitian_eigen(a);
  Inertia out;
  for (double mu : eig.eigenvalues) {
    if (mu > zero_tol)
      ++out.n_plus;
    else if (mu < -zero_tol)
      ++out.n_minus;
    else
      ++out.n_zero;
  }
  return out;
}

Inertia inertia(const ComplexMatrix& a) {
  return inertia(a, 1e-9 * std::max(a.frobenius_norm(), 1e-30));
}

ComplexVector solve_linear(const ComplexMatrix& a, const ComplexVector& b) {
  require_square(a, "solve_linear");
  const int n = a.rows();
  ComplexMatrix w = a;
  ComplexVector x = b;
  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = std::abs(w(k, k));
    for (int i = k + 1; i < n; ++i) {
      double m = std::abs(w(i, k));
      if (m > best) {
        best = m;
        piv = i;
      }
    }
    if (best < 1e-300) fail(ErrorCode::NoConvergence, "linear solve hit a zero pivot");
    if (piv != k) {
      for (int j = k; j < n; ++j) std::swap(w(k, j), w(piv, j));
      std::swap(x[k], x[piv]);
    }
    const Complex inv_piv = 1.0 / w(k, k);
    for (int i = k + 1; i < n; ++i) {
      const Complex f = w(i, k) * inv_piv;
      if (f == Complex(0.0)) continue;
      for (int j = k; j < n; ++j) w(i, j) -= f * w(k, j);
      x[i] -= f * x[k];
    }
  }
  for (int i = n - 1; i >= 0; --i) {
    Complex acc = x[i];
    for (int j = i + 1; j < n; ++j) acc -= w(i, j) * x[j];
    x[i] = acc / w(i, i);
  }
  return x;
}

ComplexMatrix inverse(const ComplexMatrix& a) {
  require_square(a, "inverse");
  const int n = a.rows();
  ComplexMatrix out(n, n);
  for (int j = 0; j < n; ++j) {
    ComplexVector e(n, 0.0);
    e[j] = 1.0;
    out.set_column(j, solve_linear(a, e));
  }
  return out;
}

std::vector<Complex> characteristic_polynomial(const ComplexMatrix& a) {
  require_square(a, "characteristic_polynomial");
  const int n = a.rows();
  // Faddeev-LeVerrier recursion; coefficients of det(xI - A), monic.
  std::vector<Complex> c(n + 1, 0.0);
  c[n] = 1.0;
  ComplexMatrix m = ComplexMatrix::zero(n);
  for (int k = 1; k <= n; ++k) {
    // M_k = A*M_{k-1} + c_{n-k+1} I
    ComplexMatrix am = a * m;
    for (int i = 0; i < n; ++i) am(i, i) += c[n - k + 1];
    m = std::move(am);
    Complex tr = 0.0;  // trace(A * M_k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) tr += a(i, j) * m(j, i);
    c[n - k] = -tr / static_cast<double>(k);
  }
  return c;
}

std::vector<Complex> polynomial_roots(const std::vector<Complex>& coeffs) {
  int deg = static_cast<int>(coeffs.size()) - 1;
  while (deg > 0 && std::abs(coeffs[deg]) == 0.0) --deg;
  if (deg <= 0) return {};

  std::vector<Complex> c(coeffs.begin(), coeffs.begin() + deg + 1);
  const Complex lead = c[deg];
  for (Complex& z : c) z /= lead;

  double bound = 0.0;
  for (int k = 0; k < deg; ++k) bound = std::max(bound, std::abs(c[k]));
  bound += 1.0;  // Cauchy bound on root magnitudes

  std::vector<Complex> x(deg);
  Complex seed(0.4, 0.9);
  Complex p = seed;
  for (int k = 0; k < deg; ++k) {
    x[k] = bound * p;
    p *= seed;
  }

  auto eval = [&](Complex z) {
    Complex acc = c[deg];
    for (int k = deg - 1; k >= 0; --k) acc = acc * z + c[k];
    return acc;
  };

  const int max_iter = 2000;
  double best_update = 1e300;
  int stale = 0;
  for (int iter = 0; iter < max_iter; ++iter) {
    double max_update = 0.0;
    for (int i = 0; i < deg; ++i) {
      Complex denom = 1.0;
      for (int j = 0; j < deg; ++j) {
        if (j == i) continue;
        denom *= x[i] - x[j];
      }
      if (std::abs(denom) < 1e-290) {
        x[i] += Complex(1e-8 * bound, 1e-8 * bound);
        continue;
      }
      const Complex dz = eval(x[i]) / denom;
      x[i] -= dz;
      max_update = std::max(max_update, std::abs(dz));
    }
    double tol = 1e-14 * (1.0 + bound);
    if (max_update < tol) break;
    if (max_update < 0.7 * best_update) {
      best_update = max_update;
      stale = 0;
    } else if (++stale > 80) {
      break;  // stagnating at the multiple-root scatter floor
    }
  }

  // Residual sanity: each point should solve the polynomial to rounding levels.
  // The scale is floored by the coefficient magnitude at unit argument so that
  // roots at the origin of a polynomial with vanishing low coefficients pass.
  double cmax = 0.0;
  for (int k = 0; k <= deg; ++k) cmax = std::max(cmax, std::abs(c[k]));
  for (const Complex& z : x) {
    double mag = 1.0, cscale = 0.0;
    for (int k = 0; k <= deg; ++k) {
      cscale += std::abs(c[k]) * mag;
      mag *= std::abs(z);
    }
    cscale += cmax * std::pow(std::max(1.0, std::abs(z)), deg);
    if (std::abs(eval(z)) > 1e-6 * std::max(cscale, 1e-30))
      fail(ErrorCode::NoConvergence, "root iteration residual too large");
  }
  return x;
}

namespace {

// Coefficients of the derivative polynomial (ascending powers).
std::vector<Complex> poly_derivative(const std::vector<Complex>& c) {
  if (c.size() <= 1) return {Complex(0.0)};
  std::vector<Complex> d(c.size() - 1);
  for (size_t k = 1; k < c.size(); ++k) d[k - 1] = c[k] * static_cast<double>(k);
  return d;
}

Complex poly_eval(const std::vector<Complex>& c, Complex z) {
  Complex acc = 0.0;
  for (size_t k = c.size(); k-- > 0;) acc = acc * z + c[k];
  return acc;
}

// Linking radius when joining clusters into combined size s.  Simultaneous
// iteration leaves an m-fold root scattered like eps^(1/m), so the radius
// anticipates one extra member; genuine-vs-spurious merges are then settled by
// the derivative-residual verification below, which is far sharper.
double link_radius(double base_tol, double center_mag, int combined_size) {
  const int anticipate = std::min(combined_size + 1, 8);
  const double widened = 100.0 * std::pow(kEps, 1.0 / anticipate) * (1.0 + center_mag);
  return std::max(base_tol * (1.0 + center_mag), widened);
}

// Magnitude scale of p^(j) evaluated at z: the natural unit for residuals.
double derivative_scale(const std::vector<Complex>& coeffs, int j, Complex z) {
  std::vector<Complex> d = coeffs;
  for (int t = 0; t < j; ++t) d = poly_derivative(d);
  double acc = 0.0;
  double zpow = 1.0;
  const double az = std::abs(z);
  for (const Complex& c : d) {
    acc += std::abs(c) * zpow;
    zpow *= az;
  }
  return std::max(acc, 1e-300);
}

// Newton polish of an m-fold root: it is a simple root of the (m-1)-th derivative.
Complex polish_root(const std::vector<Complex>& coeffs, Complex seed, int multiplicity) {
  std::vector<Complex> d = coeffs;
  for (int k = 0; k < multiplicity - 1; ++k) d = poly_derivative(d);
  const std::vector<Complex> dd = poly_derivative(d);
  Complex z = seed;
  for (int it = 0; it < 60; ++it) {
    const Complex f = poly_eval(d, z);
    const Complex fp = poly_eval(dd, z);
    if (std::abs(fp) < 1e-280) return seed;
    const Complex step = f / fp;
    z -= step;
    if (std::abs(step) < 1e-15 * (1.0 + std::abs(z))) break;
  }
  return z;
}

// A genuine m-fold root kills the first m-1 derivatives at the polished point.
bool verify_multiplicity(const std::vector<Complex>& coeffs, Complex z, int multiplicity) {
  for (int j = 1; j < multiplicity; ++j) {
    std::vector<Complex> d = coeffs;
    for (int t = 0; t < j; ++t) d = poly_derivative(d);
    if (std::abs(poly_eval(d, z)) > 1e-7 * derivative_scale(coeffs, j, z)) return false;
  }
  return true;
}

struct RootCluster {
  std::vector<Complex> members;
  Complex center;
  int count() const { return static_cast<int>(members.size()); }
};

Complex centroid(const std::vector<Complex>& pts) {
  Complex s = 0.0;
  for (Complex z : pts) s += z;
  return s / static_cast<double>(pts.size());
}

// Split a rejected cluster at its largest internal gap (along a stable order).
std::pair<std::vector<Complex>, std::vector<Complex>> split_cluster(std::vector<Complex> pts) {
  std::sort(pts.begin(), pts.end(), [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  size_t cut = 1;
  double best = -1.0;
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    const double gap = std::abs(pts[i + 1] - pts[i]);
    if (gap > best) {
      best = gap;
      cut = i + 1;
    }
  }
  return {std::vector<Complex>(pts.begin(), pts.begin() + cut),
          std::vector<Complex>(pts.begin() + cut, pts.end())};
}

void emit_verified(const std::vector<Complex>& coeffs, std::vector<Complex> pts, double base_tol,
                   std::vector<std::pair<Complex, int>>& out) {
  const int m = static_cast<int>(pts.size());
  Complex center = centroid(pts);
  if (coeffs.empty()) {
    out.emplace_back(center, m);
    return;
  }
  Complex polished = polish_root(coeffs, center, m);
  const double guard = link_radius(base_tol, std::abs(center), m) * 4.0;
  if (std::abs(polished - center) > guard) polished = center;
  if (m == 1 || verify_multiplicity(coeffs, polished, m)) {
    out.emplace_back(polished, m);
    return;
  }
  // Members do not behave like one multiple root: split and retry.
  auto [lo, hi] = split_cluster(std::move(pts));
  emit_verified(coeffs, std::move(lo), base_tol, out);
  emit_verified(coeffs, std::move(hi), base_tol, out);
}

}  // namespace

std::vector<std::pair<Complex, int>> cluster_roots(const std::vector<Complex>& roots,
                                                   double base_tol,
                                                   const std::vector<Complex>& coeffs) {
  std::vector<RootCluster> clusters;
  for (const Complex& r : roots) clusters.push_back({{r}, r});

  // Single-linkage agglomeration; smallest gaps first for determinism.
  bool merged = true;
  while (merged) {
    merged = false;
    double best_gap = 1e300;
    int bi = -1, bj = -1;
    for (size_t i = 0; i < clusters.size(); ++i) {
      for (size_t j = i + 1; j < clusters.size(); ++j) {
        const double gap = std::abs(clusters[i].center - clusters[j].center);
        const int m = clusters[i].count() + clusters[j].count();
        const double mag = 0.5 * (std::abs(clusters[i].center) + std::abs(clusters[j].center));
        if (gap <= link_radius(base_tol, mag, m) && gap < best_gap) {
          best_gap = gap;
          bi = static_cast<int>(i);
          bj = static_cast<int>(j);
        }
      }
    }
    if (bi >= 0) {
      clusters[bi].members.insert(clusters[bi].members.end(), clusters[bj].members.begin(),
                                  clusters[bj].members.end());
      clusters[bi].center = centroid(clusters[bi].members);
      clusters.erase(clusters.begin() + bj);
      merged = true;
    }
  }

  std::vector<std::pair<Complex, int>> out;
  out.reserve(clusters.size());
  for (RootCluster& cl : clusters) emit_verified(coeffs, std::move(cl.members), base_tol, out);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.first.real() != b.first.real()) return a.first.real() < b.first.real();
    return a.first.imag() < b.first.imag();
  });
  return out;
}

std::vector<std::pair<Complex, int>> general_eigenvalues(const ComplexMatrix& a) {
  require_square(a, "general_eigenvalues");
  const int n = a.rows();
  if (n == 0) return {};
  if (n > 40) fail(ErrorCode::DimensionMismatch, "general_eigenvalues is limited to N <= 40");

  // Scale so the characteristic polynomial is well-behaved, then undo on roots.
  double s = a.frobenius_norm() / std::sqrt(static_cast<double>(n));
  if (s < 1e-300) return {{Complex(0.0), n}};
  ComplexMatrix scaled_a = a;
  scaled_a *= Complex(1.0 / s, 0.0);

  std::vector<Complex> charpoly = characteristic_polynomial(scaled_a);
  std::vector<Complex> roots = polynomial_roots(charpoly);
  std::vector<std::pair<Complex, int>> clustered = cluster_roots(roots, 1e-7, charpoly);
  for (auto& [z, m] : clustered) z *= s;
  return clustered;
}

SvdResult svd(const ComplexMatrix& a) {
  const int rows = a.rows();
  const int cols = a.cols();
  if (rows < cols) fail(ErrorCode::DimensionMismatch, "svd expects rows >= cols");

  ComplexMatrix w = a;
  ComplexMatrix v = ComplexMatrix::identity(cols);
  const int max_sweeps = 60;
  const double tol = 1e-15;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < cols - 1; ++p) {
      for (int q = p + 1; q < cols; ++q) {
        double app = 0.0, aqq = 0.0;
        Complex apq = 0.0;
        for (int i = 0; i < rows; ++i) {
          app += std::norm(w(i, p));
          aqq += std::norm(w(i, q));
          apq += std::conj(w(i, p)) * w(i, q);
        }
        const double g = std::abs(apq);
        if (g <= tol * std::sqrt(app * aqq) || g < 1e-300) continue;
        rotated = true;
        const Complex phase = apq / g;
        const double tau = (aqq - app) / (2.0 * g);
        const double sgn = tau >= 0.0 ? 1.0 : -1.0;
        const double t = 1.0 / (tau + sgn * std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double sr = t * c;
        const Complex sp = sr * phase;
        for (int i = 0; i < rows; ++i) {
          const Complex wip = w(i, p);
          const Complex wiq = w(i, q);
          w(i, p) = c * wip - std::conj(sp) * wiq;
          w(i, q) = sp * wip + c * wiq;
        }
        for (int i = 0; i < cols; ++i) {
          const Complex vip = v(i, p);
          const Complex viq = v(i, q);
          v(i, p) = c * vip - std::conj(sp) * viq;
          v(i, q) = sp * vip + c * viq;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sig(cols);
  for (int j = 0; j < cols; ++j) {
    double s2 = 0.0;
    for (int i = 0; i < rows; ++i) s2 += std::norm(w(i, j));
    sig[j] = std::sqrt(s2);
  }
  std::vector<int> order(cols);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return sig[i] > sig[j]; });

  SvdResult out;
  out.singular.resize(cols);
  out.u = ComplexMatrix(rows, cols);
  out.v = ComplexMatrix(cols, cols);
  std::vector<ComplexVector> ucols;
  for (int k = 0; k < cols; ++k) {
    const int j = order[k];
    out.singular[k] = sig[j];
    for (int i = 0; i < cols; ++i) out.v(i, k) = v(i, j);
    ComplexVector col(rows);
    for (int i = 0; i < rows; ++i) col[i] = w(i, j);
    if (sig[j] > 1e-290) {
      for (Complex& z : col) z /= sig[j];
    } else {
      std::fill(col.begin(), col.end(), Complex(0.0));
    }
    ucols.push_back(std::move(col));
  }
  // Complete zero-norm left columns to an orthonormal set so U is usable as a basis.
  for (int k = 0; k < cols; ++k) {
    if (norm2(ucols[k]) > 0.5) continue;
    for (int cand = 0; cand < rows; ++cand) {
      ComplexVector e(rows, 0.0);
      e[cand] = 1.0;
      for (int j = 0; j < cols; ++j) {
        if (j == k || norm2(ucols[j]) < 0.5) continue;
        Complex proj = inner(e, ucols[j]);
        for (int i = 0; i < rows; ++i) e[i] -= proj * ucols[j][i];
      }
      double nv = norm2(e);
      if (nv > 0.3) {
        for (Complex& z : e) z /= nv;
        ucols[k] = std::move(e);
        break;
      }
    }
  }
  for (int k = 0; k < cols; ++k) out.u.set_column(k, ucols[k]);
  return out;
}

int numerical_rank(const SvdResult& s, double rel_tol) {
  if (s.singular.empty()) return 0;
  const double cut = rel_tol * std::max(s.singular[0], 1e-300);
  int r = 0;
  for (double sv : s.singular)
    if (sv > cut) ++r;
  return r;
}

std::vector<ComplexVector> null_space(const ComplexMatrix& a, double rel_tol) {
  ComplexMatrix work = a;
  if (work.rows() < work.cols()) {
    ComplexMatrix padded(work.cols(), work.cols());
    for (int i = 0; i < work.rows(); ++i)
      for (int j = 0; j < work.cols(); ++j) padded(i, j) = work(i, j);
    work = std::move(padded);
  }
  SvdResult s = svd(work);
  const int r = numerical_rank(s, rel_tol);
  std::vector<ComplexVector> out;
  for (int k = r; k < static_cast<int>(s.singular.size()); ++k) out.push_back(s.v.column(k));
  return out;
}

ComplexVector lstsq_min_norm(const ComplexMatrix& a, const ComplexVector& b, double rel_tol) {
  SvdResult s = svd(a);
  const int r = numerical_rank(s, rel_tol);
  ComplexVector x(a.cols(), 0.0);
  for (int k = 0; k < r; ++k) {
    ComplexVector uk = s.u.column(k);
    Complex coeff = inner(b, uk) / s.singular[k];
    for (int i = 0; i < a.cols(); ++i) x[i] += coeff * s.v(i, k);
  }
  return x;
}

std::vector<ComplexVector> orthonormalize(const std::vector<ComplexVector>& vs, double drop_tol) {
  std::vector<ComplexVector> basis;
  for (ComplexVector v : vs) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const ComplexVector& b : basis) {
        Complex proj = inner(v, b);
        for (size_t i = 0; i < v.size(); ++i) v[i] -= proj * b[i];
      }
    }
    double nv = norm2(v);
    if (nv > drop_tol) {
      for (Complex& z : v) z /= nv;
      basis.push_back(std::move(v));
    }
  }
  return basis;
}

std::vector<double> principal_angles(const std::vector<ComplexVector>& a,
                                     const std::vector<ComplexVector>& b) {
  std::vector<ComplexVector> qa = orthonormalize(a);
  std::vector<ComplexVector> qb = orthonormalize(b);
  if (qa.empty() || qb.empty()) return {};
  const int na = static_cast<int>(qa.size());
  const int nb = static_cast<int>(qb.size());
  ComplexMatrix cross(std::max(na, nb), std::min(na, nb));
  // Build Qa* Qb (or its adjoint) so rows >= cols for the SVD.
  const bool a_major = na >= nb;
  for (int i = 0; i < cross.rows(); ++i)
    for (int j = 0; j < cross.cols(); ++j) {
      const ComplexVector& x = a_major ? qa[i] : qb[i];
      const ComplexVector& y = a_major ? qb[j] : qa[j];
      cross(i, j) = inner(y, x);
    }
  SvdResult s = svd(cross);
  std::vector<double> angles;
  for (double sv : s.singular) angles.push_back(std::acos(std::clamp(sv, 0.0, 1.0)));
  std::sort(angles.begin(), angles.end());
  return angles;
}

}  // namespace pencilscope
