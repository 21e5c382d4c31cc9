#include "pencilscope/evans.hpp"

#include <algorithm>
#include <cmath>

namespace pencilscope {

namespace {

constexpr double kPi = 3.14159265358979323846;

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

struct Node {
  int offset;
  double weight;
};

const std::vector<std::vector<Node>>& central_stencils() {
  static const std::vector<std::vector<Node>> stencils = {
      {{0, 1.0}},
      {{-1, -0.5}, {1, 0.5}},
      {{-1, 1.0}, {0, -2.0}, {1, 1.0}},
      {{-2, -0.5}, {-1, 1.0}, {1, -1.0}, {2, 0.5}},
      {{-2, 1.0}, {-1, -4.0}, {0, 6.0}, {1, -4.0}, {2, 1.0}},
      {{-3, -0.5}, {-2, 2.0}, {-1, -2.5}, {1, 2.5}, {2, -2.0}, {3, 0.5}},
      {{-3, 1.0}, {-2, -6.0}, {-1, 15.0}, {0, -20.0}, {1, 15.0}, {2, -6.0}, {3, 1.0}},
  };
  return stencils;
}

}  // namespace

Contour Contour::rectangle(double re_lo, double re_hi, double im_lo, double im_hi,
                           int samples_per_edge) {
  Contour c;
  c.vertices = {Complex(re_lo, im_lo), Complex(re_hi, im_lo), Complex(re_hi, im_hi),
                Complex(re_lo, im_hi)};
  c.samples_per_edge = samples_per_edge;
  return c;
}

Complex evans_krein(const MatrixPencil& pencil, Complex lambda, double mu) {
  ComplexMatrix m = pencil.evaluate(lambda);
  for (int i = 0; i < m.rows(); ++i) m(i, i) -= mu;
  return complex_det(m);
}

Complex evans_krein_generalized(const MatrixPencil& pencil, const ComplexMatrix& s, Complex lambda,
                                double mu) {
  if (s.rows() != pencil.dimension() || !s.square())
    fail(ErrorCode::DimensionMismatch, "weight must match the pencil dimension");
  Inertia in = inertia(s);
  if (in.n_minus > 0 || in.n_zero > 0)
    fail(ErrorCode::NotPositiveDefinite, "weight matrix is not positive definite");
  ComplexMatrix m = pencil.evaluate(lambda);
  ComplexMatrix ws = s;
  ws *= Complex(-mu);
  m += ws;
  return complex_det(m);
}

DerivativeEstimate evans_mixed_partial(const MatrixPencil& pencil, double lambda0, int n_mu,
                                       int n_lambda) {
  const auto& stencils = central_stencils();
  if (n_mu < 0 || n_lambda < 0 || n_mu >= static_cast<int>(stencils.size()) ||
      n_lambda >= static_cast<int>(stencils.size()))
    fail(ErrorCode::InvariantViolation, "mixed partial order out of supported range");

  const double scale = 1.0 + std::abs(lambda0);
  // Determinant evaluations carry absolute noise; higher-order stencils divide
  // by h^order, so the base step grows with the order to stay above it.
  const double base = 1e-4 * scale * std::pow(2.0, std::max(0, n_mu + n_lambda - 1));

  double fscale = 0.0;
  auto estimate = [&](double h) {
    double acc = 0.0;
    for (const Node& a : stencils[n_lambda]) {
      for (const Node& b : stencils[n_mu]) {
        const double v =
            evans_krein(pencil, Complex(lambda0 + a.offset * h, 0.0), b.offset * h).real();
        fscale = std::max(fscale, std::abs(v));
        acc += a.weight * b.weight * v;
      }
    }
    return acc / std::pow(h, n_mu + n_lambda);
  };

  const double e0 = estimate(base);
  const double e1 = estimate(base / 2.0);
  const double e2 = estimate(base / 4.0);
  const double r1 = (4.0 * e1 - e0) / 3.0;
  const double r2 = (4.0 * e2 - e1) / 3.0;

  DerivativeEstimate out;
  out.value = (16.0 * r2 - r1) / 15.0;
  double coefsum = 0.0;
  for (const Node& a : stencils[n_lambda])
    for (const Node& b : stencils[n_mu]) coefsum += std::abs(a.weight * b.weight);
  const double roundoff =
      8.0 * 2.220446049250313e-16 * fscale * coefsum / std::pow(base / 4.0, n_mu + n_lambda);
  out.noise = std::abs(r2 - r1) + roundoff;
  return out;
}

EvansSignatureDetail signature_from_evans_detail(const MatrixPencil& pencil, double lambda0) {
  if (geometric_multiplicity(pencil, lambda0) != 1)
    fail(ErrorCode::NotSimple, "signature formula needs geometric multiplicity one");

  DerivativeEstimate dl = evans_mixed_partial(pencil, lambda0, 0, 1);
  DerivativeEstimate dm = evans_mixed_partial(pencil, lambda0, 1, 0);
  if (std::abs(dl.value) <= 10.0 * dl.noise || std::abs(dm.value) <= 10.0 * dm.noise)
    fail(ErrorCode::DerivativeBelowNoise, "first partial derivatives are below the noise floor");

  // Both nonzero first partials mean the vanishing branch has a simple root.
  EvansSignatureDetail out;
  out.d_lambda = dl.value;
  out.d_mu = dm.value;
  out.kappa = (dl.value / dm.value) < 0.0 ? 1 : -1;
  return out;
}

int signature_from_evans(const MatrixPencil& pencil, double lambda0) {
  return signature_from_evans_detail(pencil, lambda0).kappa;
}

double high_order_derivative_gm1(const MatrixPencil& pencil, double lambda0, int order) {
  if (geometric_multiplicity(pencil, lambda0) != 1)
    fail(ErrorCode::NotGeometricMultOne, "high-order branch derivative needs a 1-dim kernel");
  DerivativeEstimate num = evans_mixed_partial(pencil, lambda0, 0, order);
  DerivativeEstimate den = evans_mixed_partial(pencil, lambda0, 1, 0);
  if (std::abs(num.value) <= 10.0 * num.noise || std::abs(den.value) <= 10.0 * den.noise)
    fail(ErrorCode::DerivativeBelowNoise, "partial derivatives are below the noise floor");
  return -num.value / den.value;
}

std::vector<double> semisimple_slopes(const MatrixPencil& pencil, double lambda0) {
  const int k = geometric_multiplicity(pencil, lambda0);
  if (k < 1) fail(ErrorCode::NotSemisimple, "no kernel at the requested point");

  // Algebraic multiplicity from the phase winding on a small circle.
  Contour circle;
  const double r = 1e-2 * (1.0 + std::abs(lambda0));
  const int segments = 24;
  for (int i = 0; i < segments; ++i) {
    double th = 2.0 * kPi * i / segments;
    circle.vertices.push_back(Complex(lambda0 + r * std::cos(th), r * std::sin(th)));
  }
  circle.samples_per_edge = 4;
  const int alpha = winding_number(pencil, circle, 0.0);
  if (alpha != k)
    fail(ErrorCode::NotSemisimple, "algebraic and geometric multiplicities differ");

  std::vector<Complex> poly(k + 1);
  for (int nmu = 0; nmu <= k; ++nmu) {
    DerivativeEstimate d = evans_mixed_partial(pencil, lambda0, nmu, k - nmu);
    poly[nmu] = binomial(k, nmu) * d.value;
  }
  std::vector<Complex> roots = polynomial_roots(poly);
  std::vector<double> slopes;
  for (Complex z : roots) {
    if (std::abs(z.imag()) > 1e-6 * (1.0 + std::abs(z.real())))
      fail(ErrorCode::ComplexRootsDetected, "slope polynomial produced complex roots");
    slopes.push_back(z.real());
  }
  std::sort(slopes.begin(), slopes.end());
  return slopes;
}

int winding_number(const MatrixPencil& pencil, const Contour& contour, double mu) {
  if (contour.vertices.size() < 3)
    fail(ErrorCode::InvariantViolation, "contour needs at least three vertices");

  std::vector<Complex> pts;
  const int per_edge = std::max(contour.samples_per_edge, 2);
  const size_t nv = contour.vertices.size();
  const bool closed = std::abs(contour.vertices.front() - contour.vertices.back()) == 0.0;
  const size_t edges = closed ? nv - 1 : nv;
  for (size_t e = 0; e < edges; ++e) {
    const Complex a = contour.vertices[e];
    const Complex b = contour.vertices[(e + 1) % nv];
    for (int i = 0; i < per_edge; ++i)
      pts.push_back(a + (b - a) * (static_cast<double>(i) / per_edge));
  }
  pts.push_back(pts.front());

  std::vector<Complex> vals(pts.size());
  double vmax = 0.0;
  for (size_t i = 0; i < pts.size(); ++i) {
    vals[i] = evans_krein(pencil, pts[i], mu);
    vmax = std::max(vmax, std::abs(vals[i]));
  }
  if (vmax <= 0.0) fail(ErrorCode::RootOnContour, "determinant vanishes along the whole contour");
  const double margin = 1e-12 * vmax;

  double total = 0.0;
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    Complex za = pts[i], zb = pts[i + 1];
    Complex fa = vals[i], fb = vals[i + 1];
    if (std::abs(fa) <= margin || std::abs(fb) <= margin)
      fail(ErrorCode::RootOnContour, "determinant too close to zero on the contour");

    // Refine this segment until every phase increment is below pi/2.
    struct Seg {
      Complex za, zb, fa, fb;
      int depth;
    };
    std::vector<Seg> stack{{za, zb, fa, fb, 0}};
    while (!stack.empty()) {
      Seg s = stack.back();
      stack.pop_back();
      const double dphi = std::arg(s.fb / s.fa);
      if (std::abs(dphi) < kPi / 2.0) {
        total += dphi;
        continue;
      }
      if (s.depth >= 40)
        fail(ErrorCode::PhaseStepTooLarge, "phase step refinement exhausted");
      const Complex zm = 0.5 * (s.za + s.zb);
      const Complex fm = evans_krein(pencil, zm, mu);
      if (std::abs(fm) <= margin) fail(ErrorCode::RootOnContour, "refined sample hit a root");
      stack.push_back({zm, s.zb, fm, s.fb, s.depth + 1});
      stack.push_back({s.za, zm, s.fa, fm, s.depth + 1});
    }
  }

  const double w = total / (2.0 * kPi);
  const long rounded = std::lround(w);
  if (std::abs(w - rounded) > 1e-3)
    fail(ErrorCode::PhaseStepTooLarge, "summed phase is not an integer multiple of 2*pi");
  return static_cast<int>(rounded);
}

}  // namespace pencilscope
