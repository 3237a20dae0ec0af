// Core value types for complex differential calculus on scalar fields over C^n:
// points, (1,0) vector fields, Hermitian matrices, and scalar fields with
// optional analytic derivative callbacks.
//
// Conventions used throughout the library (all pairings are fixed here and
// nowhere else):
//   g(X, Y)        = (1/2) sum_j X_j conj(Y_j)          (Hermitian metric)
//   hess_pair(H,X,Y) = sum_{j,k} H_{jk} X_j conj(Y_k)   (plain sum, no 1/2)
//   ||grad f||     = 2 sqrt(sum_j |df/dz_j|^2)
// With these, a normalized tangent field L has g(L, L) = 1/2 and sqrt(2)*N is
// a unit vector.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dfx {

using Cx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A field evaluation produced a non-finite value or was requested outside the
// field's domain. The message names the offending coordinate when known.
struct EvaluationError : Error {
  using Error::Error;
};

// Gradient vanished where a normal/tangent frame was requested.
struct DegeneratePointError : Error {
  using Error::Error;
};

struct DimensionError : Error {
  using Error::Error;
};

struct PreconditionError : Error {
  using Error::Error;
};

// A limit or step-refinement procedure failed to converge; carries the raw
// sequence that was observed.
struct NoConvergenceError : Error {
  NoConvergenceError(const std::string& msg, std::vector<Cx> seq)
      : Error(msg), sequence(std::move(seq)) {}
  std::vector<Cx> sequence;
};

struct PoleError : Error {
  using Error::Error;
};

struct InfeasibleError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// CPoint
// ---------------------------------------------------------------------------

// A point of C^n, n >= 2. Coordinates are dimensionless.
struct CPoint {
  std::vector<Cx> coords;

  CPoint() = default;
  explicit CPoint(std::vector<Cx> c) : coords(std::move(c)) {}
  CPoint(Cx z, Cx w) : coords{z, w} {}

  std::size_t dim() const { return coords.size(); }
  Cx& operator[](std::size_t j) { return coords[j]; }
  const Cx& operator[](std::size_t j) const { return coords[j]; }

  double norm() const {
    double s = 0;
    for (const Cx& z : coords) s += std::norm(z);
    return std::sqrt(s);
  }

  bool finite() const {
    for (const Cx& z : coords)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
  }

  std::string str() const {
    std::ostringstream os;
    os << "(";
    for (std::size_t j = 0; j < coords.size(); ++j) {
      if (j) os << ", ";
      os << coords[j].real() << (coords[j].imag() < 0 ? "-" : "+")
         << std::abs(coords[j].imag()) << "i";
    }
    os << ")";
    return os.str();
  }
};

// p + s*v with v interpreted as a complex displacement vector.
inline CPoint displaced(const CPoint& p, const std::vector<Cx>& v, double s) {
  CPoint q = p;
  for (std::size_t j = 0; j < q.dim(); ++j) q[j] += s * v[j];
  return q;
}

// ---------------------------------------------------------------------------
// Field1_0
// ---------------------------------------------------------------------------

// A (1,0) vector sum_j a_j d/dz_j attached to a point.
struct Field1_0 {
  std::vector<Cx> components;

  Field1_0() = default;
  explicit Field1_0(std::vector<Cx> c) : components(std::move(c)) {}
  Field1_0(Cx a, Cx b) : components{a, b} {}

  std::size_t dim() const { return components.size(); }
  Cx& operator[](std::size_t j) { return components[j]; }
  const Cx& operator[](std::size_t j) const { return components[j]; }

  double sq_sum() const {
    double s = 0;
    for (const Cx& a : components) s += std::norm(a);
    return s;
  }
};

// Hermitian metric pairing g(X, Y) = (1/2) sum X_j conj(Y_j).
inline Cx metric_g(const Field1_0& x, const Field1_0& y) {
  if (x.dim() != y.dim()) throw DimensionError("metric_g: dimension mismatch");
  Cx s = 0;
  for (std::size_t j = 0; j < x.dim(); ++j) s += x[j] * std::conj(y[j]);
  return 0.5 * s;
}

// ---------------------------------------------------------------------------
// HermMatrix
// ---------------------------------------------------------------------------

// n x n complex matrix intended to be Hermitian; symmetrize() enforces
// H_{kj} = conj(H_{jk}) exactly.
struct HermMatrix {
  std::size_t n = 0;
  std::vector<Cx> a;  // row-major

  HermMatrix() = default;
  explicit HermMatrix(std::size_t dim) : n(dim), a(dim * dim, Cx(0, 0)) {}

  Cx& at(std::size_t j, std::size_t k) { return a[j * n + k]; }
  const Cx& at(std::size_t j, std::size_t k) const { return a[j * n + k]; }

  void symmetrize() {
    for (std::size_t j = 0; j < n; ++j) {
      at(j, j) = Cx(at(j, j).real(), 0.0);
      for (std::size_t k = j + 1; k < n; ++k) {
        Cx m = 0.5 * (at(j, k) + std::conj(at(k, j)));
        at(j, k) = m;
        at(k, j) = std::conj(m);
      }
    }
  }

  double max_abs() const {
    double m = 0;
    for (const Cx& v : a) m = std::max(m, std::abs(v));
    return m;
  }

  // Largest deviation from Hermitian symmetry.
  double hermiticity_defect() const {
    double d = 0;
    for (std::size_t j = 0; j < n; ++j) {
      d = std::max(d, std::abs(at(j, j).imag()));
      for (std::size_t k = j + 1; k < n; ++k)
        d = std::max(d, std::abs(at(j, k) - std::conj(at(k, j))));
    }
    return d;
  }

  static HermMatrix identity(std::size_t dim) {
    HermMatrix h(dim);
    for (std::size_t j = 0; j < dim; ++j) h.at(j, j) = 1.0;
    return h;
  }
};

// Hessian pairing: sum_{j,k} H_{jk} X_j conj(Y_k). Real when X = Y and H is
// Hermitian.
inline Cx hess_pair(const HermMatrix& h, const Field1_0& x, const Field1_0& y) {
  if (h.n != x.dim() || h.n != y.dim())
    throw DimensionError("hess_pair: dimension mismatch");
  Cx s = 0;
  for (std::size_t j = 0; j < h.n; ++j)
    for (std::size_t k = 0; k < h.n; ++k)
      s += h.at(j, k) * x[j] * std::conj(y[k]);
  return s;
}

// ---------------------------------------------------------------------------
// ScalarField
// ---------------------------------------------------------------------------

// A real scalar field on C^n. `value` is mandatory; `grad` (Wirtinger
// derivatives df/dz_j) and `hessian` (d^2 f / dz_j dconj(z_k)) are optional
// analytic callbacks. When present they take precedence over finite
// differences, and must agree with central differences to relative 1e-6 at
// validation points.
struct ScalarField {
  std::function<double(const CPoint&)> value;
  std::function<std::vector<Cx>(const CPoint&)> grad;
  std::function<HermMatrix(const CPoint&)> hessian;
  std::string name;
  // Optional characteristic length for finite differencing; fields with a
  // coordinate singularity (the worm near w = 0) shrink it locally.
  std::function<double(const CPoint&)> step_scale;

  bool has_grad() const { return static_cast<bool>(grad); }
  bool has_hessian() const { return static_cast<bool>(hessian); }

  double operator()(const CPoint& p) const {
    double v = value(p);
    if (!std::isfinite(v))
      throw EvaluationError("field '" + name + "': non-finite value at " + p.str());
    return v;
  }
};

// ---------------------------------------------------------------------------
// Default numerical parameters (the defaults table; mirrored in README.md)
// ---------------------------------------------------------------------------

namespace defaults {

// Finite-difference steps, scaled by max(1, |p|).
inline constexpr double fd_step_first = 1e-5;
// Second derivatives use a larger step: the 4-point mixed stencil loses
// ~eps/h^2 to cancellation, and 1e-4 sits at the double-precision optimum.
inline constexpr double fd_step_second = 1e-4;
inline constexpr double fd_step_third = 1e-3;

// Sigma_L membership threshold on Hess_r(L, L).
inline constexpr double sigma_levi_threshold = 1e-8;
// Accepted slack on the "<= 0" feasibility inequalities.
inline constexpr double feasibility_slack = 1e-9;
// PSD tolerance on the prefactor-stripped frame matrix.
inline constexpr double psd_tolerance = 1e-7;
// Riccati blow-up cap on |s|.
inline constexpr double blow_up_cap = 1e8;
// Default bisection / reporting tolerance.
inline constexpr double tol = 1e-6;
// Default weight-family angle.
inline constexpr double theta = kPi / 2;

// Richardson schedule for normal limits: 1e-2 * 2^{-k}, k = 0..6.
inline std::vector<double> richardson_depths() {
  std::vector<double> d;
  double t = 1e-2;
  for (int k = 0; k <= 6; ++k, t *= 0.5) d.push_back(t);
  return d;
}

// Interior sampling depths for the PSH verifier.
inline std::vector<double> psh_depths() { return {1e-2, 3e-3, 1e-3, 3e-4, 1e-4}; }

}  // namespace defaults

inline double fd_scale(const CPoint& p) { return std::max(1.0, p.norm()); }

inline double fd_scale(const ScalarField& f, const CPoint& p) {
  return f.step_scale ? f.step_scale(p) : fd_scale(p);
}

}  // namespace dfx
