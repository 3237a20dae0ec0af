// Catalog of concrete defining functions: the beta-worm domain with a
// concrete C^3 cutoff, plus sanity domains (balls/ellipsoids), all with
// analytic gradient and Hessian callbacks and exact boundary samplers.
//
// The worm is
//   r(z, w) = |z - e^{i log|w|^2}|^2 - 1 + chi(log|w|^2),   w != 0,
// and its Levi-flat boundary annulus is
//   Sigma = {(0, w) : |log|w|^2| <= beta - pi/2}.
// All derivative callbacks come from direct differentiation of r and are
// validated against central finite differences (see validate_defining).

#pragma once

#include <random>

#include "dfx/calculus.hpp"

namespace dfx {

// ---------------------------------------------------------------------------
// WormParams and the cutoff
// ---------------------------------------------------------------------------

struct WormParams {
  double beta;   // radians, > pi/2
  double a;      // cutoff knee, > x0
  int m = 4;     // cutoff exponent, >= 4 keeps chi C^3

  double x0() const { return beta - kPi / 2; }

  static WormParams make(double beta, double a = -1, int m = 4) {
    WormParams p;
    p.beta = beta;
    p.a = (a > 0) ? a : (beta - kPi / 2) + 1.0;
    p.m = m;
    if (!(p.beta > kPi / 2))
      throw PreconditionError("WormParams: beta must exceed pi/2");
    if (!(p.a > p.x0()))
      throw PreconditionError("WormParams: cutoff knee a must exceed beta - pi/2");
    if (p.m < 4) throw PreconditionError("WormParams: cutoff exponent must be >= 4");
    return p;
  }
};

struct CutoffEval {
  double value;
  double d1;
  double d2;
};

// chi(x) = ((|x| - x0)_+ / (a - x0))^m: even, convex, C^3 (m >= 4),
// chi^{-1}(0) = [-x0, x0], chi(a) = 1 with chi'(a) != 0, chi > 1 beyond a.
inline CutoffEval cutoff_chi(const WormParams& p, double x) {
  const double x0 = p.x0();
  const double d = p.a - x0;
  const double s = (std::abs(x) - x0) / d;
  if (s <= 0) return {0.0, 0.0, 0.0};
  const double sgn = (x >= 0) ? 1.0 : -1.0;
  const int m = p.m;
  double sm2 = std::pow(s, m - 2);
  double v = sm2 * s * s;
  double d1 = m * sm2 * s / d * sgn;
  double d2 = m * (m - 1) * sm2 / (d * d);
  return {v, d1, d2};
}

// ---------------------------------------------------------------------------
// DomainSpec
// ---------------------------------------------------------------------------

using Rng = std::mt19937_64;

struct DomainSpec {
  std::string name;
  ScalarField r;
  CPoint interior_witness;
  // Parametrization of the Levi-flat set, when the domain has one; empty
  // vector means Sigma is empty (strongly pseudoconvex catalog domains).
  std::function<std::vector<CPoint>(int, int)> sigma_grid;
  // Draws an exact boundary point (r = 0 by construction).
  std::function<CPoint(Rng&)> boundary_sample;
  // Per-coordinate modulus ranges enclosing the closure of the domain.
  std::vector<std::pair<double, double>> modulus_box;

  bool has_sigma() const { return static_cast<bool>(sigma_grid); }
};

// ---------------------------------------------------------------------------
// Worm domain
// ---------------------------------------------------------------------------

namespace detail {

inline void require_w_nonzero(const CPoint& p, const std::string& who) {
  if (p.dim() != 2) throw DimensionError(who + ": worm lives in C^2");
  if (std::abs(p[1]) < 1e-300)
    throw EvaluationError(who + ": w = 0 is outside the worm's evaluation domain");
}

}  // namespace detail

// Points (0, w) with log|w| uniform on [pi/4 - beta/2, beta/2 - pi/4]
// (endpoints included) and arg w uniform on [0, 2pi). Every returned point
// satisfies r = 0 exactly: z = 0 and chi vanishes on the band.
inline std::vector<CPoint> worm_sigma_grid(const WormParams& params, int n_r,
                                           int n_phi) {
  if (n_r < 2) throw PreconditionError("worm_sigma_grid: need n_r >= 2");
  if (n_phi < 1) throw PreconditionError("worm_sigma_grid: need n_phi >= 1");
  const double lo = kPi / 4 - params.beta / 2;
  const double hi = params.beta / 2 - kPi / 4;
  std::vector<CPoint> pts;
  pts.reserve(static_cast<std::size_t>(n_r) * n_phi);
  for (int i = 0; i < n_r; ++i) {
    double lr = lo + (hi - lo) * i / (n_r - 1);
    double rad = std::exp(lr);
    for (int j = 0; j < n_phi; ++j) {
      double phi = 2 * kPi * j / n_phi;
      pts.emplace_back(Cx(0, 0), std::polar(rad, phi));
    }
  }
  return pts;
}

inline DomainSpec worm_defining(const WormParams& params) {
  DomainSpec spec;
  spec.name = "worm";

  auto value = [params](const CPoint& p) {
    detail::require_w_nonzero(p, "worm r");
    const Cx z = p[0], w = p[1];
    const double t = std::log(std::norm(w));
    const Cx e = std::polar(1.0, t);
    return std::norm(z - e) - 1.0 + cutoff_chi(params, t).value;
  };

  auto grad = [params](const CPoint& p) {
    detail::require_w_nonzero(p, "worm grad");
    const Cx z = p[0], w = p[1];
    const double t = std::log(std::norm(w));
    const Cx e = std::polar(1.0, t);
    const CutoffEval c = cutoff_chi(params, t);
    // dr/dz = conj(z) - conj(e); dr/dw = (-2 Im(z conj(e)) + chi'(t)) / w.
    std::vector<Cx> g(2);
    g[0] = std::conj(z) - std::conj(e);
    g[1] = (-2.0 * std::imag(z * std::conj(e)) + c.d1) / w;
    return g;
  };

  auto hessian = [params](const CPoint& p) {
    detail::require_w_nonzero(p, "worm hessian");
    const Cx z = p[0], w = p[1];
    const double t = std::log(std::norm(w));
    const Cx e = std::polar(1.0, t);
    const CutoffEval c = cutoff_chi(params, t);
    HermMatrix h(2);
    h.at(0, 0) = 1.0;
    h.at(0, 1) = Cx(0, 1) * std::conj(e) / std::conj(w);
    h.at(1, 0) = std::conj(h.at(0, 1));
    h.at(1, 1) = (2.0 * std::real(z * std::conj(e)) + c.d2) / std::norm(w);
    return h;
  };

  spec.r = ScalarField{value, grad, hessian, "worm",
                       [](const CPoint& p) {
                         return std::min(fd_scale(p), std::abs(p[1]));
                       }};
  spec.interior_witness = CPoint(Cx(0.5, 0), Cx(1, 0));  // r = -0.75
  spec.sigma_grid = [params](int nr, int nphi) {
    return worm_sigma_grid(params, nr, nphi);
  };
  spec.boundary_sample = [params](Rng& rng) {
    // r = 0 by construction: |z - e|^2 = 1 - chi(t) with chi(t) <= 1.
    std::uniform_real_distribution<double> ut(-0.999 * params.a, 0.999 * params.a);
    std::uniform_real_distribution<double> uang(0.0, 2 * kPi);
    double t = ut(rng);
    double phi = uang(rng);
    double sigma = uang(rng);
    Cx w = std::polar(std::exp(t / 2), phi);
    Cx e = std::polar(1.0, t);
    Cx z = e + std::polar(std::sqrt(1.0 - cutoff_chi(params, t).value), sigma);
    return CPoint(z, w);
  };
  spec.modulus_box = {{0.0, 2.0}, {std::exp(-params.a / 2), std::exp(params.a / 2)}};
  return spec;
}

// ---------------------------------------------------------------------------
// Balls and ellipsoids
// ---------------------------------------------------------------------------

// r = sum |z_j / R_j|^2 - 1 with exact callbacks; Sigma is empty.
inline DomainSpec ball_defining(const std::vector<double>& radii) {
  if (radii.size() < 2)
    throw PreconditionError("ball_defining: need at least 2 radii");
  for (double rr : radii)
    if (!(rr > 0)) throw PreconditionError("ball_defining: radii must be positive");
  const std::size_t n = radii.size();
  bool round = true;
  for (double rr : radii) round = round && (rr == radii[0]);

  DomainSpec spec;
  spec.name = round ? "ball" : "ellipsoid";
  auto value = [radii](const CPoint& p) {
    double s = -1.0;
    for (std::size_t j = 0; j < radii.size(); ++j)
      s += std::norm(p[j]) / (radii[j] * radii[j]);
    return s;
  };
  auto grad = [radii](const CPoint& p) {
    std::vector<Cx> g(radii.size());
    for (std::size_t j = 0; j < radii.size(); ++j)
      g[j] = std::conj(p[j]) / (radii[j] * radii[j]);
    return g;
  };
  auto hessian = [radii, n](const CPoint&) {
    HermMatrix h(n);
    for (std::size_t j = 0; j < n; ++j) h.at(j, j) = 1.0 / (radii[j] * radii[j]);
    return h;
  };
  spec.r = ScalarField{value, grad, hessian, spec.name, nullptr};
  spec.interior_witness = CPoint(std::vector<Cx>(n, Cx(0, 0)));
  spec.sigma_grid = nullptr;  // strongly pseudoconvex: Sigma empty
  spec.boundary_sample = [radii, n](Rng& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Cx> u(n);
    double s = 0;
    do {
      s = 0;
      for (std::size_t j = 0; j < n; ++j) {
        u[j] = Cx(gauss(rng), gauss(rng));
        s += std::norm(u[j]);
      }
    } while (s < 1e-12);
    s = std::sqrt(s);
    for (std::size_t j = 0; j < n; ++j) u[j] *= radii[j] / s;
    return CPoint(u);
  };
  for (double rr : radii) spec.modulus_box.push_back({0.0, rr});
  return spec;
}

// ---------------------------------------------------------------------------
// validate_defining
// ---------------------------------------------------------------------------

struct ValidationReport {
  std::string domain;
  int samples = 0;
  bool interior_ok = false;
  int degenerate_gradients = 0;
  double max_rel_grad_err = 0;
  double max_rel_hess_err = 0;
  std::vector<std::string> failures;

  bool pass() const { return failures.empty(); }
};

// Empirical check of the defining-function conditions: negativity at the
// interior witness, nonvanishing boundary gradient, and agreement of the
// analytic callbacks with central finite differences to relative 1e-6.
inline ValidationReport validate_defining(const DomainSpec& spec, int n_samples,
                                          unsigned long long seed = 42) {
  if (n_samples < 1)
    throw PreconditionError("validate_defining: need n_samples >= 1");
  ValidationReport rep;
  rep.domain = spec.name;
  rep.samples = n_samples;

  double rv = spec.r(spec.interior_witness);
  rep.interior_ok = rv < 0;
  if (!rep.interior_ok)
    rep.failures.push_back("interior witness has r = " + std::to_string(rv));

  ScalarField value_only{spec.r.value, nullptr, nullptr, spec.r.name + "(fd)",
                         spec.r.step_scale};
  Rng rng(seed);
  for (int i = 0; i < n_samples; ++i) {
    CPoint p = spec.boundary_sample(rng);
    double r0 = spec.r(p);
    if (std::abs(r0) > 1e-9)
      rep.failures.push_back("boundary sample has |r| = " + std::to_string(std::abs(r0)));

    std::vector<Cx> ga = spec.r.grad ? spec.r.grad(p) : wirtinger_grad(spec.r, p);
    double gn = 0;
    for (const Cx& v : ga) gn += std::norm(v);
    gn = std::sqrt(gn);
    if (gn < 1e-8) {
      ++rep.degenerate_gradients;
      rep.failures.push_back("vanishing gradient at " + p.str());
      continue;
    }

    if (spec.r.grad) {
      std::vector<Cx> gf = wirtinger_grad(value_only, p);
      double err = 0;
      for (std::size_t j = 0; j < ga.size(); ++j)
        err = std::max(err, std::abs(ga[j] - gf[j]));
      double rel = err / std::max(1.0, gn);
      rep.max_rel_grad_err = std::max(rep.max_rel_grad_err, rel);
      if (rel > 1e-6)
        rep.failures.push_back("gradient FD mismatch " + std::to_string(rel) +
                               " at " + p.str());
    }
    if (spec.r.hessian) {
      HermMatrix ha = spec.r.hessian(p);
      HermMatrix hf = complex_hessian(value_only, p);
      double err = 0;
      for (std::size_t j = 0; j < ha.n; ++j)
        for (std::size_t k = 0; k < ha.n; ++k)
          err = std::max(err, std::abs(ha.at(j, k) - hf.at(j, k)));
      double rel = err / std::max(1.0, ha.max_abs());
      rep.max_rel_hess_err = std::max(rep.max_rel_hess_err, rel);
      if (rel > 1e-6)
        rep.failures.push_back("hessian FD mismatch " + std::to_string(rel) +
                               " at " + p.str());
    }
  }
  return rep;
}

}  // namespace dfx
