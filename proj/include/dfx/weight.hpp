// Boundary weights psi for the hypersurface index criterion. A Weight carries
// a scalar field on C^2 (with derivative callbacks) together with a polar
// view f(r, phi) on the Levi-flat annulus {(0, w)}: the field is the
// z-independent extension psi(z, w) = f(|w|, arg w).

#pragma once

#include "dfx/calculus.hpp"

namespace dfx {

// A function of polar coordinates (r, phi) with optional analytic partial
// derivatives; missing partials fall back to central differences.
struct PolarFn {
  std::function<double(double, double)> value;
  std::function<double(double, double)> dr, dphi, drr, dphiphi;

  double eval(double r, double phi) const { return value(r, phi); }

  double d_r(double r, double phi) const {
    if (dr) return dr(r, phi);
    double h = 1e-5 * std::max(1.0, std::abs(r));
    return (value(r + h, phi) - value(r - h, phi)) / (2 * h);
  }
  double d_phi(double r, double phi) const {
    if (dphi) return dphi(r, phi);
    double h = 1e-5;
    return (value(r, phi + h) - value(r, phi - h)) / (2 * h);
  }
  double d_rr(double r, double phi) const {
    if (drr) return drr(r, phi);
    double h = 1e-4 * std::max(1.0, std::abs(r));
    return (value(r + h, phi) - 2 * value(r, phi) + value(r - h, phi)) / (h * h);
  }
  double d_phiphi(double r, double phi) const {
    if (dphiphi) return dphiphi(r, phi);
    double h = 1e-4;
    return (value(r, phi + h) - 2 * value(r, phi) + value(r, phi - h)) / (h * h);
  }
};

struct Weight {
  ScalarField field;  // psi on (a neighborhood of Sigma in) C^2
  PolarFn polar;      // f(|w|, arg w) when the weight is z-independent
  bool has_polar = false;

  // Family descriptor.
  std::string family = "custom";
  double alpha_psi = 0;  // Riccati parameter the radial weight was built at
  double theta = 0;      // phase of the cotangent argument
  double mu = 0;         // quadratic perturbation strength

  std::string descriptor() const {
    std::ostringstream os;
    os << family << "(alpha_psi=" << alpha_psi << ", theta=" << theta
       << ", mu=" << mu << ")";
    return os.str();
  }
};

// psi == 0 with exact callbacks.
inline Weight zero_weight() {
  Weight w;
  w.field = ScalarField{
      [](const CPoint&) { return 0.0; },
      [](const CPoint& p) { return std::vector<Cx>(p.dim(), Cx(0, 0)); },
      [](const CPoint& p) { return HermMatrix(p.dim()); },
      "psi=0",
      nullptr};
  w.polar = PolarFn{[](double, double) { return 0.0; },
                    [](double, double) { return 0.0; },
                    [](double, double) { return 0.0; },
                    [](double, double) { return 0.0; },
                    [](double, double) { return 0.0; }};
  w.has_polar = true;
  w.family = "zero";
  return w;
}

// The z-independent extension of a polar function to C^2:
//   psi(z, w) = f(|w|, arg w),
//   dpsi/dw = (e^{-i phi}/2) (f_r - i f_phi / |w|),
//   d2psi/dw dconj(w) = (f_rr + f_r/|w| + f_phiphi/|w|^2) / 4.
inline Weight weight_from_polar(PolarFn f, const std::string& family = "polar") {
  Weight w;
  w.polar = f;
  w.has_polar = true;
  w.family = family;

  auto val = [f](const CPoint& p) {
    if (p.dim() != 2) throw DimensionError("weight: expected a point of C^2");
    return f.eval(std::abs(p[1]), std::arg(p[1]));
  };
  auto grad = [f](const CPoint& p) {
    double r = std::abs(p[1]), phi = std::arg(p[1]);
    std::vector<Cx> g(2, Cx(0, 0));
    g[1] = 0.5 * std::polar(1.0, -phi) *
           Cx(f.d_r(r, phi), -f.d_phi(r, phi) / r);
    return g;
  };
  auto hess = [f](const CPoint& p) {
    double r = std::abs(p[1]), phi = std::arg(p[1]);
    HermMatrix h(2);
    h.at(1, 1) =
        0.25 * (f.d_rr(r, phi) + f.d_r(r, phi) / r + f.d_phiphi(r, phi) / (r * r));
    return h;
  };
  w.field = ScalarField{val, grad, hess, "psi[" + family + "]", nullptr};
  return w;
}

// rho = r e^psi with combined analytic callbacks (used by the PSH verifier
// and the normal-limit identities).
inline ScalarField rho_from(const ScalarField& r, const ScalarField& psi) {
  auto val = [r, psi](const CPoint& p) { return r.value(p) * std::exp(psi.value(p)); };
  std::function<std::vector<Cx>(const CPoint&)> grad;
  std::function<HermMatrix(const CPoint&)> hess;
  if (r.has_grad() && psi.has_grad()) {
    grad = [r, psi](const CPoint& p) {
      double rv = r.value(p);
      double e = std::exp(psi.value(p));
      std::vector<Cx> gr = r.grad(p), gp = psi.grad(p);
      std::vector<Cx> g(p.dim());
      for (std::size_t j = 0; j < p.dim(); ++j) g[j] = e * (gr[j] + rv * gp[j]);
      return g;
    };
  }
  if (r.has_grad() && psi.has_grad() && r.has_hessian() && psi.has_hessian()) {
    hess = [r, psi](const CPoint& p) {
      double rv = r.value(p);
      double e = std::exp(psi.value(p));
      std::vector<Cx> gr = r.grad(p), gp = psi.grad(p);
      HermMatrix hr = complex_hessian(r, p);
      HermMatrix hp = complex_hessian(psi, p);
      HermMatrix h(p.dim());
      for (std::size_t j = 0; j < p.dim(); ++j)
        for (std::size_t k = 0; k < p.dim(); ++k) {
          Cx gpk = std::conj(gp[k]);  // dpsi/dconj(z_k)
          Cx grk = std::conj(gr[k]);
          h.at(j, k) = e * (hr.at(j, k) + gr[j] * gpk + gp[j] * grk +
                            rv * (hp.at(j, k) + gp[j] * gpk));
        }
      return h;
    };
  }
  ScalarField out;
  out.value = val;
  out.grad = grad;
  out.hessian = hess;
  out.name = "rho[" + r.name + "*e^" + psi.name + "]";
  out.step_scale = r.step_scale;
  return out;
}

}  // namespace dfx
