// The hypersurface index criterion. At a Levi-degenerate boundary point p
// (Hess_r(L, L) = 0) with the global C^2 tangent field L and normal N = N_r,
// the criterion value at exponent eta (alpha = 1/(1-eta) - 1) is
//
//   alpha |(conj(L)psi)(N r) + Hess_r(N, L)|^2
//     + (||grad r||/2) [ (||grad r||/2) Hess_psi(L, L)
//                        + g(grad_L grad_N grad r, L)
//                        + ||grad r|| L(1/||grad r||) Hess_r(N, L) ],
//
// and eta is admissible for the weight psi iff the value is <= 0 on the
// Levi-flat set. On the worm annulus (w = rho e^{i phi}) the same value in
// polar coordinates is
//
//   alpha f_r^2/4 + alpha f_phi^2/(4 r^2) + alpha/r^2 - alpha f_phi/r^2
//     + f_rr/4 + f_r/(4 r) + f_phiphi/(4 r^2).

#pragma once

#include <optional>

#include "dfx/domains.hpp"
#include "dfx/exponents.hpp"
#include "dfx/riccati.hpp"
#include "dfx/weight.hpp"

namespace dfx {

// ---------------------------------------------------------------------------
// criterion_general
// ---------------------------------------------------------------------------

// Evaluates the criterion at a boundary point p in Sigma_L of a C^2 domain.
// All terms are assembled from the core calculus; the third-order term and
// L(1/||grad r||) are finite-differenced along L.
inline double criterion_general(const DomainSpec& spec, const Weight& psi,
                                double eta, const CPoint& p) {
  if (p.dim() != 2)
    throw DimensionError("criterion_general: the global tangent field needs C^2");
  const ScalarField& r = spec.r;
  double rv = r(p);
  if (std::abs(rv) > 1e-10)
    throw PreconditionError("criterion_general: point is not on the boundary (r = " +
                            std::to_string(rv) + ")");
  const double alpha = alpha_from_eta(eta);

  Field1_0 l = tangent_field_c2(r, p);
  Field1_0 nrm = normal_field(r, p);
  HermMatrix hr = complex_hessian(r, p);
  double hll = hess_pair(hr, l, l).real();
  if (!(hll <= defaults::sigma_levi_threshold))
    throw PreconditionError(
        "criterion_general: Hess_r(L, L) = " + std::to_string(hll) +
        " exceeds the Sigma_L threshold; the criterion constrains only the "
        "Levi-degenerate set");

  std::vector<Cx> g = wirtinger_grad(r, p);
  double sq = 0;
  for (const Cx& v : g) sq += std::norm(v);
  const double half_grad = std::sqrt(sq);  // = ||grad r|| / 2 = N_r r

  std::vector<Cx> gpsi = psi.field.has_grad()
                             ? psi.field.grad(p)
                             : wirtinger_grad(psi.field, p);
  Cx l_psi = l[0] * gpsi[0] + l[1] * gpsi[1];
  Cx lbar_psi = std::conj(l_psi);  // psi is real

  Cx hnl = hess_pair(hr, nrm, l);
  HermMatrix hpsi = complex_hessian(psi.field, p);
  double hpsi_ll = hess_pair(hpsi, l, l).real();

  FieldFn n_field = [&r](const CPoint& q) { return normal_field(r, q); };
  FieldFn l_field = [&r](const CPoint& q) { return tangent_field_c2(r, q); };
  double h3 = defaults::fd_step_third * fd_scale(r, p);
  Cx d3 = third_order(r, n_field, l_field, p, h3);

  // ||grad r|| L(1/||grad r||), by FD of 1/||grad r|| along L.
  auto inv_grad_norm = [&r](const CPoint& q) {
    return Cx(1.0 / grad_norm(r, q), 0.0);
  };
  double h1 = defaults::fd_step_first * fd_scale(r, p);
  Cx l_inv = directional_wirtinger(inv_grad_norm, p, l.components, h1);

  Cx bracket = half_grad * hpsi_ll + d3 + 2.0 * half_grad * l_inv * hnl;
  return alpha * std::norm(lbar_psi * half_grad + hnl) +
         half_grad * bracket.real();
}

// ---------------------------------------------------------------------------
// criterion_worm
// ---------------------------------------------------------------------------

// The worm specialization in polar coordinates on the annulus. `rr` is |w|,
// phi = arg w; log rr must lie in [pi/4 - beta/2, beta/2 - pi/4].
inline double criterion_worm(const WormParams& params, const Weight& psi_polar,
                             double alpha, double rr, double phi) {
  if (!(alpha > 0)) throw PreconditionError("criterion_worm: alpha must be positive");
  if (!psi_polar.has_polar)
    throw PreconditionError("criterion_worm: weight has no polar view");
  const double span = params.beta / 2 - kPi / 4;
  const double lr = std::log(rr);
  if (!(lr >= -span - 1e-12 && lr <= span + 1e-12))
    throw PreconditionError("criterion_worm: log r = " + std::to_string(lr) +
                            " outside the annulus range [" + std::to_string(-span) +
                            ", " + std::to_string(span) + "]");
  const PolarFn& f = psi_polar.polar;
  const double fr = f.d_r(rr, phi);
  const double fp = f.d_phi(rr, phi);
  const double frr = f.d_rr(rr, phi);
  const double fpp = f.d_phiphi(rr, phi);
  const double r2 = rr * rr;
  return alpha * fr * fr / 4 + alpha * fp * fp / (4 * r2) + alpha / r2 -
         alpha * fp / r2 + frr / 4 + fr / (4 * rr) + fpp / (4 * r2);
}

// ---------------------------------------------------------------------------
// perturb_weight
// ---------------------------------------------------------------------------

// psi~ = psi + (mu/2) ||z||^2 (z the full point of C^2). The quadratic term
// has complex Hessian (mu/2) I, so Hess_psi(L, L) shifts by exactly mu/2 for
// the normalized tangent field; on Sigma the polar view gains (mu/2) r^2.
inline Weight perturb_weight(const Weight& psi, double mu) {
  if (mu == 0) return psi;
  Weight out = psi;
  out.mu = psi.mu + mu;
  out.family = psi.family + "+quad";

  ScalarField base = psi.field;
  out.field.name = base.name + "+mu/2|z|^2";
  out.field.step_scale = base.step_scale;
  out.field.value = [base, mu](const CPoint& p) {
    double n2 = 0;
    for (const Cx& z : p.coords) n2 += std::norm(z);
    return base.value(p) + 0.5 * mu * n2;
  };
  if (base.has_grad()) {
    out.field.grad = [base, mu](const CPoint& p) {
      std::vector<Cx> g = base.grad(p);
      for (std::size_t j = 0; j < p.dim(); ++j) g[j] += 0.5 * mu * std::conj(p[j]);
      return g;
    };
  } else {
    out.field.grad = nullptr;
  }
  if (base.has_hessian()) {
    out.field.hessian = [base, mu](const CPoint& p) {
      HermMatrix h = base.hessian(p);
      for (std::size_t j = 0; j < h.n; ++j) h.at(j, j) += 0.5 * mu;
      return h;
    };
  } else {
    out.field.hessian = nullptr;
  }

  if (psi.has_polar) {
    PolarFn base_polar = psi.polar;
    PolarFn f;
    f.value = [base_polar, mu](double r, double p) {
      return base_polar.eval(r, p) + 0.5 * mu * r * r;
    };
    f.dr = [base_polar, mu](double r, double p) {
      return base_polar.d_r(r, p) + mu * r;
    };
    f.drr = [base_polar, mu](double r, double p) {
      return base_polar.d_rr(r, p) + mu;
    };
    f.dphi = [base_polar](double r, double p) { return base_polar.d_phi(r, p); };
    f.dphiphi = [base_polar](double r, double p) {
      return base_polar.d_phiphi(r, p);
    };
    out.polar = f;
  }
  return out;
}

// ---------------------------------------------------------------------------
// radial_average_reduce
// ---------------------------------------------------------------------------

struct SigmaSamples {
  std::vector<double> log_r;              // uniform, increasing
  std::vector<double> phi;                // uniform on [0, 2pi)
  std::vector<std::vector<double>> f;     // f[i][j] = f(exp(log_r[i]), phi[j])
};

struct RadialResidual {
  std::vector<double> r;  // radii where the residual is defined
  std::vector<double> R;  // s' + alpha s^2 + s/r + 4 alpha / r^2
  std::vector<double> F;  // the angular average at those radii
  std::vector<double> s;  // F_r
};

// Angular averaging of a weight sampled on a regular (log r, phi) grid:
// F(r) = (1/2pi) integral f dphi by the (periodic) trapezoid rule, s = F_r by
// central differences, and the radial Riccati residual. If the pointwise
// polar criterion is <= 0 on the grid, the residual is <= grid tolerance.
inline RadialResidual radial_average_reduce(const SigmaSamples& samples,
                                            double alpha) {
  const std::size_t nr = samples.log_r.size();
  const std::size_t np = samples.phi.size();
  if (nr < 5 || np < 2)
    throw PreconditionError("radial_average_reduce: grid too small");
  const double dlr = samples.log_r[1] - samples.log_r[0];
  for (std::size_t i = 1; i < nr; ++i)
    if (std::abs(samples.log_r[i] - samples.log_r[i - 1] - dlr) > 1e-9 * std::abs(dlr))
      throw PreconditionError("radial_average_reduce: log r grid is not uniform");
  for (std::size_t j = 1; j < np; ++j)
    if (std::abs(samples.phi[j] - samples.phi[j - 1] - 2 * kPi / np) > 1e-9)
      throw PreconditionError("radial_average_reduce: phi grid is not uniform");

  // Periodic trapezoid = plain mean on the uniform angular grid.
  std::vector<double> F(nr);
  for (std::size_t i = 0; i < nr; ++i) {
    if (samples.f[i].size() != np)
      throw PreconditionError("radial_average_reduce: ragged sample grid");
    double s = 0;
    for (double v : samples.f[i]) s += v;
    F[i] = s / np;
  }

  // s = F_r = dF/dlog r / r; s' needs one more stencil level.
  std::vector<double> rr(nr), s(nr, 0.0);
  for (std::size_t i = 0; i < nr; ++i) rr[i] = std::exp(samples.log_r[i]);
  for (std::size_t i = 1; i + 1 < nr; ++i)
    s[i] = (F[i + 1] - F[i - 1]) / (2 * dlr) / rr[i];

  RadialResidual out;
  for (std::size_t i = 2; i + 2 < nr; ++i) {
    double sp = (s[i + 1] - s[i - 1]) / (2 * dlr) / rr[i];
    double res = sp + alpha * s[i] * s[i] + s[i] / rr[i] +
                 4 * alpha / (rr[i] * rr[i]);
    out.r.push_back(rr[i]);
    out.R.push_back(res);
    out.F.push_back(F[i]);
    out.s.push_back(s[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Criterion sweeps and reports
// ---------------------------------------------------------------------------

struct CriterionReport {
  std::vector<CPoint> points;
  std::vector<double> values;
  double max_value = -std::numeric_limits<double>::infinity();
  std::size_t argmax = 0;
  double margin = 0;         // -max_value
  int skipped = 0;           // points outside Sigma_L
  bool vacuous = false;      // no point qualified
  std::string grid_info;

  bool feasible(double slack = defaults::feasibility_slack) const {
    return vacuous || max_value <= slack;
  }
};

// Evaluates criterion_general over a set of boundary points; points outside
// Sigma_L are skipped. An empty qualifying set is a vacuous pass.
inline CriterionReport criterion_sweep_general(const DomainSpec& spec,
                                               const Weight& psi, double eta,
                                               const std::vector<CPoint>& pts) {
  CriterionReport rep;
  for (const CPoint& p : pts) {
    double v;
    try {
      v = criterion_general(spec, psi, eta, p);
    } catch (const PreconditionError&) {
      ++rep.skipped;
      continue;
    }
    rep.points.push_back(p);
    rep.values.push_back(v);
    if (v > rep.max_value) {
      rep.max_value = v;
      rep.argmax = rep.values.size() - 1;
    }
  }
  if (rep.values.empty()) {
    rep.vacuous = true;
    rep.max_value = 0;
  }
  rep.margin = -rep.max_value;
  return rep;
}

// Polar-grid sweep of criterion_worm.
struct WormCriterionRow {
  double r, phi, value;
};

struct WormCriterionReport {
  std::vector<WormCriterionRow> rows;
  double max_value = -std::numeric_limits<double>::infinity();
  double argmax_r = 0, argmax_phi = 0;

  bool feasible(double slack = defaults::feasibility_slack) const {
    return max_value <= slack;
  }
};

inline WormCriterionReport criterion_sweep_worm(const WormParams& params,
                                                const Weight& psi, double alpha,
                                                int n_r, int n_phi) {
  if (n_r < 2 || n_phi < 1)
    throw PreconditionError("criterion_sweep_worm: grid too small");
  WormCriterionReport rep;
  const double span = params.beta / 2 - kPi / 4;
  for (int i = 0; i < n_r; ++i) {
    double lr = -span + 2 * span * i / (n_r - 1);
    double rr = std::exp(lr);
    for (int j = 0; j < n_phi; ++j) {
      double phi = 2 * kPi * j / n_phi;
      double v = criterion_worm(params, psi, alpha, rr, phi);
      rep.rows.push_back({rr, phi, v});
      if (v > rep.max_value) {
        rep.max_value = v;
        rep.argmax_r = rr;
        rep.argmax_phi = phi;
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// sup_index_search
// ---------------------------------------------------------------------------

// A parametric weight family exposing a feasibility oracle: given eta, search
// the family parameters for a weight whose max-over-Sigma criterion is within
// slack of nonpositive.
struct WeightFamily {
  std::string name;
  std::function<std::optional<Weight>(double eta)> feasible_witness;
};

// The radial Riccati family {theta, alpha_psi, mu} on the worm annulus.
// Feasibility at eta is decided by building the radial weight at
// alpha_psi = alpha(eta) (infeasible build => no witness) and checking the
// polar criterion on the grid; a slightly mu-perturbed variant is tried as a
// fallback for extra margin.
inline WeightFamily worm_radial_family(const WormParams& params, int n_r = 64,
                                       int n_phi = 8) {
  WeightFamily fam;
  fam.name = "worm-radial-riccati";
  fam.feasible_witness = [params, n_r, n_phi](double eta) -> std::optional<Weight> {
    double alpha = alpha_from_eta(eta);
    for (double mu : {0.0, -0.05}) {
      Weight w;
      try {
        w = build_psi_radial(alpha, defaults::theta, params.beta);
      } catch (const InfeasibleError&) {
        return std::nullopt;
      }
      if (mu != 0) w = perturb_weight(w, mu);
      WormCriterionReport rep = criterion_sweep_worm(params, w, alpha, n_r, n_phi);
      if (rep.feasible()) return w;
    }
    return std::nullopt;
  };
  return fam;
}

struct SupSearchOptions {
  double tol = 2e-3;
  double eta_hi = 0.995;  // upper bisection limit
  double eta_lo = 1e-3;
};

struct SupSearchResult {
  double eta_star = 0;
  Weight witness;
  bool vacuous = false;
  std::string diagnostic;
};

// Bisection on eta: the criterion coefficient alpha(eta) is increasing and
// multiplies a nonnegative modulus, so feasibility is monotone (feasible at
// eta implies feasible below). Domains with empty Sigma pass vacuously at the
// upper limit.
inline SupSearchResult sup_index_search(const DomainSpec& spec,
                                        const WeightFamily& family,
                                        const SupSearchOptions& opts = {}) {
  SupSearchResult res;
  if (!spec.has_sigma()) {
    res.eta_star = opts.eta_hi;
    res.vacuous = true;
    res.witness = zero_weight();
    res.diagnostic = "Sigma empty: every eta passes vacuously; reporting the upper bisection limit";
    return res;
  }
  double lo = opts.eta_lo, hi = opts.eta_hi;
  auto lo_w = family.feasible_witness(lo);
  if (!lo_w) {
    res.eta_star = 0;
    res.diagnostic = "family infeasible at every tested eta";
    return res;
  }
  res.witness = *lo_w;
  if (auto hi_w = family.feasible_witness(hi)) {
    res.eta_star = hi;
    res.witness = *hi_w;
    res.diagnostic = "feasible at the upper bisection limit";
    return res;
  }
  while (hi - lo > opts.tol) {
    double mid = 0.5 * (lo + hi);
    if (auto w = family.feasible_witness(mid)) {
      lo = mid;
      res.witness = *w;
    } else {
      hi = mid;
    }
  }
  res.eta_star = lo;
  return res;
}

}  // namespace dfx
