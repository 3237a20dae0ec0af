// Complex differential calculus on scalar fields: Wirtinger gradients and
// complex Hessians by central differences (or analytic callbacks), normal and
// tangent (1,0) frames, the third-order term g(grad_L grad_N grad r, L),
// Richardson-extrapolated normal boundary limits, and Hermitian eigenvalue
// certificates.

#pragma once

#include <limits>
#include <optional>

#include "dfx/types.hpp"

namespace dfx {

namespace detail {

// Value of f at p displaced by s along the real coordinate direction
// (re = true: x_j, re = false: y_j).
inline double eval_shift(const ScalarField& f, const CPoint& p, std::size_t j,
                         bool re, double s) {
  CPoint q = p;
  q[j] += re ? Cx(s, 0) : Cx(0, s);
  double v = f.value(q);
  if (!std::isfinite(v)) {
    throw EvaluationError("field '" + f.name + "': non-finite sample while differencing coordinate z_" +
                          std::to_string(j + 1) + " near " + p.str());
  }
  return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// wirtinger_grad
// ---------------------------------------------------------------------------

// Central-difference Wirtinger derivatives df/dz_j = (df/dx_j - i df/dy_j)/2.
// Uses the analytic gradient callback when the field has one.
inline std::vector<Cx> wirtinger_grad(const ScalarField& f, const CPoint& p,
                                      double h) {
  if (h <= 0) throw PreconditionError("wirtinger_grad: step must be positive");
  if (f.has_grad()) return f.grad(p);
  std::vector<Cx> g(p.dim());
  for (std::size_t j = 0; j < p.dim(); ++j) {
    double fx = (detail::eval_shift(f, p, j, true, h) -
                 detail::eval_shift(f, p, j, true, -h)) /
                (2 * h);
    double fy = (detail::eval_shift(f, p, j, false, h) -
                 detail::eval_shift(f, p, j, false, -h)) /
                (2 * h);
    g[j] = Cx(fx, -fy) * 0.5;
  }
  return g;
}

inline std::vector<Cx> wirtinger_grad(const ScalarField& f, const CPoint& p) {
  return wirtinger_grad(f, p, defaults::fd_step_first * fd_scale(f, p));
}

// ---------------------------------------------------------------------------
// complex_hessian
// ---------------------------------------------------------------------------

// Hermitian-symmetrized matrix of mixed second Wirtinger derivatives
// d^2 f / dz_j dconj(z_k). Analytic callback preferred when present.
inline HermMatrix complex_hessian(const ScalarField& f, const CPoint& p,
                                  double h) {
  if (h <= 0) throw PreconditionError("complex_hessian: step must be positive");
  if (f.has_hessian()) {
    HermMatrix hm = f.hessian(p);
    hm.symmetrize();
    return hm;
  }
  const std::size_t n = p.dim();
  HermMatrix hm(n);
  const double f0 = f.value(p);
  if (!std::isfinite(f0))
    throw EvaluationError("field '" + f.name + "': non-finite value at " + p.str());

  auto ev = [&](std::size_t j, bool jre, double sj, std::size_t k, bool kre,
                double sk) {
    CPoint q = p;
    q[j] += jre ? Cx(sj, 0) : Cx(0, sj);
    q[k] += kre ? Cx(sk, 0) : Cx(0, sk);
    double v = f.value(q);
    if (!std::isfinite(v))
      throw EvaluationError("field '" + f.name + "': non-finite sample while differencing coordinate z_" +
                            std::to_string(j + 1) + " near " + p.str());
    return v;
  };
  // Pure second derivative along one real direction.
  auto d2 = [&](std::size_t j, bool re) {
    return (detail::eval_shift(f, p, j, re, h) - 2 * f0 +
            detail::eval_shift(f, p, j, re, -h)) /
           (h * h);
  };
  // Mixed second derivative along two distinct real directions.
  auto dmix = [&](std::size_t j, bool jre, std::size_t k, bool kre) {
    return (ev(j, jre, h, k, kre, h) - ev(j, jre, h, k, kre, -h) -
            ev(j, jre, -h, k, kre, h) + ev(j, jre, -h, k, kre, -h)) /
           (4 * h * h);
  };

  for (std::size_t j = 0; j < n; ++j) {
    hm.at(j, j) = 0.25 * (d2(j, true) + d2(j, false));
    for (std::size_t k = j + 1; k < n; ++k) {
      // 4 * d^2f/dz_j dcz_k = (f_xjxk + f_yjyk) + i (f_xjyk - f_yjxk)
      double re = dmix(j, true, k, true) + dmix(j, false, k, false);
      double im = dmix(j, true, k, false) - dmix(j, false, k, true);
      hm.at(j, k) = 0.25 * Cx(re, im);
      hm.at(k, j) = std::conj(hm.at(j, k));
    }
  }
  hm.symmetrize();
  return hm;
}

inline HermMatrix complex_hessian(const ScalarField& f, const CPoint& p) {
  return complex_hessian(f, p, defaults::fd_step_second * fd_scale(f, p));
}

// ---------------------------------------------------------------------------
// grad_norm
// ---------------------------------------------------------------------------

// ||grad f|| = 2 sqrt(sum |df/dz_j|^2).
inline double grad_norm(const ScalarField& f, const CPoint& p) {
  std::vector<Cx> g = wirtinger_grad(f, p);
  double s = 0;
  for (const Cx& v : g) s += std::norm(v);
  return 2.0 * std::sqrt(s);
}

// ---------------------------------------------------------------------------
// normal_field / tangent_field_c2
// ---------------------------------------------------------------------------

// N_r = (sum_j dr/dcz_j d/dz_j) / sqrt(sum_j |dr/dz_j|^2). Satisfies
// N_r r = ||grad r||/2; sqrt(2) N_r is a unit vector.
inline Field1_0 normal_field(const ScalarField& r, const CPoint& p) {
  std::vector<Cx> g = wirtinger_grad(r, p);
  double s2 = 0;
  for (const Cx& v : g) s2 += std::norm(v);
  double s = std::sqrt(s2);
  if (s < 1e-12 * fd_scale(p))
    throw DegeneratePointError("normal_field: vanishing gradient of '" + r.name +
                               "' at " + p.str());
  Field1_0 n;
  n.components.resize(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) n[j] = std::conj(g[j]) / s;
  // N_r r = ||grad r||/2 must hold by construction; a violation indicates a
  // broken gradient callback.
  Cx nr = 0;
  for (std::size_t j = 0; j < g.size(); ++j) nr += n[j] * g[j];
  if (std::abs(nr - s) > 1e-8 * std::max(1.0, s))
    throw EvaluationError("normal_field: N_r r != ||grad r||/2 at " + p.str());
  return n;
}

// The globally defined (1,0) tangent field of C^2:
// L = (r_w d/dz - r_z d/dw) / sqrt(|r_z|^2 + |r_w|^2).
// L r = 0 identically and sum |L_j|^2 = 1 (so g(L, L) = 1/2).
inline Field1_0 tangent_field_c2(const ScalarField& r, const CPoint& p) {
  if (p.dim() != 2)
    throw DimensionError("tangent_field_c2 is only defined on C^2");
  std::vector<Cx> g = wirtinger_grad(r, p);
  double s = std::sqrt(std::norm(g[0]) + std::norm(g[1]));
  if (s < 1e-12 * fd_scale(p))
    throw DegeneratePointError("tangent_field_c2: vanishing gradient of '" +
                               r.name + "' at " + p.str());
  return Field1_0(g[1] / s, -g[0] / s);
}

// ---------------------------------------------------------------------------
// Directional Wirtinger derivative
// ---------------------------------------------------------------------------

// For a (possibly complex) function F and a (1,0) direction v:
//   (v . dF/dz) = (D_v F - i D_{iv} F) / 2,
// where D_u is the real directional derivative along the complex displacement
// u, computed by central differences.
inline Cx directional_wirtinger(const std::function<Cx(const CPoint&)>& F,
                                const CPoint& p, const std::vector<Cx>& v,
                                double h) {
  auto central = [&](const std::vector<Cx>& dir) {
    Cx fp = F(displaced(p, dir, h));
    Cx fm = F(displaced(p, dir, -h));
    return (fp - fm) / (2 * h);
  };
  std::vector<Cx> iv(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) iv[j] = Cx(0, 1) * v[j];
  Cx du = central(v);
  Cx div = central(iv);
  return 0.5 * (du - Cx(0, 1) * div);
}

// ---------------------------------------------------------------------------
// third_order
// ---------------------------------------------------------------------------

// The third-order term g(grad_L grad_N grad r, L) in the plain-sum
// normalization: with W_k(q) = sum_m N_m(q) r_{m conj(k)}(q),
//   D3 = sum_{j,k} L_j d(W_k)/dz_j conj(L_k),
// where the z-derivative is taken along L by central differences at steps h
// and h/2 and Richardson-combined. Throws when the two-step check does not
// converge (step too small for the field's noise floor).
using FieldFn = std::function<Field1_0(const CPoint&)>;

inline Cx third_order(const ScalarField& r, const FieldFn& n_field,
                      const FieldFn& l_field, const CPoint& p, double h) {
  if (h <= 0) throw PreconditionError("third_order: step must be positive");
  const std::size_t n = p.dim();
  Field1_0 l = l_field(p);
  if (l.dim() != n) throw DimensionError("third_order: field dimension mismatch");

  auto w_at = [&](const CPoint& q) {
    Field1_0 nq = n_field(q);
    HermMatrix hq = complex_hessian(r, q);
    std::vector<Cx> w(n, Cx(0, 0));
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t m = 0; m < n; ++m) w[k] += nq[m] * hq.at(m, k);
    return w;
  };

  auto d3_at_step = [&](double step) {
    std::vector<Cx> iv(n);
    for (std::size_t j = 0; j < n; ++j) iv[j] = Cx(0, 1) * l[j];
    std::vector<Cx> wp = w_at(displaced(p, l.components, step));
    std::vector<Cx> wm = w_at(displaced(p, l.components, -step));
    std::vector<Cx> wip = w_at(displaced(p, iv, step));
    std::vector<Cx> wim = w_at(displaced(p, iv, -step));
    Cx d3 = 0;
    for (std::size_t k = 0; k < n; ++k) {
      Cx du = (wp[k] - wm[k]) / (2 * step);
      Cx div = (wip[k] - wim[k]) / (2 * step);
      Cx lw = 0.5 * (du - Cx(0, 1) * div);  // L applied to W_k
      d3 += lw * std::conj(l[k]);
    }
    return d3;
  };

  Cx d_h = d3_at_step(h);
  Cx d_h2 = d3_at_step(h / 2);
  Cx extrap = (4.0 * d_h2 - d_h) / 3.0;
  double disagreement = std::abs(d_h - d_h2);
  if (!std::isfinite(extrap.real()) || !std::isfinite(extrap.imag()))
    throw EvaluationError("third_order: non-finite result at " + p.str());
  if (disagreement > 5e-3 * std::max(1.0, std::abs(extrap)))
    throw NoConvergenceError(
        "third_order: two-step Richardson check failed (step likely too small), "
        "|D3(h)-D3(h/2)| = " + std::to_string(disagreement),
        {d_h, d_h2});
  return extrap;
}

// ---------------------------------------------------------------------------
// normal_limit
// ---------------------------------------------------------------------------

struct NormalLimit {
  Cx value;
  double error_estimate = 0;
  std::vector<Cx> ratios;  // raw q/(-r) samples along the schedule
};

// Richardson-extrapolated limit of q/(-r) as the boundary point p is
// approached from inside along the normal direction. The limit is of 0/0
// type: q must vanish at p. Sample points are p - t * grad r/||grad r|| for
// the depths t in the schedule (strictly decreasing, positive).
inline NormalLimit normal_limit(const std::function<Cx(const CPoint&)>& q,
                                const ScalarField& r, const CPoint& p,
                                const std::vector<double>& schedule) {
  if (schedule.size() < 3)
    throw PreconditionError("normal_limit: schedule needs at least 3 depths");
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    if (schedule[k] <= 0 ||
        (k > 0 && schedule[k] >= schedule[k - 1]))
      throw PreconditionError("normal_limit: schedule must be strictly decreasing and positive");
  }
  Cx q0 = q(p);
  if (std::abs(q0) > 1e-8)
    throw PreconditionError("normal_limit: q(p) = " + std::to_string(std::abs(q0)) +
                            " is not ~0; the limit is not of 0/0 type");

  // Inward unit normal as a complex displacement: -conj(grad r)/|grad r|.
  std::vector<Cx> g = wirtinger_grad(r, p);
  double s = 0;
  for (const Cx& v : g) s += std::norm(v);
  s = std::sqrt(s);
  if (s < 1e-12) throw DegeneratePointError("normal_limit: vanishing gradient at " + p.str());
  std::vector<Cx> nu(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) nu[j] = -std::conj(g[j]) / s;

  std::vector<Cx> ratios;
  ratios.reserve(schedule.size());
  for (double t : schedule) {
    CPoint z = displaced(p, nu, t);
    double rv = r.value(z);
    if (!(rv < 0))
      throw EvaluationError("normal_limit: sample at depth " + std::to_string(t) +
                            " is not interior (r = " + std::to_string(rv) + ")");
    ratios.push_back(q(z) / (-rv));
  }

  // Non-monotone convergence check on the raw sequence.
  int growth = 0;
  double scale = 0;
  for (const Cx& v : ratios) scale = std::max(scale, std::abs(v));
  for (std::size_t k = 0; k + 2 < ratios.size(); ++k) {
    double d0 = std::abs(ratios[k + 1] - ratios[k]);
    double d1 = std::abs(ratios[k + 2] - ratios[k + 1]);
    if (d1 > 1.2 * d0 + 1e-12 * scale) ++growth;
  }
  if (growth >= 2)
    throw NoConvergenceError("normal_limit: ratio sequence is not converging", ratios);

  // Neville extrapolation of the ratios to t = 0.
  std::vector<Cx> tab = ratios;
  Cx prev_diag = tab.back();
  double err = std::numeric_limits<double>::infinity();
  for (std::size_t m = 1; m < schedule.size(); ++m) {
    for (std::size_t k = 0; k + m < schedule.size(); ++k) {
      double t0 = schedule[k];
      double t1 = schedule[k + m];
      tab[k] = (t0 * tab[k + 1] - t1 * tab[k]) / (t0 - t1);
    }
    err = std::abs(tab[0] - prev_diag);
    prev_diag = tab[0];
  }
  return NormalLimit{tab[0], err, ratios};
}

inline NormalLimit normal_limit(const std::function<Cx(const CPoint&)>& q,
                                const ScalarField& r, const CPoint& p) {
  return normal_limit(q, r, p, defaults::richardson_depths());
}

// ---------------------------------------------------------------------------
// min_eig_hermitian
// ---------------------------------------------------------------------------

namespace detail {

inline void jacobi_rotate(HermMatrix& m, std::size_t p, std::size_t q) {
  Cx b = m.at(p, q);
  double ab = std::abs(b);
  if (ab == 0) return;
  Cx phase = b / ab;  // b = |b| * phase
  double alpha = m.at(p, p).real();
  double delta = m.at(q, q).real();
  double tau = (delta - alpha) / (2 * ab);
  double t = (tau >= 0) ? 1.0 / (tau + std::sqrt(1 + tau * tau))
                        : -1.0 / (-tau + std::sqrt(1 + tau * tau));
  double c = 1.0 / std::sqrt(1 + t * t);
  double s = t * c;
  // Columns/rows p, q updated by the unitary built from the phase and the
  // real rotation.
  const std::size_t n = m.n;
  for (std::size_t r = 0; r < n; ++r) {
    Cx mrp = m.at(r, p);
    Cx mrq = m.at(r, q);
    m.at(r, p) = c * mrp - s * std::conj(phase) * mrq;
    m.at(r, q) = s * phase * mrp + c * mrq;
  }
  for (std::size_t r = 0; r < n; ++r) {
    Cx mpr = m.at(p, r);
    Cx mqr = m.at(q, r);
    m.at(p, r) = c * mpr - s * phase * mqr;
    m.at(q, r) = s * std::conj(phase) * mpr + c * mqr;
  }
  m.at(p, q) = 0;
  m.at(q, p) = 0;
}

}  // namespace detail

// Smallest eigenvalue of a Hermitian matrix. For n = 2 this is closed form
// via trace/determinant; larger matrices run cyclic Jacobi sweeps to 1e-12.
inline double min_eig_hermitian(const HermMatrix& h_in) {
  double scale = std::max(1.0, h_in.max_abs());
  if (h_in.hermiticity_defect() > 1e-9 * scale)
    throw PreconditionError("min_eig_hermitian: matrix is not Hermitian within tolerance");
  HermMatrix h = h_in;
  h.symmetrize();
  if (h.n == 0) throw DimensionError("min_eig_hermitian: empty matrix");
  if (h.n == 1) return h.at(0, 0).real();
  if (h.n == 2) {
    double a = h.at(0, 0).real();
    double d = h.at(1, 1).real();
    double disc = std::sqrt((a - d) * (a - d) + 4 * std::norm(h.at(0, 1)));
    return 0.5 * (a + d - disc);
  }
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0;
    for (std::size_t p = 0; p < h.n; ++p)
      for (std::size_t q = p + 1; q < h.n; ++q) off += std::norm(h.at(p, q));
    if (std::sqrt(off) < 1e-12 * scale) break;
    for (std::size_t p = 0; p < h.n; ++p)
      for (std::size_t q = p + 1; q < h.n; ++q) detail::jacobi_rotate(h, p, q);
  }
  double lo = h.at(0, 0).real();
  for (std::size_t j = 1; j < h.n; ++j) lo = std::min(lo, h.at(j, j).real());
  return lo;
}

// 2x2 variant that also returns a unit eigenvector for the smallest
// eigenvalue (used for failure witnesses).
inline std::pair<double, Field1_0> min_eig_with_vector2(const HermMatrix& h) {
  if (h.n != 2) throw DimensionError("min_eig_with_vector2: expected 2x2");
  double a = h.at(0, 0).real();
  double d = h.at(1, 1).real();
  Cx b = h.at(0, 1);
  double disc = std::sqrt((a - d) * (a - d) + 4 * std::norm(b));
  double lam = 0.5 * (a + d - disc);
  // (H - lam I) v = 0; pick the numerically larger construction.
  Field1_0 v1(b, Cx(lam - a, 0));
  Field1_0 v2(Cx(lam - d, 0), std::conj(b));
  Field1_0 v = (v1.sq_sum() >= v2.sq_sum()) ? v1 : v2;
  double nrm = std::sqrt(v.sq_sum());
  if (nrm < 1e-300) {
    v = Field1_0(Cx(1, 0), Cx(0, 0));  // H is lam * I
    nrm = 1;
  }
  for (auto& c : v.components) c /= nrm;
  return {lam, v};
}

}  // namespace dfx
