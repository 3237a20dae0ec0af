// The Riccati equation s' = -a s^2 - s/t - b/t^2 (a, b > 0, t > 0): cotangent
// closed form, RK4 integration with blow-up detection, the ODE comparison
// principle, the blow-up bisection for the largest feasible alpha on the worm
// annulus, the resulting index pi/(2 beta), and the optimal radial weight
// psi(r) = (1/alpha) log sin(2 alpha log r + theta).

#pragma once

#include "dfx/exponents.hpp"
#include "dfx/weight.hpp"

namespace dfx {

struct RiccatiParams {
  double a;
  double b;
  double theta = defaults::theta;

  static RiccatiParams make(double a, double b, double theta = defaults::theta) {
    if (!(a > 0) || !(b > 0))
      throw PreconditionError("RiccatiParams: a and b must be positive");
    return {a, b, theta};
  }
  // The worm reduction uses a = alpha, b = 4 alpha.
  static RiccatiParams worm(double alpha, double theta = defaults::theta) {
    return make(alpha, 4 * alpha, theta);
  }
};

// ---------------------------------------------------------------------------
// closed_form
// ---------------------------------------------------------------------------

// s(t) = sqrt(b/a) cot(sqrt(ab) log t + theta) / t. Poles where the cotangent
// argument hits a multiple of pi.
inline double closed_form(const RiccatiParams& p, double t) {
  if (!(t > 0)) throw PreconditionError("closed_form: t must be positive");
  double u = std::sqrt(p.a * p.b) * std::log(t) + p.theta;
  double frac = std::abs(std::remainder(u, kPi));
  if (frac < 1e-8)
    throw PoleError("closed_form: cotangent argument " + std::to_string(u) +
                    " is within 1e-8 of a pole");
  return std::sqrt(p.b / p.a) * (std::cos(u) / std::sin(u)) / t;
}

// ---------------------------------------------------------------------------
// integrate
// ---------------------------------------------------------------------------

struct RiccatiSolution {
  std::vector<double> t;
  std::vector<double> s;
  bool blew_up = false;
  double blow_up_t = 0;
  enum class Source { closed_form, integrated } source = Source::integrated;
};

namespace detail {

inline double riccati_rhs(const RiccatiParams& p, double t, double s) {
  return -p.a * s * s - s / t - p.b / (t * t);
}

template <typename Rhs>
double rk4_step(const Rhs& f, double t, double y, double h) {
  double k1 = f(t, y);
  double k2 = f(t + h / 2, y + h / 2 * k1);
  double k3 = f(t + h / 2, y + h / 2 * k2);
  double k4 = f(t + h, y + h * k3);
  return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
}

}  // namespace detail

// RK4 trajectory of s' = -a s^2 - s/t - b/t^2 from (t0, s0) to t1. `step` is
// the largest step taken; each step is checked by step-doubling and refined
// as needed. Blow-up is declared when |s| exceeds the cap or when the error
// control cannot reach its target above the step floor (a cotangent pole).
inline RiccatiSolution integrate(const RiccatiParams& p, double s0, double t0,
                                 double t1, double step) {
  if (!(t0 > 0) || !(t1 > t0))
    throw PreconditionError("integrate: need 0 < t0 < t1");
  if (!(step > 0)) throw PreconditionError("integrate: step must be positive");

  auto f = [&p](double t, double s) { return detail::riccati_rhs(p, t, s); };
  const double floor = 1e-12 * step;
  const double local_tol = 1e-10;

  RiccatiSolution sol;
  sol.t.push_back(t0);
  sol.s.push_back(s0);
  double t = t0, s = s0;
  double h = std::min(step, 0.1 * t0);
  while (t < t1) {
    if (std::abs(s) > defaults::blow_up_cap) {
      sol.blew_up = true;
      sol.blow_up_t = t;
      return sol;
    }
    h = std::min(h, t1 - t);
    double y_full = detail::rk4_step(f, t, s, h);
    double y_half = detail::rk4_step(f, t, s, h / 2);
    y_half = detail::rk4_step(f, t + h / 2, y_half, h / 2);
    double err = std::abs(y_full - y_half);
    double scale = std::max({1.0, std::abs(s), std::abs(y_half)});
    if (err > local_tol * scale) {
      h *= 0.5;
      if (h < floor) {
        sol.blew_up = true;
        sol.blow_up_t = t;
        return sol;
      }
      continue;
    }
    // Accept with local extrapolation.
    s = y_half + (y_half - y_full) / 15.0;
    t += h;
    sol.t.push_back(t);
    sol.s.push_back(s);
    if (!std::isfinite(s)) {
      sol.blew_up = true;
      sol.blow_up_t = t;
      return sol;
    }
    if (err < 0.1 * local_tol * scale) h = std::min(2 * h, step);
  }
  return sol;
}

// ---------------------------------------------------------------------------
// comparison_check
// ---------------------------------------------------------------------------

struct ComparisonReport {
  bool dominated = false;
  double max_residual = 0;   // largest FD residual of the differential inequality
  double max_violation = 0;  // largest amount by which s exceeds the closed form
  double theta_matched = 0;
};

// Verifies the comparison principle: a trajectory satisfying
// s' + a s^2 + s/t + b/t^2 <= 0 (checked by nonuniform central differences at
// its samples) is dominated by the closed-form solution matched at its
// initial condition. Throws PreconditionError when the trajectory is not a
// sub-solution.
inline ComparisonReport comparison_check(const RiccatiSolution& sub,
                                         const RiccatiParams& p,
                                         double slack = defaults::feasibility_slack) {
  const std::size_t n = sub.t.size();
  if (n < 5) throw PreconditionError("comparison_check: need at least 5 samples");

  ComparisonReport rep;
  // FD residual of the differential inequality at interior samples. The
  // truncation of the nonuniform 3-point stencil is estimated from the wide
  // (i-2, i, i+2) stencil and added to the acceptance band.
  auto deriv3 = [&](std::size_t im, std::size_t i, std::size_t ip) {
    double d1 = sub.t[i] - sub.t[im];
    double d2 = sub.t[ip] - sub.t[i];
    return (sub.s[ip] * d1 * d1 - sub.s[im] * d2 * d2 +
            sub.s[i] * (d2 * d2 - d1 * d1)) /
           (d1 * d2 * (d1 + d2));
  };
  for (std::size_t i = 2; i + 2 < n; ++i) {
    double sp = deriv3(i - 1, i, i + 1);
    double sp_wide = deriv3(i - 2, i, i + 2);
    double fd_err = std::abs(sp - sp_wide);  // ~ 3x the narrow-stencil truncation
    double res = sp + p.a * sub.s[i] * sub.s[i] + sub.s[i] / sub.t[i] +
                 p.b / (sub.t[i] * sub.t[i]);
    rep.max_residual = std::max(rep.max_residual, res);
    if (res > slack + 3 * fd_err)
      throw PreconditionError(
          "comparison_check: trajectory is not a sub-solution (residual " +
          std::to_string(res) + " at t = " + std::to_string(sub.t[i]) + ")");
  }

  // Match theta at the initial condition: cot(u0) = s0 t0 / sqrt(b/a).
  double c0 = sub.s[0] * sub.t[0] / std::sqrt(p.b / p.a);
  double u0 = kPi / 2 - std::atan(c0);  // arccot into (0, pi)
  double theta = u0 - std::sqrt(p.a * p.b) * std::log(sub.t[0]);
  rep.theta_matched = theta;
  RiccatiParams matched{p.a, p.b, theta};

  // The matched solution exists until its argument reaches pi.
  double sqab = std::sqrt(p.a * p.b);
  double t_pole = sub.t[0] * std::exp((kPi - u0) / sqab);
  for (std::size_t i = 0; i < n; ++i) {
    if (sub.t[i] >= t_pole * (1 - 1e-12)) {
      // The equality solution blew down before this sample; a genuine
      // sub-solution cannot still be finite here.
      rep.max_violation = std::numeric_limits<double>::infinity();
      rep.dominated = false;
      return rep;
    }
    double bound = closed_form(matched, sub.t[i]);
    rep.max_violation = std::max(rep.max_violation, sub.s[i] - bound);
  }
  rep.dominated = rep.max_violation <= 1e-6;
  return rep;
}

// ---------------------------------------------------------------------------
// max_alpha / worm_index
// ---------------------------------------------------------------------------

namespace detail {

// Feasibility probe for the worm annulus: integrate the Riccati equation in
// the log-radius variable tau = log t, where v(tau) = t s(t) satisfies the
// autonomous form v' = -a v^2 - b. With theta = pi/2 the solution is
// v = 2 cot(2 alpha tau + pi/2), v(0) = 0; alpha is feasible iff the
// trajectory crosses no cotangent pole on [pi/4 - beta/2, beta/2 - pi/4],
// i.e. the integration stays below the blow-up cap in both directions.
inline bool alpha_feasible_by_blow_up(double alpha, double beta) {
  const double a = alpha, b = 4 * alpha;
  const double hi = beta / 2 - kPi / 4;  // symmetric interval [-hi, hi]
  auto rhs = [a, b](double, double v) { return -a * v * v - b; };
  const double base = std::min(1e-3, hi / 64);
  const double floor = 1e-14;
  const double local_tol = 1e-10;

  for (double dir : {1.0, -1.0}) {
    double tau = 0, v = 0;
    double h = base;
    while (tau * dir < hi) {
      if (std::abs(v) > defaults::blow_up_cap) return false;
      h = std::min(h, hi - dir * tau);
      double step = dir * h;
      double y_full = rk4_step(rhs, tau, v, step);
      double y_half = rk4_step(rhs, tau, v, step / 2);
      y_half = rk4_step(rhs, tau + step / 2, y_half, step / 2);
      double err = std::abs(y_full - y_half);
      double scale = std::max({1.0, std::abs(v), std::abs(y_half)});
      if (err > local_tol * scale) {
        h *= 0.5;
        if (h < floor) return false;
        continue;
      }
      v = y_half + (y_half - y_full) / 15.0;
      tau += step;
      if (!std::isfinite(v)) return false;
      if (err < 0.1 * local_tol * scale) h = std::min(2 * h, base);
    }
    if (std::abs(v) > defaults::blow_up_cap) return false;
  }
  return true;
}

}  // namespace detail

// Largest alpha for which the cotangent argument 2 alpha log r + theta stays
// inside one period over the annulus log r in [pi/4 - beta/2, beta/2 - pi/4],
// decided by bisection on actual blow-up-free integration (theta = pi/2).
inline double max_alpha(double beta, double tol) {
  if (!(beta > kPi / 2)) throw PreconditionError("max_alpha: beta must exceed pi/2");
  if (!(tol > 0)) throw PreconditionError("max_alpha: tol must be positive");

  double lo = 1e-6;
  if (!detail::alpha_feasible_by_blow_up(lo, beta)) return 0.0;
  double hi = 1.0;
  int guard = 0;
  while (detail::alpha_feasible_by_blow_up(hi, beta)) {
    lo = hi;
    hi *= 2;
    if (++guard > 60)
      throw NoConvergenceError("max_alpha: no infeasible alpha found", {});
  }
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    if (detail::alpha_feasible_by_blow_up(mid, beta))
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// The index of the beta-worm: eta corresponding to the largest feasible
// alpha. Agrees with pi/(2 beta) to within 2 tol.
inline double worm_index(double beta, double tol) {
  return eta_from_alpha(max_alpha(beta, tol));
}

// ---------------------------------------------------------------------------
// build_psi_radial
// ---------------------------------------------------------------------------

// The optimal radial weight on the worm annulus:
//   psi(r) = (1/alpha) log sin(u),  u = 2 alpha log r + theta,
//   f_r    = 2 cot(u) / r,
//   f_rr   = (-4 alpha csc^2(u) - 2 cot(u)) / r^2.
// f_r solves the worm Riccati equation (a = alpha, b = 4 alpha), so the
// radial polar criterion vanishes identically. Requires u to stay in (0, pi)
// over the annulus; otherwise the construction is infeasible.
inline Weight build_psi_radial(double alpha, double theta, double beta) {
  if (!(alpha > 0)) throw PreconditionError("build_psi_radial: alpha must be positive");
  if (!(beta > kPi / 2))
    throw PreconditionError("build_psi_radial: beta must exceed pi/2");
  const double span = beta / 2 - kPi / 4;  // log r in [-span, span]
  const double u_lo = -2 * alpha * span + theta;
  const double u_hi = 2 * alpha * span + theta;
  if (!(u_lo > 0))
    throw InfeasibleError(
        "build_psi_radial: cotangent argument leaves (0, pi) at the lower "
        "annulus endpoint (u = " + std::to_string(u_lo) + ")");
  if (!(u_hi < kPi))
    throw InfeasibleError(
        "build_psi_radial: cotangent argument leaves (0, pi) at the upper "
        "annulus endpoint (u = " + std::to_string(u_hi) + ")");

  auto arg = [alpha, theta](double r) {
    double u = 2 * alpha * std::log(r) + theta;
    if (!(u > 1e-12 && u < kPi - 1e-12))
      throw EvaluationError("radial weight: argument " + std::to_string(u) +
                            " outside (0, pi) at r = " + std::to_string(r));
    return u;
  };
  PolarFn f;
  f.value = [alpha, arg](double r, double) { return std::log(std::sin(arg(r))) / alpha; };
  f.dr = [arg](double r, double) { return 2 * std::cos(arg(r)) / std::sin(arg(r)) / r; };
  f.drr = [alpha, arg](double r, double) {
    double u = arg(r);
    double cot = std::cos(u) / std::sin(u);
    double csc2 = 1.0 / (std::sin(u) * std::sin(u));
    return (-4 * alpha * csc2 - 2 * cot) / (r * r);
  };
  f.dphi = [](double, double) { return 0.0; };
  f.dphiphi = [](double, double) { return 0.0; };

  Weight w = weight_from_polar(f, "radial-riccati");
  w.alpha_psi = alpha;
  w.theta = theta;
  return w;
}

}  // namespace dfx
