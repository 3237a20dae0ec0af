// Direct verification that -(-rho)^eta is plurisubharmonic near the boundary
// for rho = r e^psi: the (L, N)-frame expansion of the composed Hessian, the
// discriminant positivity test, inward normal sampling, and exponent
// bisection. In C^2 the frame {L, N} is a basis wherever grad r != 0, so
// frame positivity is full plurisubharmonicity.

#pragma once

#include "dfx/criterion.hpp"

namespace dfx {

// ---------------------------------------------------------------------------
// hessian_neg_pow
// ---------------------------------------------------------------------------

struct FrameMatrix {
  HermMatrix frame;   // 2x2 in the (L, N) frame, prefactor stripped
  double prefactor;   // eta (-rho)^{eta-1} > 0
  Cx l_rho, n_rho;    // first-order data, useful for diagnostics
};

// The bracketed 2x2 form of the composed Hessian: entries
//   A(X, Y) = Hess_rho(X, Y) + ((1-eta)/(-rho)) (X rho) conj(Y rho)
// for X, Y in {L, N}. Hess_{-(-rho)^eta}(aL + bN, aL + bN) equals
// prefactor * (a, b) A (a, b)^*, so positivity of A on C^2 is positivity of
// the composed Hessian on span{L, N}.
inline FrameMatrix hessian_neg_pow(const ScalarField& rho, double eta,
                                   const CPoint& p, const Field1_0& l,
                                   const Field1_0& n) {
  if (!(eta > 0 && eta < 1))
    throw PreconditionError("hessian_neg_pow: eta must lie in (0, 1)");
  double rv = rho.value(p);
  if (!(rv < 0))
    throw PreconditionError("hessian_neg_pow: point is not interior (rho = " +
                            std::to_string(rv) + ")");
  std::vector<Cx> g = rho.has_grad() ? rho.grad(p) : wirtinger_grad(rho, p);
  HermMatrix h = complex_hessian(rho, p);

  auto pair_rho = [&g](const Field1_0& x) {
    Cx s = 0;
    for (std::size_t j = 0; j < x.dim(); ++j) s += x[j] * g[j];
    return s;
  };
  Cx lr = pair_rho(l);
  Cx nr = pair_rho(n);
  const double c = (1.0 - eta) / (-rv);

  FrameMatrix out;
  out.l_rho = lr;
  out.n_rho = nr;
  out.prefactor = eta * std::pow(-rv, eta - 1.0);
  HermMatrix a(2);
  a.at(0, 0) = hess_pair(h, l, l) + c * lr * std::conj(lr);
  a.at(0, 1) = hess_pair(h, l, n) + c * lr * std::conj(nr);
  a.at(1, 0) = std::conj(a.at(0, 1));
  a.at(1, 1) = hess_pair(h, n, n) + c * nr * std::conj(nr);
  a.symmetrize();
  out.frame = a;
  return out;
}

// ---------------------------------------------------------------------------
// discriminant
// ---------------------------------------------------------------------------

struct DiscriminantVerdict {
  double delta;
  bool positive_for_all;  // the Hermitian form is positive for all (a, b) != 0
};

// Quadratic-discriminant reduction: with A_NN > 0 the form
// |a|^2 A_LL - 2|ab||A_LN| + |b|^2 A_NN is positive for every (a, b) != 0 iff
// Delta = |A_LN|^2 - A_LL A_NN < 0 (boundary case Delta = 0 only with
// A_LL > 0, where the double root misses the sampled ratios).
inline DiscriminantVerdict discriminant(double a_ll, Cx a_ln, double a_nn) {
  if (!(a_nn > 0))
    throw PreconditionError(
        "discriminant: A_NN must be positive (it blows up toward the boundary)");
  double delta = std::norm(a_ln) - a_ll * a_nn;
  bool positive = (delta < 0) || (delta == 0 && a_ll > 0);
  return {delta, positive};
}

// ---------------------------------------------------------------------------
// interior_sampler
// ---------------------------------------------------------------------------

struct InteriorSample {
  CPoint point;
  CPoint boundary;
  double depth;
};

struct InteriorSamples {
  std::vector<InteriorSample> samples;
  int escaped = 0;  // sampled points that failed the interior check
};

// Points p - t grad r/||grad r|| (the inward move) for boundary points p and
// the given depths, each verified to satisfy r < 0; escapes are skipped and
// counted.
inline InteriorSamples interior_sampler(const DomainSpec& spec,
                                        const std::vector<CPoint>& boundary,
                                        const std::vector<double>& depths) {
  for (double t : depths)
    if (!(t > 0))
      throw PreconditionError("interior_sampler: depths must be positive");
  InteriorSamples out;
  for (const CPoint& p : boundary) {
    std::vector<Cx> g = wirtinger_grad(spec.r, p);
    double s = 0;
    for (const Cx& v : g) s += std::norm(v);
    s = std::sqrt(s);
    if (s < 1e-12) {
      out.escaped += static_cast<int>(depths.size());
      continue;
    }
    std::vector<Cx> nu(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) nu[j] = -std::conj(g[j]) / s;
    for (double t : depths) {
      CPoint q = displaced(p, nu, t);
      if (spec.r.value(q) < 0)
        out.samples.push_back({q, p, t});
      else
        ++out.escaped;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// check_psh_grid
// ---------------------------------------------------------------------------

struct PshSampleRecord {
  CPoint point;
  double depth;
  double a_ll, a_nn;
  Cx a_ln;
  double delta;
  double min_eig;
};

struct ExponentCheckReport {
  double eta = 0;
  int sample_count = 0;
  int eval_failures = 0;
  double min_eig = std::numeric_limits<double>::infinity();
  bool has_witness = false;
  CPoint witness_point;
  Field1_0 witness_direction;  // (a, b) frame coefficients of the failure
  double witness_depth = 0;
  std::vector<double> depths_used;
  std::vector<PshSampleRecord> records;

  bool pass(double tol = defaults::psd_tolerance) const {
    return sample_count > 0 && min_eig >= -tol;
  }
};

// Builds rho = r e^psi and evaluates the prefactor-stripped frame matrix at
// every interior sample; reports the worst eigenvalue and a witness direction
// when positivity fails. Per-point evaluation failures are counted, not
// fatal.
inline ExponentCheckReport check_psh_grid(const DomainSpec& spec,
                                          const Weight& psi, double eta,
                                          const InteriorSamples& samples) {
  ExponentCheckReport rep;
  rep.eta = eta;
  ScalarField rho = rho_from(spec.r, psi.field);
  for (const InteriorSample& s : samples.samples) {
    try {
      Field1_0 l = tangent_field_c2(spec.r, s.point);
      Field1_0 n = normal_field(spec.r, s.point);
      FrameMatrix fm = hessian_neg_pow(rho, eta, s.point, l, n);
      auto [lam, vec] = min_eig_with_vector2(fm.frame);
      PshSampleRecord rec;
      rec.point = s.point;
      rec.depth = s.depth;
      rec.a_ll = fm.frame.at(0, 0).real();
      rec.a_nn = fm.frame.at(1, 1).real();
      rec.a_ln = fm.frame.at(0, 1);
      rec.delta = std::norm(rec.a_ln) - rec.a_ll * rec.a_nn;
      rec.min_eig = lam;
      rep.records.push_back(rec);
      ++rep.sample_count;
      if (lam < rep.min_eig) {
        rep.min_eig = lam;
        if (lam < -defaults::psd_tolerance) {
          rep.has_witness = true;
          rep.witness_point = s.point;
          rep.witness_direction = vec;
          rep.witness_depth = s.depth;
        }
      }
    } catch (const Error&) {
      ++rep.eval_failures;
    }
  }
  std::vector<double> ds;
  for (const InteriorSample& s : samples.samples) {
    if (std::find(ds.begin(), ds.end(), s.depth) == ds.end()) ds.push_back(s.depth);
  }
  rep.depths_used = ds;
  return rep;
}

// ---------------------------------------------------------------------------
// df_exponent_bisect
// ---------------------------------------------------------------------------

// Largest eta (to tol) whose weight from psi_builder passes check_psh_grid on
// the given sampler output. psi_builder may throw InfeasibleError to signal
// that the family has no weight at that eta. Returns 0 when nothing passes.
inline double df_exponent_bisect(const DomainSpec& spec,
                                 const std::function<Weight(double)>& psi_builder,
                                 double tol, const InteriorSamples& samples) {
  if (!(tol > 0)) throw PreconditionError("df_exponent_bisect: tol must be positive");
  auto passes = [&](double eta) {
    try {
      Weight w = psi_builder(eta);
      return check_psh_grid(spec, w, eta, samples).pass();
    } catch (const InfeasibleError&) {
      return false;
    }
  };
  double lo = 0.01, hi = 0.99;
  if (!passes(lo)) return 0.0;
  if (passes(hi)) return hi;
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    if (passes(mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace dfx
