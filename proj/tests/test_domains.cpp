#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace dfx;
using namespace dfx_test;
using Catch::Approx;

TEST_CASE("cutoff_chi: interval of vanishing, knee, evenness, convexity", "[domains]") {
  WormParams p = WormParams::make(kPi);  // x0 = pi/2, a = x0 + 1
  const double x0 = p.x0();

  for (double x : {0.0, 0.3 * x0, -0.99 * x0, x0, -x0}) {
    CutoffEval c = cutoff_chi(p, x);
    CHECK(c.value == 0.0);
    CHECK(c.d1 == 0.0);
  }

  CutoffEval knee = cutoff_chi(p, p.a);
  CHECK(knee.value == Approx(1.0).margin(1e-15));
  CHECK(knee.d1 != 0.0);
  CHECK(cutoff_chi(p, p.a + 0.5).value > 1.0);
  CHECK(cutoff_chi(p, -p.a - 0.5).value > 1.0);

  for (int i = 0; i <= 100; ++i) {
    double x = -2 * p.a + 4 * p.a * i / 100.0;
    CHECK(cutoff_chi(p, x).value == cutoff_chi(p, -x).value);
  }

  // Convexity via second divided differences on a dense grid.
  const double h = 1e-3;
  for (int i = 0; i <= 2000; ++i) {
    double x = -1.5 * p.a + 3 * p.a * i / 2000.0;
    double dd = (cutoff_chi(p, x + h).value - 2 * cutoff_chi(p, x).value +
                 cutoff_chi(p, x - h).value) /
                (h * h);
    CHECK(dd >= -1e-12);
  }

  // The analytic derivatives match FD (C^3 smoothness across the knee).
  for (double x : {0.2, x0 + 1e-3, p.a, p.a + 0.7, -p.a - 0.2}) {
    double h2 = 1e-6;
    double d1 = (cutoff_chi(p, x + h2).value - cutoff_chi(p, x - h2).value) / (2 * h2);
    CHECK(cutoff_chi(p, x).d1 == Approx(d1).margin(1e-6));
    double d2 = (cutoff_chi(p, x + h2).d1 - cutoff_chi(p, x - h2).d1) / (2 * h2);
    CHECK(cutoff_chi(p, x).d2 == Approx(d2).margin(1e-5));
  }
}

TEST_CASE("worm_defining: values, Hessian table, w = 0 exclusion", "[domains]") {
  WormParams params = WormParams::make(kPi);
  DomainSpec worm = worm_defining(params);

  CHECK(worm.r(pt(Cx(0, 0), Cx(1, 0))) == Approx(0.0).margin(1e-15));
  CHECK(worm.r(pt(Cx(1, 0), Cx(1, 0))) == Approx(-1.0).margin(1e-15));

  HermMatrix h = complex_hessian(worm.r, pt(Cx(0, 0), Cx(1, 0)));
  CHECK(h.at(0, 0).real() == Approx(1.0));
  CHECK(std::abs(h.at(0, 1)) == Approx(1.0));
  CHECK(std::abs(h.at(1, 1)) < 1e-14);

  CHECK_THROWS_AS(worm.r(pt(Cx(0.5, 0), Cx(0, 0))), EvaluationError);
  CHECK(worm.r(worm.interior_witness) < 0);
}

TEST_CASE("worm_sigma_grid: endpoints, exact boundary, Levi flatness", "[domains]") {
  WormParams params = WormParams::make(kPi);
  auto grid = worm_sigma_grid(params, 8, 4);
  REQUIRE(grid.size() == 32);

  double min_w = 1e9, max_w = 0;
  for (const CPoint& p : grid) {
    min_w = std::min(min_w, std::abs(p[1]));
    max_w = std::max(max_w, std::abs(p[1]));
  }
  CHECK(min_w == Approx(std::exp(-kPi / 4)).epsilon(1e-12));  // 0.45594...
  CHECK(max_w == Approx(std::exp(kPi / 4)).epsilon(1e-12));   // 2.19328...
  CHECK(min_w == Approx(0.45593812776599624).epsilon(1e-11));
  CHECK(max_w == Approx(2.1932800507380152).epsilon(1e-11));

  DomainSpec worm = worm_defining(params);
  for (const CPoint& p : grid) {
    CHECK(std::abs(worm.r(p)) <= 1e-12);
    Field1_0 l = tangent_field_c2(worm.r, p);
    CHECK(std::abs(hess_pair(complex_hessian(worm.r, p), l, l)) <= 1e-10);
    CHECK(std::abs(grad_norm(worm.r, p) - 2.0) <= 1e-10);
    Field1_0 n = normal_field(worm.r, p);
    CHECK(std::abs(n[1]) <= 1e-10);  // N proportional to d/dz on the annulus
  }

  CHECK_THROWS_AS(worm_sigma_grid(params, 1, 4), PreconditionError);
}

TEST_CASE("ball_defining and validate_defining", "[domains]") {
  DomainSpec ball = ball_defining({1.0, 1.0});
  CPoint p(Cx(1, 0), Cx(0, 0));
  CHECK(ball.r(p) == Approx(0.0).margin(1e-15));
  auto g = wirtinger_grad(ball.r, p);
  CHECK(std::sqrt(std::norm(g[0]) + std::norm(g[1])) > 1e-8);

  // Unit-ball Levi form is the identity restricted to tangents.
  Field1_0 l = tangent_field_c2(ball.r, p);
  CHECK(hess_pair(complex_hessian(ball.r, p), l, l).real() == Approx(1.0));

  ValidationReport vb = validate_defining(ball, 50);
  CHECK(vb.pass());

  for (double beta : {0.75 * kPi, kPi, 2 * kPi, 4 * kPi}) {
    ValidationReport vw = validate_defining(worm_defining(WormParams::make(beta)), 100);
    INFO("beta = " << beta << ", grad err " << vw.max_rel_grad_err << ", hess err "
                   << vw.max_rel_hess_err);
    CHECK(vw.pass());
    CHECK(vw.max_rel_grad_err <= 1e-6);
    CHECK(vw.max_rel_hess_err <= 1e-6);
  }

  CHECK_THROWS_AS(ball_defining({1.0}), PreconditionError);
  CHECK_THROWS_AS(ball_defining({1.0, -1.0}), PreconditionError);
  CHECK_THROWS_AS(validate_defining(ball, 0), PreconditionError);
}

TEST_CASE("ellipsoid in C^3 exercises n > 2 calculus", "[domains]") {
  DomainSpec e = ball_defining({1.0, 2.0, 0.5});
  Rng rng = seeded(31);
  for (int i = 0; i < 20; ++i) {
    CPoint p = e.boundary_sample(rng);
    CHECK(std::abs(e.r(p)) < 1e-12);
    HermMatrix h = complex_hessian(e.r, p);
    CHECK(min_eig_hermitian(h) == Approx(0.25).margin(1e-10));  // 1/R_max^2
  }
  CHECK(validate_defining(e, 40).pass());
}

TEST_CASE("worm boundedness: r > 0 outside the enclosing box", "[domains]") {
  WormParams params = WormParams::make(kPi);
  DomainSpec worm = worm_defining(params);
  // Outside |z| <= 3 at admissible w.
  Rng rng = seeded(37);
  for (int i = 0; i < 200; ++i) {
    double t = uni(rng, -params.a, params.a);
    Cx w = std::polar(std::exp(t / 2), uni(rng, 0, 2 * kPi));
    Cx z = std::polar(uni(rng, 3.0, 6.0), uni(rng, 0, 2 * kPi));
    CHECK(worm.r(pt(z, w)) > 0);
  }
  // Outside the log|w|^2 band (chi > 1 there), any z.
  for (int i = 0; i < 200; ++i) {
    double cap = params.a + (params.a - params.x0());
    double t = (i % 2 ? 1 : -1) * uni(rng, cap, cap + 3);
    Cx w = std::polar(std::exp(t / 2), uni(rng, 0, 2 * kPi));
    Cx z = std::polar(uni(rng, 0.0, 2.5), uni(rng, 0, 2 * kPi));
    CHECK(worm.r(pt(z, w)) > 0);
  }
}

TEST_CASE("annulus quantities are independent of the cutoff knee", "[domains]") {
  // The cutoff vanishes identically on the annulus band, so everything the
  // criterion consumes there must agree for different knees a.
  WormParams p1 = WormParams::make(kPi);             // a = x0 + 1
  WormParams p2 = WormParams::make(kPi, kPi / 2 + 2.5);
  DomainSpec w1 = worm_defining(p1);
  DomainSpec w2 = worm_defining(p2);
  Weight psi = build_psi_radial(0.8, kPi / 2, kPi);
  for (const CPoint& p : worm_sigma_grid(p1, 6, 4)) {
    CHECK(w1.r(p) == w2.r(p));
    auto g1 = w1.r.grad(p), g2 = w2.r.grad(p);
    CHECK(std::abs(g1[0] - g2[0]) == 0.0);
    CHECK(std::abs(g1[1] - g2[1]) == 0.0);
    double c1 = criterion_general(w1, psi, 0.4, p);
    double c2 = criterion_general(w2, psi, 0.4, p);
    CHECK(c1 == Approx(c2).margin(1e-12));
  }
  auto rep1 = criterion_sweep_worm(p1, psi, 0.7, 16, 4);
  auto rep2 = criterion_sweep_worm(p2, psi, 0.7, 16, 4);
  CHECK(rep1.max_value == Approx(rep2.max_value).margin(1e-12));
}
