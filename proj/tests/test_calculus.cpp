#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace dfx;
using namespace dfx_test;
using Catch::Approx;

namespace {

ScalarField value_only(const ScalarField& f) {
  return ScalarField{f.value, nullptr, nullptr, f.name + "(fd)", f.step_scale};
}

}  // namespace

TEST_CASE("wirtinger_grad: linear and quadratic reference fields", "[calculus]") {
  ScalarField re_z{[](const CPoint& p) { return p[0].real(); }, nullptr, nullptr, "Re z1", nullptr};
  CPoint p(Cx(0.3, -0.7), Cx(1.1, 0.2));
  auto g = wirtinger_grad(re_z, p);
  CHECK(std::abs(g[0] - Cx(0.5, 0)) < 1e-9);
  CHECK(std::abs(g[1]) < 1e-9);

  ScalarField mod2{[](const CPoint& p) { return std::norm(p[0]); }, nullptr, nullptr, "|z1|^2", nullptr};
  auto g2 = wirtinger_grad(mod2, pt(Cx(1, 0), Cx(0, 0)));
  CHECK(std::abs(g2[0] - Cx(1, 0)) < 1e-9);  // d|z|^2/dz = conj(z)
  CHECK(std::abs(g2[1]) < 1e-12);
}

TEST_CASE("wirtinger_grad: worm analytic gradient matches central differences",
          "[calculus]") {
  DomainSpec worm = worm_defining(WormParams::make(kPi));
  CPoint p(Cx(0.1, 0.2), Cx(1.3, 0.0));
  auto ga = worm.r.grad(p);
  auto gf = wirtinger_grad(value_only(worm.r), p);
  for (int j = 0; j < 2; ++j)
    CHECK(std::abs(ga[j] - gf[j]) < 1e-6 * std::max(1.0, std::abs(ga[j])));
}

TEST_CASE("wirtinger_grad and complex_hessian converge at order h^2", "[calculus]") {
  // Re(z1^3) + |z1|^2 |z2|^2 has nonconstant third derivatives.
  ScalarField f;
  f.name = "poly";
  f.value = [](const CPoint& p) {
    return std::pow(p[0], 3).real() + std::norm(p[0]) * std::norm(p[1]);
  };
  CPoint p(Cx(0.4, 0.3), Cx(-0.2, 0.5));
  // Exact: d/dz1 Re(z^3) = (3/2) z^2; d/dz1 |z1|^2|z2|^2 = conj(z1)|z2|^2.
  Cx exact = 1.5 * p[0] * p[0] + std::conj(p[0]) * std::norm(p[1]);
  double e1 = std::abs(wirtinger_grad(f, p, 1e-2)[0] - exact);
  double e2 = std::abs(wirtinger_grad(f, p, 5e-3)[0] - exact);
  CHECK(e1 / e2 == Approx(4.0).margin(1.5));

  Cx hexact = std::conj(p[0]) * p[1];  // d^2/dz1 dconj(z2) of |z1|^2|z2|^2
  double h1 = std::abs(complex_hessian(f, p, 1e-2).at(0, 1) - hexact);
  double h2 = std::abs(complex_hessian(f, p, 5e-3).at(0, 1) - hexact);
  CHECK(h1 / h2 == Approx(4.0).margin(1.5));
}

TEST_CASE("complex_hessian: reference fields and the worm Sigma table", "[calculus]") {
  ScalarField norm2{[](const CPoint& p) { return std::norm(p[0]) + std::norm(p[1]); },
                    nullptr, nullptr, "|z|^2+|w|^2", nullptr};
  CPoint p(Cx(0.2, 0.1), Cx(-0.4, 0.9));
  HermMatrix h = complex_hessian(norm2, p);
  CHECK(std::abs(h.at(0, 0) - 1.0) < 1e-7);
  CHECK(std::abs(h.at(1, 1) - 1.0) < 1e-7);
  CHECK(std::abs(h.at(0, 1)) < 1e-7);

  ScalarField plh{[](const CPoint& p) { return (p[0] * p[0]).real(); }, nullptr,
                  nullptr, "Re z^2", nullptr};
  HermMatrix hp = complex_hessian(plh, p);
  CHECK(hp.max_abs() < 1e-7);  // pluriharmonic

  // Worm at (0, 1): [[1, i],[-i, 0]]. The off-diagonal sign is pinned by
  // direct differentiation of the defining function (FD-checked below).
  DomainSpec worm = worm_defining(WormParams::make(kPi));
  CPoint q(Cx(0, 0), Cx(1, 0));
  HermMatrix hw = complex_hessian(worm.r, q);
  CHECK(std::abs(hw.at(0, 0) - 1.0) < 1e-12);
  CHECK(std::abs(hw.at(1, 1)) < 1e-12);
  CHECK(std::abs(hw.at(0, 1) - Cx(0, 1)) < 1e-12);
  HermMatrix hf = complex_hessian(value_only(worm.r), q);
  CHECK(std::abs(hf.at(0, 1) - Cx(0, 1)) < 1e-6);

  // Symmetrization is exact and diagonal pairings are real.
  CHECK(hw.hermiticity_defect() == 0.0);
  Rng rng = seeded(5);
  for (int i = 0; i < 20; ++i) {
    Field1_0 x(random_cx(rng), random_cx(rng));
    CHECK(std::abs(hess_pair(hw, x, x).imag()) < 1e-12);
  }
}

TEST_CASE("hess_pair: contract examples", "[calculus]") {
  HermMatrix id = HermMatrix::identity(2);
  CHECK(hess_pair(id, Field1_0(1, 0), Field1_0(1, 0)) == Cx(1, 0));

  HermMatrix h(2);
  h.at(0, 1) = Cx(0, -1);
  h.at(1, 0) = Cx(0, 1);
  CHECK(std::abs(hess_pair(h, Field1_0(1, 0), Field1_0(0, 1)) - Cx(0, -1)) < 1e-15);

  CHECK(std::abs(hess_pair(h, Field1_0(0, 0), Field1_0(1, 1))) == 0.0);

  HermMatrix bad(2);
  CHECK_THROWS_AS(hess_pair(bad, Field1_0({Cx(1, 0)}), Field1_0(1, 0)), DimensionError);
}

TEST_CASE("grad_norm: worm boundary value and sanity fields", "[calculus]") {
  DomainSpec worm = worm_defining(WormParams::make(kPi));
  CHECK(grad_norm(worm.r, pt(Cx(0, 0), Cx(1, 0))) == Approx(2.0).margin(1e-12));

  DomainSpec ball = ball_defining({1.0, 1.0});
  CHECK(grad_norm(ball.r, pt(Cx(1, 0), Cx(0, 0))) == Approx(2.0).margin(1e-12));

  ScalarField c{[](const CPoint&) { return 3.0; }, nullptr, nullptr, "const", nullptr};
  CHECK(grad_norm(c, pt(Cx(0.5, 0.5), Cx(1, 1))) < 1e-9);
}

TEST_CASE("normal_field: frame values and the defining identity", "[calculus]") {
  DomainSpec ball = ball_defining({1.0, 1.0});
  Field1_0 n = normal_field(ball.r, pt(Cx(1, 0), Cx(0, 0)));
  CHECK(std::abs(n[0] - Cx(1, 0)) < 1e-12);
  CHECK(std::abs(n[1]) < 1e-12);

  // Worm on Sigma: N is a unimodular multiple of d/dz; the phase is
  // -e^{i log|w|^2} for the catalog's differentiation convention.
  DomainSpec worm = worm_defining(WormParams::make(kPi));
  for (const CPoint& p : worm_sigma_grid(WormParams::make(kPi), 4, 3)) {
    Field1_0 nw = normal_field(worm.r, p);
    double t = std::log(std::norm(p[1]));
    CHECK(std::abs(nw[1]) < 1e-12);
    CHECK(std::abs(nw[0] + std::polar(1.0, t)) < 1e-12);
    // FD route agrees, fixing the sign independently of the callbacks.
    Field1_0 nf = normal_field(value_only(worm.r), p);
    CHECK(std::abs(nf[0] - nw[0]) < 1e-7);
  }

  // N_r r = ||grad r||/2 at random boundary points, via the FD-only field.
  Rng rng = seeded(11);
  ScalarField rf = value_only(worm.r);
  for (int i = 0; i < 25; ++i) {
    CPoint p = worm.boundary_sample(rng);
    Field1_0 n2 = normal_field(rf, p);
    auto g = wirtinger_grad(rf, p);
    Cx nr = n2[0] * g[0] + n2[1] * g[1];
    CHECK(std::abs(nr - grad_norm(rf, p) / 2) < 1e-8);
  }

  ScalarField c{[](const CPoint&) { return 1.0; }, nullptr, nullptr, "const", nullptr};
  CHECK_THROWS_AS(normal_field(c, pt(Cx(0, 0), Cx(0, 0))), DegeneratePointError);
}

TEST_CASE("tangent_field_c2: frame values, tangency, normalization", "[calculus]") {
  DomainSpec ball = ball_defining({1.0, 1.0});
  Field1_0 l = tangent_field_c2(ball.r, pt(Cx(1, 0), Cx(0, 0)));
  CHECK(std::abs(l[0]) < 1e-12);
  CHECK(std::abs(l[1] - Cx(-1, 0)) < 1e-12);

  DomainSpec worm = worm_defining(WormParams::make(kPi));
  Field1_0 lw = tangent_field_c2(worm.r, pt(Cx(0, 0), Cx(1, 0)));
  CHECK(std::abs(lw[0]) < 1e-12);
  CHECK(std::abs(std::abs(lw[1]) - 1.0) < 1e-12);  // L proportional to d/dw

  Rng rng = seeded(3);
  for (int i = 0; i < 30; ++i) {
    CPoint p = worm.boundary_sample(rng);
    Field1_0 lt = tangent_field_c2(worm.r, p);
    auto g = wirtinger_grad(worm.r, p);
    CHECK(std::abs(lt[0] * g[0] + lt[1] * g[1]) < 1e-10);  // L r = 0
    CHECK(lt.sq_sum() == Approx(1.0).margin(1e-14));       // g(L, L) = 1/2
    CHECK(std::abs(metric_g(lt, lt) - Cx(0.5, 0)) < 1e-14);
  }
}

TEST_CASE("third_order: vanishing cases and the quartic tensor oracle", "[calculus]") {
  // Constant-Hessian field with constant frames: all third derivatives vanish.
  ScalarField quad{[](const CPoint& p) { return std::norm(p[0]) + 2 * std::norm(p[1]); },
                   nullptr, nullptr, "quad", nullptr};
  FieldFn cn = [](const CPoint&) { return Field1_0(Cx(1, 0), Cx(0, 0)); };
  FieldFn cl = [](const CPoint&) { return Field1_0(Cx(0, 0), Cx(1, 0)); };
  CPoint p(Cx(0.3, 0.1), Cx(0.2, -0.4));
  CHECK(std::abs(third_order(quad, cn, cl, p, 1e-3)) < 1e-8);

  // Worm on Sigma: the term vanishes.
  DomainSpec worm = worm_defining(WormParams::make(kPi));
  FieldFn nf = [&](const CPoint& q) { return normal_field(worm.r, q); };
  FieldFn lf = [&](const CPoint& q) { return tangent_field_c2(worm.r, q); };
  for (const CPoint& q : worm_sigma_grid(WormParams::make(kPi), 5, 3))
    CHECK(std::abs(third_order(worm.r, nf, lf, q, 1e-3)) < 2e-4);

  // ||z||^4 against the dense FD third-derivative tensor contraction.
  ScalarField quartic = quartic_field();
  Field1_0 nv(Cx(0.6, 0.2), Cx(-0.1, 0.7));
  Field1_0 lv(Cx(0.3, -0.5), Cx(0.8, 0.1));
  FieldFn nfc = [&](const CPoint&) { return nv; };
  FieldFn lfc = [&](const CPoint&) { return lv; };
  CPoint q(Cx(0.7, -0.3), Cx(0.4, 0.6));
  Cx got = third_order(quartic, nfc, lfc, q, 1e-3);
  Cx want = 0;
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t m = 0; m < 2; ++m)
      for (std::size_t k = 0; k < 2; ++k)
        want += lv[j] * nv[m] * std::conj(lv[k]) *
                third_tensor_fd(quartic, q, j, m, k, 1e-3);
  CHECK(std::abs(got - want) < 1e-3 * std::max(1.0, std::abs(want)));

  // Step far below the noise floor trips the two-step Richardson check.
  CHECK_THROWS_AS(third_order(quartic, nfc, lfc, q, 1e-14), NoConvergenceError);
}

TEST_CASE("normal_limit: constant-ratio case and error contracts", "[calculus]") {
  DomainSpec worm = worm_defining(WormParams::make(kPi));
  CPoint p(Cx(0, 0), Cx(1, 0));

  const double c = 2.5;
  auto q = [&](const CPoint& z) { return Cx(-c * worm.r.value(z), 0.0); };
  NormalLimit nl = normal_limit(q, worm.r, p);
  CHECK(std::abs(nl.value - Cx(c, 0)) < 1e-10);
  CHECK(nl.ratios.size() == defaults::richardson_depths().size());

  auto bad = [](const CPoint&) { return Cx(1, 0); };
  CHECK_THROWS_AS(normal_limit(bad, worm.r, p), PreconditionError);

  // sqrt(-r) / (-r) diverges: the raw sequence grows and is reported.
  auto cusp = [&](const CPoint& z) {
    return Cx(std::sqrt(std::max(0.0, -worm.r.value(z))), 0.0);
  };
  CHECK_THROWS_AS(normal_limit(cusp, worm.r, p), NoConvergenceError);
  try {
    normal_limit(cusp, worm.r, p);
  } catch (const NoConvergenceError& e) {
    CHECK(e.sequence.size() >= 3);
  }

  CHECK_THROWS_AS(normal_limit(q, worm.r, p, {1e-2, 1e-2, 1e-3}), PreconditionError);
}

TEST_CASE("normal_limit reproduces both boundary-limit identities on the worm",
          "[calculus]") {
  WormParams params = WormParams::make(kPi);
  DomainSpec worm = worm_defining(params);
  Weight psi = build_psi_radial(0.5, kPi / 2, kPi);
  ScalarField rho = rho_from(worm.r, psi.field);

  auto q1 = lbar_rho_fn(worm.r, rho);
  auto q2 = hess_ll_fn(worm.r, rho);
  std::vector<CPoint> pts = worm_sigma_grid(params, 5, 4);  // 20 points
  REQUIRE(pts.size() == 20);
  for (const CPoint& p : pts) {
    NormalLimit l1 = normal_limit(q1, rho, p);
    Cx rhs1 = normal_quotient_oracle(q1, rho, worm.r, p);
    CHECK(std::abs(l1.value - rhs1) < 1e-4);

    NormalLimit l2 = normal_limit(q2, rho, p);
    Cx rhs2 = normal_quotient_oracle(q2, rho, worm.r, p);
    CHECK(std::abs(l2.value - rhs2) < 1e-4);
  }
}

TEST_CASE("min_eig_hermitian: closed form, Jacobi, and the root oracle", "[calculus]") {
  CHECK(min_eig_hermitian(HermMatrix::identity(2)) == Approx(1.0));

  HermMatrix h(2);
  h.at(0, 0) = 1;
  h.at(1, 1) = 1;
  h.at(0, 1) = Cx(0, 1);
  h.at(1, 0) = Cx(0, -1);
  CHECK(min_eig_hermitian(h) == Approx(0.0).margin(1e-14));

  // Random 2x2 vs the characteristic-polynomial quadratic formula.
  Rng rng = seeded(17);
  for (int i = 0; i < 200; ++i) {
    HermMatrix m(2);
    m.at(0, 0) = uni(rng, -2, 2);
    m.at(1, 1) = uni(rng, -2, 2);
    m.at(0, 1) = random_cx(rng, 2);
    m.at(1, 0) = std::conj(m.at(0, 1));
    double tr = m.at(0, 0).real() + m.at(1, 1).real();
    double det = m.at(0, 0).real() * m.at(1, 1).real() - std::norm(m.at(0, 1));
    double root = (tr - std::sqrt(tr * tr - 4 * det)) / 2;
    CHECK(min_eig_hermitian(m) == Approx(root).margin(1e-12));
  }

  // 3x3 via cyclic Jacobi: U diag(-0.3, 0.7, 2.1) U^*.
  std::vector<std::vector<Cx>> u = {{{1, 0.2}, {0.3, -0.1}, {0.2, 0.5}},
                                    {{-0.4, 0.7}, {1, 0}, {0.1, 0.1}},
                                    {{0.2, 0}, {-0.5, 0.3}, {1, -0.2}}};
  // Gram-Schmidt to make u unitary.
  for (int c = 0; c < 3; ++c) {
    for (int b = 0; b < c; ++b) {
      Cx proj = 0;
      for (int r = 0; r < 3; ++r) proj += u[r][c] * std::conj(u[r][b]);
      for (int r = 0; r < 3; ++r) u[r][c] -= proj * u[r][b];
    }
    double nn = 0;
    for (int r = 0; r < 3; ++r) nn += std::norm(u[r][c]);
    nn = std::sqrt(nn);
    for (int r = 0; r < 3; ++r) u[r][c] /= nn;
  }
  std::vector<double> d = {-0.3, 0.7, 2.1};
  HermMatrix m3(3);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      Cx s = 0;
      for (int k = 0; k < 3; ++k) s += u[r][k] * d[k] * std::conj(u[c][k]);
      m3.at(r, c) = s;
    }
  m3.symmetrize();
  CHECK(min_eig_hermitian(m3) == Approx(-0.3).margin(1e-10));

  HermMatrix nonh(2);
  nonh.at(0, 1) = Cx(1, 0);
  nonh.at(1, 0) = Cx(0.5, 0);
  CHECK_THROWS_AS(min_eig_hermitian(nonh), PreconditionError);
}

TEST_CASE("Levi form is nonnegative on catalog boundaries", "[calculus]") {
  for (double beta : {0.75 * kPi, kPi, 2 * kPi}) {
    DomainSpec worm = worm_defining(WormParams::make(beta));
    Rng rng = seeded(23);
    for (int i = 0; i < 120; ++i) {
      CPoint p = worm.boundary_sample(rng);
      Field1_0 l = tangent_field_c2(worm.r, p);
      CHECK(hess_pair(complex_hessian(worm.r, p), l, l).real() >= -1e-7);
    }
  }
  DomainSpec ball = ball_defining({1.0, 1.0});
  Rng rng = seeded(29);
  for (int i = 0; i < 50; ++i) {
    CPoint p = ball.boundary_sample(rng);
    Field1_0 l = tangent_field_c2(ball.r, p);
    // Strongly pseudoconvex: Levi form = 1 on the unit tangent.
    CHECK(hess_pair(complex_hessian(ball.r, p), l, l).real() == Approx(1.0).margin(1e-9));
  }
}

TEST_CASE("Levi degeneracy on the worm annulus", "[calculus]") {
  // With Hess_r(L, L) = 0 the mixed entries against orthogonal tangents
  // vanish; in C^2 this reduces to the annulus table values.
  WormParams params = WormParams::make(kPi);
  DomainSpec worm = worm_defining(params);
  for (const CPoint& p : worm_sigma_grid(params, 10, 6)) {
    Field1_0 l = tangent_field_c2(worm.r, p);
    CHECK(std::abs(hess_pair(complex_hessian(worm.r, p), l, l)) <= 1e-8);
  }
}
