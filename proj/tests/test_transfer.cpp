#include <doctest.h>

#include "support.hpp"
#include "vessel/errors.hpp"
#include "vessel/placement_genus0.hpp"
#include "vessel/transfer.hpp"

using namespace vessel;
using testsupport::Rng;
using testsupport::scalar_rmf;

namespace {
const ToleranceProfile tol;
}

TEST_CASE("joint spectrum of diagonal commuting matrices") {
  CMat a1 = CMat::Zero(2, 2), a2 = CMat::Zero(2, 2);
  a1.diagonal() << 1, 2;
  a2.diagonal() << 3, 4;
  SpectrumReport rep = joint_spectrum(a1, a2, tol);
  REQUIRE(rep.points.size() == 2);
  CHECK(std::abs(rep.points[0].lambda1 - 1.0) < 1e-12);
  CHECK(std::abs(rep.points[0].lambda2 - 3.0) < 1e-12);
  CHECK(std::abs(rep.points[1].lambda1 - 2.0) < 1e-12);
  CHECK(std::abs(rep.points[1].lambda2 - 4.0) < 1e-12);
}

TEST_CASE("joint spectrum of the zero pair has one cluster") {
  SpectrumReport rep = joint_spectrum(CMat::Zero(2, 2), CMat::Zero(2, 2), tol);
  REQUIRE(rep.points.size() == 1);
  CHECK(rep.points[0].mult == 2);
  CHECK(std::abs(rep.points[0].lambda1) < 1e-10);
}

TEST_CASE("joint spectrum of a shared Jordan structure") {
  CMat a1(2, 2);
  a1 << 1, 1, 0, 1;
  CMat a2 = a1 * a1;
  SpectrumReport rep = joint_spectrum(a1, a2, tol);
  REQUIRE(rep.points.size() == 1);
  CHECK(rep.points[0].mult == 2);
  CHECK(std::abs(rep.points[0].lambda1 - 1.0) < 1e-7);
  CHECK(std::abs(rep.points[0].lambda2 - 1.0) < 1e-7);
}

TEST_CASE("non-commuting input is rejected") {
  CMat a1(2, 2), a2(2, 2);
  a1 << 0, 1, 0, 0;
  a2 << 0, 0, 1, 0;
  CHECK_THROWS_AS(joint_spectrum(a1, a2, tol), std::invalid_argument);
}

TEST_CASE("vessel spectrum lies on the curve at smooth points") {
  Rng rng(71);
  for (int trial = 0; trial < 6; ++trial) {
    Vessel v = testsupport::random_line_vessel(rng, 6);
    SpectrumReport rep = vessel_spectrum(v, tol);
    REQUIRE(rep.curve_checked);
    int total = 0;
    for (const auto& p : rep.points) {
      total += p.mult;
      CHECK(p.on_curve);
      CHECK(p.smooth);
    }
    CHECK(total == v.n);
  }
}

TEST_CASE("transfer value at infinity and with C = 0 is D v") {
  Rng rng(81);
  Vessel v = testsupport::random_line_vessel(rng, 4);
  DiscriminantResult disc = discriminant_polys(v, tol);
  CurveSample sample = sample_curve_points(disc.p_in, 5, 3, tol);

  CVec one = CVec::Ones(1);
  REQUIRE(sample.at_infinity.size() == 1);
  TransferValue at_inf = transfer_eval(v, sample.at_infinity[0], one, tol);
  CHECK((at_inf.value - v.D * one).norm() < 1e-14);

  Vessel c0 = v;
  c0.C = CMat::Zero(1, v.n);
  for (const auto& p : sample.affine) {
    TransferValue w = transfer_eval(c0, p, one, tol);
    CHECK((w.value - c0.D * one).norm() < 1e-12 * c0.D.norm());
  }
}

TEST_CASE("xi independence and fiber preservation on line vessels") {
  Rng rng(91);
  for (int trial = 0; trial < 5; ++trial) {
    Vessel v = testsupport::random_line_vessel(rng, 6);
    DiscriminantResult disc = discriminant_polys(v, tol);
    CurveSample sample = sample_curve_points(disc.p_in, 10, 100 + trial, tol);
    for (const auto& p : sample.affine) {
      FiberBasis fb = curve_fiber(v, p, FiberSide::input, tol);
      CVec vec = fb.basis.col(0);
      std::vector<TransferValue> vals;
      for (int k = 0; k < 16 && vals.size() < 2; ++k) {
        double th = 3.14159265358979 * k / 16.0;
        try {
          vals.push_back(
              transfer_eval_with_direction(v, p, vec, Direction(std::cos(th), std::sin(th)), tol));
        } catch (const PoleError&) {
          continue;
        }
      }
      if (vals.size() < 2) continue;
      CHECK(testsupport::rel_gap(vals[0].value, vals[1].value) < 1e-8);
      CHECK(vals[0].out_residual < 1e-8);
      CHECK(vals[1].out_residual < 1e-8);
    }
  }
}

TEST_CASE("restricted transfer scalar case") {
  LineVesselSpec spec;
  spec.n = 1;
  spec.A1 = CMat::Constant(1, 1, Complex(0.4, 0.1));
  spec.c = 1.0;
  spec.d = 0.0;
  spec.sigma1 = 1.0;
  spec.b = CVec::Constant(1, Complex(2.0, 0.0));
  spec.c_row = CMat::Constant(1, 1, Complex(3.0, 0.0));
  spec.D = Complex(0.5, 0.0);
  Vessel v = build_line_vessel(spec, tol);
  Direction xi(1.0, 0.0);
  RealizedRMF s = restricted_transfer(v, xi, tol);
  CHECK((s.A - spec.A1).norm() < 1e-14);
  CHECK((s.B - spec.b * spec.sigma1).norm() < 1e-14);
  // S(l) = d + cb / (l - a)
  Complex l(2.0, 0.0);
  Complex expect = spec.D + Complex(3.0) * Complex(2.0) / (l - Complex(0.4, 0.1));
  CHECK(std::abs(rmf_eval(s, l, tol)(0, 0) - expect) < 1e-12);
}

TEST_CASE("restricted transfer rejects non-regular directions") {
  Vessel v;
  v.n = 1;
  v.m = 2;
  v.m_star = 2;
  v.A1 = CMat::Zero(1, 1);
  v.A2 = CMat::Zero(1, 1);
  v.B_tilde = CMat::Zero(1, 2);
  v.C = CMat::Zero(2, 1);
  v.D = CMat::Identity(2, 2);
  v.D_tilde = CMat::Identity(2, 2);
  v.sigma1 = CMat::Identity(2, 2);
  v.sigma2 = CMat::Zero(2, 2);
  v.gamma = CMat::Zero(2, 2);
  v.sigma1_star = CMat::Identity(2, 2);
  v.sigma2_star = CMat::Zero(2, 2);
  v.gamma_star = CMat::Zero(2, 2);
  CHECK_THROWS_AS(restricted_transfer(v, Direction(0.0, 1.0), tol), std::invalid_argument);
  CHECK_NOTHROW(restricted_transfer(v, Direction(1.0, 0.0), tol));
}

TEST_CASE("rmf_eval basics") {
  RealizedRMF inv_l;  // W(l) = 1/l
  inv_l.A = CMat::Zero(1, 1);
  inv_l.B = CMat::Ones(1, 1);
  inv_l.C = CMat::Ones(1, 1);
  inv_l.D = CMat::Zero(1, 1);
  CHECK(std::abs(rmf_eval(inv_l, 2.0, tol)(0, 0) - 0.5) < 1e-14);
  CHECK(std::abs(rmf_value_at_infinity(inv_l)(0, 0)) == 0.0);

  RealizedRMF no_b = inv_l;
  no_b.B = CMat::Zero(1, 1);
  no_b.D = CMat::Constant(1, 1, 3.0);
  CHECK(std::abs(rmf_eval(no_b, 1.7, tol)(0, 0) - 3.0) < 1e-14);

  try {
    rmf_eval(inv_l, 1e-14, tol);
    FAIL("expected PoleError");
  } catch (const PoleError& e) {
    CHECK(e.distance_to_pole <= 1e-13);
  }
}

TEST_CASE("rmf_inverse formulas and product check") {
  // W(l) = 1 + 1/l has inverse 1 - 1/(l+1): the inverse state matrix is -1.
  RealizedRMF w;
  w.A = CMat::Zero(1, 1);
  w.B = CMat::Ones(1, 1);
  w.C = CMat::Ones(1, 1);
  w.D = CMat::Ones(1, 1);
  RealizedRMF inv = rmf_inverse(w, tol);
  CHECK(std::abs(inv.A(0, 0) - Complex(-1.0)) < 1e-14);
  Complex l(3.0, 0.5);
  CHECK(std::abs(rmf_eval(inv, l, tol)(0, 0) - (1.0 - 1.0 / (l + 1.0))) < 1e-12);

  RealizedRMF c0 = w;
  c0.C = CMat::Zero(1, 1);
  RealizedRMF inv0 = rmf_inverse(c0, tol);
  CHECK((inv0.A - c0.A).norm() == 0.0);
  CHECK(std::abs(inv0.D(0, 0) - 1.0) < 1e-14);

  Rng rng(111);
  RealizedRMF r3;
  r3.A = rng.matrix(3, 3);
  r3.B = rng.matrix(3, 2);
  r3.C = rng.matrix(2, 3);
  r3.D = rng.matrix(2, 2) + 2.0 * CMat::Identity(2, 2);
  RealizedRMF r3inv = rmf_inverse(r3, tol);
  for (int k = 0; k < 5; ++k) {
    Complex l2 = Complex(4.0, 0.0) + rng.cplx(0.5);
    CMat prod = rmf_eval(r3, l2, tol) * rmf_eval(r3inv, l2, tol);
    CHECK((prod - CMat::Identity(2, 2)).norm() < 1e-8);
  }

  RealizedRMF singular = r3;
  singular.D = CMat::Zero(2, 2);
  CHECK_THROWS_AS(rmf_inverse(singular, tol), std::invalid_argument);
}

TEST_CASE("pole divisor examples") {
  RealizedRMF diag;
  diag.A = CMat::Zero(2, 2);
  diag.A.diagonal() << 1, 2;
  diag.B = CMat::Ones(2, 1);
  diag.C = CMat::Ones(1, 2);
  diag.D = CMat::Ones(1, 1);
  Divisor d = rmf_pole_divisor(diag, tol);
  REQUIRE(d.entries.size() == 2);
  CHECK(d.entries[0].mult == 1);
  CHECK(std::abs(d.entries[0].point - 1.0) < 1e-10);
  CHECK(std::abs(d.entries[1].point - 2.0) < 1e-10);
  CHECK(d.entries[0].direction.has_value());

  RealizedRMF inv_l;
  inv_l.A = CMat::Zero(1, 1);
  inv_l.B = CMat::Ones(1, 1);
  inv_l.C = CMat::Ones(1, 1);
  inv_l.D = CMat::Zero(1, 1);
  Divisor d2 = rmf_pole_divisor(inv_l, tol);
  REQUIRE(d2.entries.size() == 1);
  CHECK(d2.entries[0].mult == 1);
  CHECK(std::abs(d2.entries[0].point) < 1e-12);

  RealizedRMF jordan;
  jordan.A = CMat::Zero(2, 2);
  jordan.A(0, 1) = 1.0;
  jordan.B = CMat::Zero(2, 1);
  jordan.B(1, 0) = 1.0;
  jordan.C = CMat::Zero(1, 2);
  jordan.C(0, 0) = 1.0;
  jordan.D = CMat::Ones(1, 1);
  Divisor d3 = rmf_pole_divisor(jordan, tol);
  REQUIRE(d3.entries.size() == 1);
  CHECK(d3.entries[0].mult == 2);
  CHECK(std::abs(d3.entries[0].point) < 1e-8);

  RealizedRMF nonmin = diag;
  nonmin.C = CMat::Zero(1, 2);
  CHECK_THROWS_AS(rmf_pole_divisor(nonmin, tol), std::invalid_argument);
}

TEST_CASE("zero divisor examples") {
  // W(l) = (l - 1)/l realized as 1 - 1/l; zero at 1, its inverse's pole.
  RealizedRMF w = scalar_rmf({1.0}, {0.0}, 1.0);
  Divisor z = rmf_zero_divisor(w, tol);
  REQUIRE(z.entries.size() == 1);
  CHECK(std::abs(z.entries[0].point - 1.0) < 1e-9);

  RealizedRMF identity_like;
  identity_like.A = CMat::Zero(2, 2);
  identity_like.A.diagonal() << 1, 2;
  identity_like.B = CMat::Ones(2, 1);
  identity_like.C = CMat::Zero(1, 2);
  identity_like.D = CMat::Ones(1, 1);
  Divisor z2 = rmf_zero_divisor(identity_like, tol);  // W = I identically
  CHECK(z2.entries.empty());

  // Involution: zeros of the inverse are the poles of the original.
  RealizedRMF winv = rmf_inverse(w, tol);
  Divisor z3 = rmf_zero_divisor(winv, tol);
  REQUIRE(z3.entries.size() == 1);
  CHECK(std::abs(z3.entries[0].point) < 1e-9);
}

TEST_CASE("divisor containment") {
  Divisor empty;
  Divisor one;
  one.entries.push_back({Complex(0.0), 1, std::nullopt});
  Divisor two;
  two.entries.push_back({Complex(0.0), 2, std::nullopt});
  CHECK(divisor_contains(empty, one, tol));
  CHECK_FALSE(divisor_contains(two, one, tol));
  CHECK(divisor_contains(one, two, tol));

  Divisor close;
  close.entries.push_back({Complex(1.0 + 1e-9, 0.0), 1, std::nullopt});
  Divisor at_one;
  at_one.entries.push_back({Complex(1.0), 1, std::nullopt});
  CHECK(divisor_contains(at_one, close, tol));

  CVec d1(2), d2(2), d3(2);
  d1 << 1.0, 0.0;
  d2 << 2.0, 0.0;
  d3 << 0.0, 1.0;
  Divisor with_dir_a, with_dir_b, with_dir_c;
  with_dir_a.entries.push_back({Complex(0.0), 1, d1});
  with_dir_b.entries.push_back({Complex(0.0), 1, d2});  // parallel to d1
  with_dir_c.entries.push_back({Complex(0.0), 1, d3});  // orthogonal
  CHECK(divisor_contains(with_dir_a, with_dir_b, tol));
  CHECK_FALSE(divisor_contains(with_dir_a, with_dir_c, tol));
}

TEST_CASE("placement conditions: identical targets pass, scaled D fails") {
  Rng rng(121);
  RealizedRMF s = scalar_rmf({rng.cplx(), rng.cplx(), rng.cplx()},
                             {rng.cplx(2.0), rng.cplx(2.0), rng.cplx(2.0)}, 1.3);
  PlacementCheck same = placement_condition_check(s, s, tol);
  CHECK(same.zero_containment);
  CHECK(same.infinity_match);
  CHECK(same.conditions_hold);
  CHECK(same.lemma_consistent);

  RealizedRMF scaled = s;
  scaled.D = 2.0 * s.D;
  scaled.C = 2.0 * s.C;  // T = 2 S, same zeros, different value at infinity
  PlacementCheck diff = placement_condition_check(s, scaled, tol);
  CHECK_FALSE(diff.infinity_match);
  CHECK_FALSE(diff.conditions_hold);
}

TEST_CASE("divisor difference lemma on designed scalar instances") {
  Rng rng(131);
  for (int trial = 0; trial < 15; ++trial) {
    const int n = rng.integer(2, 5);
    std::vector<Complex> zeros, poles;
    for (int i = 0; i < n; ++i) {
      zeros.push_back(rng.cplx(2.0));
      poles.push_back(rng.cplx(2.0) + Complex(3.0, 0.0));
    }
    RealizedRMF s = scalar_rmf(zeros, poles, 1.0);

    // Shared-pole construction: R0 = 1 + K (lI - A)^-1 B has LP(R0) within
    // LP(S); T = S R0^-1 keeps the zeros of S.
    RealizedRMF r0 = s;
    r0.D = CMat::Ones(1, 1);
    r0.C = 0.3 * rng.matrix(1, n);
    RealizedRMF t = rmf_minimalize(rmf_compose(s, rmf_inverse(r0, tol)), tol);

    RealizedRMF r = rmf_minimalize(rmf_compose(rmf_inverse(t, tol), s), tol);
    bool lhs = divisor_contains(rmf_pole_divisor(r, tol), rmf_pole_divisor(s, tol), tol);
    bool rhs = divisor_contains(rmf_zero_divisor(t, tol), rmf_zero_divisor(s, tol), tol);
    CHECK(lhs == rhs);
    CHECK(rhs);  // by construction the zeros of T are the zeros of S
  }
}

TEST_CASE("pole divisor of a minimal restricted transfer has degree n") {
  Rng rng(141);
  for (int trial = 0; trial < 6; ++trial) {
    Vessel v = testsupport::random_line_vessel(rng, 6);
    Direction xi = find_regular_direction(v, tol);
    RealizedRMF s = restricted_transfer(v, xi, tol);
    Divisor d = rmf_pole_divisor(s, tol);
    CHECK(d.degree() == v.n);
  }
}
