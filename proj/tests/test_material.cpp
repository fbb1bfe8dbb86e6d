#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "magelas/material.hpp"
#include "test_util.hpp"

using namespace magelas;

namespace {
const MaterialLaw kDefault{}; // p=4, q=2, c_w=1, a=0.3, b=-0.1

double stored(const Mat3 &a) { return stored_energy(a, kDefault); }
} // namespace

TEST_CASE("growth functions: pinned values") {
  CHECK(g_growth(1.0, 4.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(g_growth(2.0, 4.0) == doctest::Approx(4.25).epsilon(1e-14));
  CHECK(h_growth(2.0, 2.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(h_growth(1.0, 2.0) == doctest::Approx(0.0).epsilon(1e-14));
  // h_q has a critical point at t = 1: central-difference oracle.
  const double d = (h_growth(1.0 + 1e-6, 2.0) - h_growth(1.0 - 1e-6, 2.0)) /
                   2e-6;
  CHECK(std::abs(d) < 1e-9);
  CHECK(h_growth_deriv(1.0, 2.0) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("growth functions: convexity lower bounds") {
  // g_p(t) >= (1/(2p)) (t^2 + t^p) on [0, 10].
  for (double p : {3.0, 4.0, 6.0})
    for (int k = 0; k <= 1000; ++k) {
      const double t = 10.0 * k / 1000.0;
      CHECK(g_growth(t, p) >=
            (t * t + std::pow(t, p)) / (2.0 * p) - 1e-12);
    }
  // h_q(t) + (q+1)/q >= 1/t on (0, 10].
  for (double q : {1.5, 2.0, 3.0})
    for (int k = 1; k <= 1000; ++k) {
      const double t = 10.0 * k / 1000.0;
      CHECK(h_growth(t, q) + (q + 1.0) / q >= 1.0 / t - 1e-12);
    }
}

TEST_CASE("distance to SO(3)") {
  // Oracle: 2I has singular values (2,2,2), so dist = sqrt(3).
  CHECK(dist_SO3(Mat3::identity() * 2.0) ==
        doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
  // Reflection: diag(1,1,-1) has dist 2 (smallest singular value sign flips).
  CHECK(dist_SO3(Mat3::diag(1, 1, -1)) == doctest::Approx(2.0).epsilon(1e-12));
  // Rotations are at distance zero.
  auto g = testutil::rng(3);
  for (int k = 0; k < 10; ++k)
    CHECK(dist_SO3(testutil::random_rotation(g)) < 1e-7);
  // Brute-force oracle on random matrices: dist <= |A - Q| for any rotation Q.
  for (int k = 0; k < 10; ++k) {
    const Mat3 a = testutil::random_matrix(g, 1.5);
    const double d = dist_SO3(a);
    for (int t = 0; t < 100; ++t)
      CHECK(d <= fnorm(a - testutil::random_rotation(g)) + 1e-9);
  }
}

TEST_CASE("stored energy: ground states and sentinel") {
  CHECK(stored(Mat3::identity()) == doctest::Approx(0.0).epsilon(1e-14));
  auto g = testutil::rng(5);
  for (int k = 0; k < 10; ++k)
    CHECK(stored(testutil::random_rotation(g)) < 1e-13);
  CHECK(std::isinf(stored(Mat3::diag(1, 1, -1))));
  CHECK(std::isinf(stored(Mat3::zero())));
  CHECK(stored(Mat3::diag(1, 1, -1)) > 0.0); // +infinity, not -infinity
}

TEST_CASE("stored energy: frame indifference") {
  auto g = testutil::rng(7);
  const Mat3 a = Mat3::identity() + testutil::random_matrix(g, 0.2);
  REQUIRE(det(a) > 0.0);
  const double w = stored(a);
  for (int k = 0; k < 20; ++k) {
    const Mat3 q = testutil::random_rotation(g);
    CHECK(stored(q * a) == doctest::Approx(w).epsilon(1e-12));
  }
}

TEST_CASE("spontaneous strain family") {
  const MaterialLaw &law = kDefault;
  // Lambda(e1) = diag(a, b, b).
  const Mat3 l = spontaneous_strain(Vec3{1, 0, 0}, law);
  CHECK(fnorm(l - Mat3::diag(0.3, -0.1, -0.1)) < 1e-15);

  // |Lambda(z)| = sqrt(a^2 + 2 b^2) independent of z.
  auto g = testutil::rng(13);
  const double ell = std::sqrt(0.3 * 0.3 + 2.0 * 0.1 * 0.1);
  for (int k = 0; k < 25; ++k) {
    const Vec3 z = testutil::random_unit(g);
    CHECK(fnorm(spontaneous_strain(z, law)) ==
          doctest::Approx(ell).epsilon(1e-13));
    // tr Lambda(z) = a + 2b, also z-independent.
    CHECK(trace(spontaneous_strain(z, law)) ==
          doctest::Approx(0.1).epsilon(1e-12));
  }

  // a = b collapses to a spherical strain for every z.
  MaterialLaw iso = law;
  iso.a = iso.b = 0.2;
  for (int k = 0; k < 5; ++k) {
    const Vec3 z = testutil::random_unit(g);
    CHECK(fnorm(spontaneous_strain(z, iso) - Mat3::identity() * 0.2) < 1e-14);
  }

  // Lambda_eps = I + eps Lambda and its inverse multiply to I.
  for (double eps : {0.2, 0.05, 0.01}) {
    for (int k = 0; k < 10; ++k) {
      const Vec3 z = testutil::random_unit(g);
      const Mat3 le = scaled_strain(z, eps, law);
      CHECK(fnorm(le - (Mat3::identity() + spontaneous_strain(z, law) * eps)) <
            1e-14);
      const Mat3 li = scaled_strain_inverse(z, eps, law);
      CHECK(fnorm(le * li - Mat3::identity()) < 1e-14);
      // det Lambda_eps = (1+eps a)(1+eps b)^2 to 1e-14.
      const double ae = 1.0 + eps * law.a, be = 1.0 + eps * law.b;
      CHECK(det(le) == doctest::Approx(ae * be * be).epsilon(1e-14));
    }
  }

  // Inadmissible scaling refuses.
  CHECK_THROWS_AS((void)scaled_strain(Vec3{1, 0, 0}, -4.0, law),
                  std::domain_error);
  CHECK_THROWS_AS((void)spontaneous_strain(Vec3{1, 1, 0}, law),
                  std::invalid_argument);
}

TEST_CASE("objectivity of the inverse strain") {
  const MaterialLaw &law = kDefault;
  auto g = testutil::rng(19);
  for (int k = 0; k < 20; ++k) {
    const Vec3 z = testutil::random_unit(g);
    const Mat3 q = testutil::random_rotation(g);
    const Mat3 lhs = scaled_strain_inverse(q * z, 0.1, law);
    const Mat3 rhs = q * scaled_strain_inverse(z, 0.1, law) * transpose(q);
    CHECK(fnorm(lhs - rhs) < 1e-12);
  }
}

TEST_CASE("derivative of the inverse strain (finite-difference oracle)") {
  const MaterialLaw &law = kDefault;
  auto g = testutil::rng(29);
  for (int k = 0; k < 10; ++k) {
    Vec3 z = testutil::random_unit(g);
    for (int c = 0; c < 3; ++c) {
      const double h = 1e-6;
      Vec3 zp = z, zm = z;
      zp[c] += h;
      zm[c] -= h;
      // Compare against the unconstrained difference quotient of the same
      // rank-one formula (the derivative is taken in ambient coordinates).
      const double ca = 1.0 / (1.0 + 0.1 * law.a);
      const double cb = 1.0 / (1.0 + 0.1 * law.b);
      auto li = [&](const Vec3 &v) {
        const Mat3 vv = outer(v, v);
        return vv * ca + (Mat3::identity() - vv) * cb;
      };
      const Mat3 fd = (li(zp) - li(zm)) * (1.0 / (2.0 * h));
      const Mat3 an = scaled_strain_inverse_deriv(z, 0.1, law, c);
      CHECK(fnorm(fd - an) < 1e-8);
    }
  }
}

TEST_CASE("stored energy gradient matches finite differences") {
  const MaterialLaw &law = kDefault;
  auto g = testutil::rng(37);
  for (int k = 0; k < 8; ++k) {
    // Mix of near-identity and stretched states, always det > 0.
    const double s = (k % 2 == 0) ? 0.15 : 0.6;
    Mat3 a = Mat3::identity() + testutil::random_matrix(g, s);
    if (!(det(a) > 0.05))
      continue;
    const Mat3 grad = stored_energy_gradient(a, law);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double h = 1e-6;
        Mat3 ap = a, am = a;
        ap(i, j) += h;
        am(i, j) -= h;
        const double fd =
            (stored_energy(ap, law) - stored_energy(am, law)) / (2.0 * h);
        CHECK(grad(i, j) == doctest::Approx(fd).epsilon(5e-5));
      }
  }
}

TEST_CASE("quadratic form: closed form and extraction") {
  const MaterialLaw &law = kDefault; // q = 2, c_w = 1
  // Q_W(I) = |I|^2 + 3 (tr I)^2 = 3 + 27 = 30.
  CHECK(quadratic_form(Mat3::identity(), law) ==
        doctest::Approx(30.0).epsilon(1e-14));
  CHECK(extract_elastic_form(stored, Mat3::identity()) ==
        doctest::Approx(30.0).epsilon(1e-4));

  // Skew matrices carry no quadratic energy.
  Mat3 skew = Mat3::zero();
  skew(0, 1) = 1.0;
  skew(1, 0) = -1.0;
  skew(1, 2) = 0.5;
  skew(2, 1) = -0.5;
  CHECK(quadratic_form(skew, law) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(std::abs(extract_elastic_form(stored, skew)) < 1e-6);

  // Extraction matches the closed form on random directions.
  auto g = testutil::rng(41);
  for (int k = 0; k < 12; ++k) {
    const Mat3 b = testutil::random_matrix(g);
    const double qf = quadratic_form(b, law);
    CHECK(extract_elastic_form(stored, b) ==
          doctest::Approx(qf).epsilon(2e-5));
  }

  // Richardson stability: values at h and h/2 agree to 1e-5 relative.
  const Mat3 b = testutil::random_matrix(g);
  const double v1 = extract_elastic_form(stored, b, 1e-4);
  const double v2 = extract_elastic_form(stored, b, 5e-5);
  CHECK(std::abs(v1 - v2) <= 1e-5 * std::max(1.0, std::abs(v1)));

  // C_W is the polarization of Q_W: C_W(B):B = Q_W(B).
  for (int k = 0; k < 10; ++k) {
    const Mat3 bb = testutil::random_matrix(g);
    CHECK(ddot(elastic_tensor_apply(bb, law), bb) ==
          doctest::Approx(quadratic_form(bb, law)).epsilon(1e-13));
  }
}

TEST_CASE("taylor expansion: W(I + sB) = 1/2 s^2 Q_W(B) + o(s^2)") {
  const MaterialLaw &law = kDefault;
  auto g = testutil::rng(43);
  const Mat3 b = testutil::random_matrix(g);
  const double qf = quadratic_form(b, law);
  double prev = std::numeric_limits<double>::infinity();
  for (double s : {1e-1, 1e-2, 1e-3}) {
    const double w = stored_energy(Mat3::identity() + b * s, law);
    const double resid = std::abs(w - 0.5 * s * s * qf) / (s * s);
    CHECK(resid < prev);
    prev = resid;
  }
  CHECK(prev < 1e-2);
}

TEST_CASE("nonfinite density is refused by the extractor") {
  auto bad = [](const Mat3 &) {
    return std::numeric_limits<double>::quiet_NaN();
  };
  CHECK_THROWS_AS((void)extract_elastic_form(bad, Mat3::identity()),
                  std::domain_error);
}

TEST_CASE("law validation") {
  MaterialLaw law;
  law.p = 2.0;
  CHECK_THROWS_AS(law.validate(), std::invalid_argument);
  law = MaterialLaw{};
  law.q = 1.0;
  CHECK_THROWS_AS(law.validate(), std::invalid_argument);
  law = MaterialLaw{};
  law.c_w = 0.0;
  CHECK_THROWS_AS(law.validate(), std::invalid_argument);
  CHECK_NOTHROW(MaterialLaw{}.validate());
}
