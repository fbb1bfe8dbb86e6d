// Stray-field solver: padded problems, magnetization data, the Hockney
// solve, and the magnetostatic energy with its weak-form cross check.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "magelas/grid.hpp"
#include "magelas/stray.hpp"
#include "test_util.hpp"

using namespace magelas;

namespace {

template <class F> VectorField sample_vector(const Grid &g, const F &f) {
  VectorField out(g);
  for (int i = 0; i < g.n[0]; ++i)
    for (int j = 0; j < g.n[1]; ++j)
      for (int k = 0; k < g.n[2]; ++k)
        out(i, j, k) = f(g.center(i, j, k));
  return out;
}

// Smooth bump supported in |t| < 1 (C^2 across the edge).
double cut(double t) {
  const double s = 1.0 - t * t;
  return s > 0.0 ? s * s * s : 0.0;
}

// Compactly supported smooth magnetization in the middle of the unit box.
VectorField smooth_bump_field(const Grid &g, const Vec3 &amp) {
  return sample_vector(g, [&](const Vec3 &x) {
    const double w = cut((x.x - 0.5) / 0.35) * cut((x.y - 0.5) / 0.35) *
                     cut((x.z - 0.5) / 0.35);
    return Vec3{amp.x * w, amp.y * w * (1.0 + 0.5 * x.x),
                amp.z * w * (1.0 - 0.4 * x.y)};
  });
}

double max_component_diff(const VectorField &a, const VectorField &b) {
  double m = 0.0;
  for (std::size_t c = 0; c < a.data.size(); ++c) {
    m = std::max(m, std::abs(a[c].x - b[c].x));
    m = std::max(m, std::abs(a[c].y - b[c].y));
    m = std::max(m, std::abs(a[c].z - b[c].z));
  }
  return m;
}

double l2_norm(const VectorField &f) {
  return std::sqrt(deterministic_cell_sum(f.grid, [&](std::size_t c) {
                     return dot(f[c], f[c]);
                   }) *
                   f.grid.cell_volume());
}

} // namespace

TEST_CASE("padded problem layout and identity datum") {
  const Grid inner = Grid::unit_cube(8);
  StrayProblem p = make_stray_problem(inner, 2);

  CHECK(p.padded.n[0] == 16);
  CHECK(p.padded.spacing.x == inner.spacing.x);
  // Centered: the padded box is [-0.5, 1.5]^3.
  CHECK(p.padded.origin.x == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(p.padded.origin.z == doctest::Approx(-0.5).epsilon(1e-14));

  // Identity datum embeds m exactly and leaves the margin zero.
  const VectorField m = sample_vector(inner, [](const Vec3 &x) {
    return Vec3{x.x, 2.0 * x.y - 1.0, x.z * x.x};
  });
  const VectorField zeta = magnetization_datum(m, p);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      for (int k = 0; k < 8; ++k) {
        const Vec3 a = zeta(i + 4, j + 4, k + 4);
        const Vec3 b = m(i, j, k);
        CHECK(a.x == b.x);
        CHECK(a.y == b.y);
        CHECK(a.z == b.z);
      }
  double margin_norm = 0.0;
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      for (int k = 0; k < 16; ++k)
        if (i < 4 || i >= 12 || j < 4 || j >= 12 || k < 4 || k >= 12)
          margin_norm += norm(zeta(i, j, k));
  CHECK(margin_norm == 0.0);

  CHECK_THROWS_AS(make_stray_problem(inner, 1), std::invalid_argument);
  // Odd margin cannot be centered.
  CHECK_THROWS_AS(make_stray_problem(Grid::unit_cube(5), 2),
                  std::invalid_argument);
  // Datum on the wrong grid.
  CHECK_THROWS_AS(magnetization_datum(zeta, p), std::invalid_argument);
}

TEST_CASE("zero datum solves to the zero field") {
  StrayProblem p = make_stray_problem(Grid::unit_cube(8), 2);
  solve_stray_field(p);
  CHECK(p.solved);
  double vmax = 0.0, hmax = 0.0;
  for (std::size_t c = 0; c < p.v.data.size(); ++c) {
    vmax = std::max(vmax, std::abs(p.v[c]));
    hmax = std::max(hmax, norm(p.h[c]));
  }
  CHECK(vmax == 0.0);
  CHECK(hmax == 0.0);
  CHECK(stray_energy(p.h, p.zeta) == 0.0);
  CHECK(stray_identity_residual(p.h, p.zeta) == 0.0);
}

TEST_CASE("uniformly magnetized ball reproduces the -m/3 interior field") {
  set_thread_count(8);
  const int n = 64;
  const Grid inner = Grid::unit_cube(n);
  StrayProblem p = make_stray_problem(inner, 2);

  const Vec3 center{0.5, 0.5, 0.5};
  const double radius = 0.25;
  const VectorField m =
      uniform_ball_magnetization(inner, center, radius, {0, 0, 1});
  p.zeta = magnetization_datum(m, p);
  solve_stray_field(p);

  // Interior field -m/3 componentwise within 5%, away from the boundary
  // shell (three cells).
  const double h = inner.spacing.x;
  const double tol = 0.05 / 3.0;
  const int ox = (p.padded.n[0] - n) / 2;
  double worst = 0.0;
  int checked = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const Vec3 x = inner.center(i, j, k);
        if (norm(x - center) > radius - 3.0 * h)
          continue;
        const Vec3 hv = p.h(i + ox, j + ox, k + ox);
        worst = std::max({worst, std::abs(hv.x), std::abs(hv.y),
                          std::abs(hv.z + 1.0 / 3.0)});
        ++checked;
      }
  CHECK(checked > 1000);
  CHECK(worst <= tol);

  // Energy: (1/3) * (4 pi / 3) R^3, interior plus exterior dipole tail.
  const double exact = (4.0 * M_PI / 9.0) * radius * radius * radius;
  const double e = stray_energy(p.h, p.zeta);
  CHECK(std::abs(e - exact) / exact <= 0.05);

  // Weak-form identity within 2% at this resolution.
  CHECK(stray_identity_residual(p.h, p.zeta) <= 0.02);

  // Zero-mean potential.
  const double mean =
      deterministic_cell_sum(p.padded,
                             [&](std::size_t c) { return p.v[c]; }) /
      double(p.padded.size());
  CHECK(std::abs(mean) <= 1e-12);

  // h is a discrete gradient, so the centered curl vanishes to roundoff.
  const Grid &pg = p.padded;
  double curl_max = 0.0;
  for (int i = 1; i < pg.n[0] - 1; i += 3)
    for (int j = 1; j < pg.n[1] - 1; j += 3)
      for (int k = 1; k < pg.n[2] - 1; k += 3) {
        const double cx =
            (p.h(i, j + 1, k).z - p.h(i, j - 1, k).z) / (2.0 * pg.spacing.y) -
            (p.h(i, j, k + 1).y - p.h(i, j, k - 1).y) / (2.0 * pg.spacing.z);
        const double cy =
            (p.h(i, j, k + 1).x - p.h(i, j, k - 1).x) / (2.0 * pg.spacing.z) -
            (p.h(i + 1, j, k).z - p.h(i - 1, j, k).z) / (2.0 * pg.spacing.x);
        const double cz =
            (p.h(i + 1, j, k).y - p.h(i - 1, j, k).y) / (2.0 * pg.spacing.x) -
            (p.h(i, j + 1, k).x - p.h(i, j - 1, k).x) / (2.0 * pg.spacing.y);
        curl_max = std::max({curl_max, std::abs(cx), std::abs(cy),
                             std::abs(cz)});
      }
  CHECK(curl_max <= 1e-10);
  set_thread_count(1);
}

TEST_CASE("solve is linear and the energy is its quadratic form") {
  const Grid inner = Grid::unit_cube(16);
  StrayProblem p = make_stray_problem(inner, 2);

  const VectorField m1 = smooth_bump_field(inner, {1.0, 0.3, -0.2});
  const VectorField m2 = smooth_bump_field(inner, {-0.4, 0.8, 0.5});
  VectorField m12(inner);
  for (std::size_t c = 0; c < m12.data.size(); ++c)
    m12[c] = m1[c] + m2[c];

  p.zeta = magnetization_datum(m1, p);
  solve_stray_field(p);
  const VectorField h1 = p.h;
  const double e1 = stray_energy(p.h, p.zeta);

  p.zeta = magnetization_datum(m2, p);
  solve_stray_field(p);
  const VectorField h2 = p.h;

  p.zeta = magnetization_datum(m12, p);
  solve_stray_field(p);
  VectorField hsum(p.padded);
  for (std::size_t c = 0; c < hsum.data.size(); ++c)
    hsum[c] = h1[c] + h2[c];
  CHECK(max_component_diff(p.h, hsum) <= 1e-10);

  // Doubling the datum quadruples the energy.
  VectorField m2x(inner);
  for (std::size_t c = 0; c < m2x.data.size(); ++c)
    m2x[c] = m1[c] * 2.0;
  p.zeta = magnetization_datum(m2x, p);
  solve_stray_field(p);
  const double e4 = stray_energy(p.h, p.zeta);
  CHECK(std::abs(e4 - 4.0 * e1) <= 1e-9 * std::max(1.0, 4.0 * e1));
}

TEST_CASE("deformed magnetization datum: dilation, charge, refusals") {
  const Grid inner = Grid::unit_cube(16);
  StrayProblem p = make_stray_problem(inner, 2);
  const VectorField ones =
      sample_vector(inner, [](const Vec3 &) { return Vec3{0, 0, 1}; });
  const VectorField idmap =
      sample_vector(inner, [](const Vec3 &x) { return x; });

  SUBCASE("uniform dilation deposits m / det F") {
    const double a = 0.1;
    const Deformation y = build_deformation(idmap, a); // y = (1 + a) x
    REQUIRE(y.certified);
    const VectorField zeta = magnetization_datum(y, ones, p);
    const double expect = 1.0 / ((1.0 + a) * (1.0 + a) * (1.0 + a));
    int deposits = 0;
    for (std::size_t c = 0; c < zeta.data.size(); ++c) {
      const double mag = norm(zeta[c]);
      if (mag == 0.0)
        continue;
      ++deposits;
      CHECK(std::abs(mag - expect) <= 1e-12);
    }
    // Expansion: all reference cells land in distinct padded cells.
    CHECK(deposits == 16 * 16 * 16);
  }

  SUBCASE("total charge matches the change-of-variables identity") {
    const double a = 0.005;
    const Deformation y = build_deformation(idmap, a);
    const VectorField zeta = magnetization_datum(y, ones, p);
    const double charge = deterministic_cell_sum(p.padded, [&](std::size_t c) {
                            return norm(zeta[c]);
                          }) *
                          p.padded.cell_volume();
    CHECK(std::abs(charge - 1.0) <= 0.05); // |Omega| = 1 within rasterization
  }

  SUBCASE("identity deformation agrees with the direct embedding") {
    const VectorField zero(inner);
    const Deformation y = build_deformation(zero, 0.3);
    REQUIRE(y.certified);
    const VectorField a = magnetization_datum(y, ones, p);
    const VectorField b = magnetization_datum(ones, p);
    CHECK(max_component_diff(a, b) == 0.0);
  }

  SUBCASE("uncertified deformation is refused") {
    const Deformation y = build_deformation(idmap, 0.9); // 0.9 > 1/(2L)
    REQUIRE_FALSE(y.certified);
    CHECK_THROWS_AS(magnetization_datum(y, ones, p), std::invalid_argument);
  }

  SUBCASE("image outside the padded box is a domain error") {
    const VectorField shift =
        sample_vector(inner, [](const Vec3 &) { return Vec3{100, 0, 0}; });
    const Deformation y = build_deformation(shift, 1.0); // translation
    REQUIRE(y.certified);
    CHECK_THROWS_AS(magnetization_datum(y, ones, p), std::domain_error);
  }
}

TEST_CASE("energy identity flags a mismatched field/datum pair") {
  set_thread_count(8);
  const Grid inner = Grid::unit_cube(32);
  StrayProblem p = make_stray_problem(inner, 2);
  const VectorField m =
      uniform_ball_magnetization(inner, {0.5, 0.5, 0.5}, 0.25, {0, 0, 1});
  p.zeta = magnetization_datum(m, p);
  solve_stray_field(p);
  CHECK_NOTHROW(stray_energy(p.h, p.zeta));

  VectorField doubled = p.zeta;
  for (auto &z : doubled.data)
    z = z * 2.0;
  CHECK_THROWS_AS(stray_energy(p.h, doubled), std::runtime_error);
  set_thread_count(1);
}

TEST_CASE("solution operator is bounded: energy continuity in the datum") {
  set_thread_count(8);
  const Grid inner = Grid::unit_cube(32);
  StrayProblem p = make_stray_problem(inner, 2);

  const VectorField m1 =
      uniform_ball_magnetization(inner, {0.5, 0.5, 0.5}, 0.25, {0, 0, 1});
  const VectorField m2 =
      uniform_ball_magnetization(inner, {0.5, 0.5, 0.5}, 0.27, {0, 0, 1});

  p.zeta = magnetization_datum(m1, p);
  solve_stray_field(p);
  const VectorField h1 = p.h;
  const double e1 = stray_energy(p.h, p.zeta);
  const double z1 = l2_norm(p.zeta);
  CHECK(l2_norm(h1) <= 1.02 * z1);

  p.zeta = magnetization_datum(m2, p);
  solve_stray_field(p);
  const double e2 = stray_energy(p.h, p.zeta);
  const double z2 = l2_norm(p.zeta);
  CHECK(l2_norm(p.h) <= 1.02 * z2);

  VectorField dz(p.padded);
  const VectorField za = magnetization_datum(m1, p);
  const VectorField zb = magnetization_datum(m2, p);
  for (std::size_t c = 0; c < dz.data.size(); ++c)
    dz[c] = za[c] - zb[c];
  const double bound = l2_norm(dz) * (z1 + z2);
  CHECK(std::abs(e1 - e2) <= 1.05 * bound + 1e-12);
  set_thread_count(1);
}

TEST_CASE("adding a constant to the potential leaves the field unchanged") {
  const Grid inner = Grid::unit_cube(16);
  StrayProblem p = make_stray_problem(inner, 2);
  p.zeta = magnetization_datum(smooth_bump_field(inner, {1, 0, 0}), p);
  solve_stray_field(p);

  ScalarField shifted = p.v;
  for (auto &val : shifted.data)
    val += 1.2345;
  const VectorField g0 = gradient(p.v);
  const VectorField g1 = gradient(shifted);
  double gmax = 0.0;
  for (std::size_t c = 0; c < g0.data.size(); ++c)
    gmax = std::max(gmax, norm(g0[c]));
  CHECK(max_component_diff(g0, g1) <= 1e-11 * (1.0 + gmax));
}
