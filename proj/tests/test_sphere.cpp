// Sphere meshes, geodesic well distances, well-distance fields, and
// transition profiles.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "magelas/sphere.hpp"
#include "test_util.hpp"

using namespace magelas;

namespace {

// Trapezoid quadrature of sqrt(Phi) along the great-circle arc a -> b,
// written independently of the library's Simpson version.
double arc_cost_oracle(const AnisotropySpec &spec, Vec3 a, Vec3 b) {
  const double c = std::max(-1.0, std::min(1.0, dot(a, b)));
  const double theta = std::acos(c);
  if (theta < 1e-12)
    return 0.0;
  Vec3 w = b - a * c;
  if (norm(w) < 1e-9) { // antipodal: pick some meridian
    w = cross(a, std::abs(a.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0});
  }
  w = normalized(w);
  const int n = 4000;
  double s = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double t = theta * k / n;
    const Vec3 z = a * std::cos(t) + w * std::sin(t);
    const double phi = std::max(spec.phi(z), 0.0);
    s += std::sqrt(phi) * ((k == 0 || k == n) ? 0.5 : 1.0);
  }
  return s * theta / n;
}

// Cheapest path made of two great-circle arcs a -> w -> b over a dense set
// of waypoints w (single arcs arise as degenerate cases).
double two_arc_oracle(const AnisotropySpec &spec, const Vec3 &a,
                      const Vec3 &b) {
  double best = arc_cost_oracle(spec, a, b);
  const int n = 2000;
  for (int k = 0; k < n; ++k) { // Fibonacci sphere
    const double z = 1.0 - 2.0 * (k + 0.5) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = 2.399963229728653 * k; // golden angle
    const Vec3 w{r * std::cos(phi), r * std::sin(phi), z};
    best = std::min(best,
                    arc_cost_oracle(spec, a, w) + arc_cost_oracle(spec, w, b));
  }
  return best;
}

} // namespace

TEST_CASE("icosphere counts, norms, connectivity") {
  for (int level = 0; level <= 3; ++level) {
    SphereMesh m = SphereMesh::icosphere(level);
    const long f = 20L << (2 * level); // 20 * 4^level
    CHECK(m.faces.size() == std::size_t(f));
    CHECK(m.edges.size() == std::size_t(3 * f / 2));
    CHECK(m.vertices.size() == std::size_t(f / 2 + 2));
    // Euler characteristic of the sphere
    CHECK(long(m.vertices.size()) - long(m.edges.size()) + f == 2);
    for (const Vec3 &v : m.vertices)
      CHECK(std::abs(norm(v) - 1.0) <= 1e-12);
    CHECK_NOTHROW(m.validate());
    CHECK(m.edge_lengths.size() == m.edges.size());
  }
  CHECK_THROWS(SphereMesh::icosphere(-1));
  CHECK_THROWS(SphereMesh::icosphere(9));
}

TEST_CASE("face location and barycentric interpolation") {
  SphereMesh m = SphereMesh::icosphere(4);
  const Vec3 c{0.4, -1.2, 0.3};
  std::vector<double> vals(m.vertices.size());
  for (std::size_t v = 0; v < m.vertices.size(); ++v)
    vals[v] = dot(c, m.vertices[v]);

  auto rg = testutil::rng(3);
  for (int t = 0; t < 200; ++t) {
    const Vec3 z = testutil::random_unit(rg);
    Vec3 w;
    const int f = m.locate_face(z, &w);
    CHECK(f >= 0);
    CHECK(std::min({w.x, w.y, w.z}) >= -1e-9);
    CHECK(w.x + w.y + w.z == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.interpolate(vals, z) == doctest::Approx(dot(c, z)).epsilon(0.01));
  }
  // exact at vertices
  for (int v : {0, 17, 1000})
    CHECK(m.interpolate(vals, m.vertices[v]) ==
          doctest::Approx(vals[v]).epsilon(1e-9));
  CHECK_THROWS(m.interpolate(std::vector<double>(3, 0.0), Vec3{1, 0, 0}));
}

TEST_CASE("geodesic distance: coincident points, antipodal wells, symmetry") {
  const Vec3 axis = normalized(Vec3{1.0, 2.0, 2.0});
  AnisotropySpec uni = make_uniaxial(1.0, axis);

  CHECK(geodesic_distance(uni, axis, axis, 3) == 0.0);

  // d(a, -a) = int_0^pi sqrt(kappa) sin(theta) dtheta = 2 sqrt(kappa)
  const double d = geodesic_distance(uni, axis, axis * -1.0, 5);
  CHECK(d == doctest::Approx(2.0).epsilon(0.01));
  AnisotropySpec uni4 = make_uniaxial(4.0, Vec3{1, 0, 0});
  const double d4 = geodesic_distance(uni4, Vec3{1, 0, 0}, Vec3{-1, 0, 0}, 5);
  CHECK(d4 == doctest::Approx(4.0).epsilon(0.01));

  auto rg = testutil::rng(41);
  for (int t = 0; t < 5; ++t) {
    const Vec3 z0 = testutil::random_unit(rg);
    const Vec3 z1 = testutil::random_unit(rg);
    const double ab = geodesic_distance(uni, z0, z1, 3);
    const double ba = geodesic_distance(uni, z1, z0, 3);
    CHECK(std::abs(ab - ba) <= 1e-10);
  }

  CHECK_THROWS(geodesic_distance(uni, axis, axis * -1.0, 1));
  CHECK_THROWS(geodesic_distance(uni, Vec3{2, 0, 0}, axis, 3));
}

TEST_CASE("geodesic distance: great-circle bound and level monotonicity") {
  std::vector<AnisotropySpec> specs;
  specs.push_back(make_uniaxial(2.0, Vec3{0, 0, 1}));
  specs.push_back(make_cubic(1.0, 0.0));
  auto rg = testutil::rng(57);
  for (const auto &spec : specs) {
    for (int t = 0; t < 4; ++t) {
      const Vec3 z0 = testutil::random_unit(rg);
      const Vec3 z1 = testutil::random_unit(rg);
      const double cap = great_circle_cost(spec, z0, z1);
      double prev = std::numeric_limits<double>::infinity();
      for (int level = 2; level <= 5; ++level) {
        const double d = geodesic_distance(spec, z0, z1, level);
        CHECK(d <= cap + 1e-12);
        CHECK(d <= prev + 1e-9);
        prev = d;
      }
    }
  }
}

TEST_CASE("surface tension table") {
  AnisotropySpec uni = make_uniaxial(1.0, Vec3{0, 0, 1});
  auto sigma = surface_tension_table(uni, 4);
  REQUIRE(sigma.size() == 2);
  CHECK(sigma[0][0] == 0.0);
  CHECK(sigma[1][1] == 0.0);
  CHECK(sigma[0][1] == doctest::Approx(2.0).epsilon(0.01));
  CHECK(sigma[0][1] == sigma[1][0]);
  // consistency: exactly the pairwise geodesic calls
  CHECK(sigma[0][1] ==
        geodesic_distance(uni, uni.wells[0], uni.wells[1], 4));

  // cubic, adjacent axes e1 -> e2 (wells 0 and 2 in storage order)
  AnisotropySpec cub = make_cubic(1.0, 0.0);
  auto sc = surface_tension_table(cub, 4);
  REQUIRE(sc.size() == 6);
  for (int i = 0; i < 6; ++i)
    CHECK(sc[i][i] == 0.0);
  const double oracle = two_arc_oracle(cub, cub.wells[0], cub.wells[2]);
  CHECK(sc[0][2] == doctest::Approx(oracle).epsilon(0.02));
}

TEST_CASE("well distance fields") {
  AnisotropySpec uni = make_uniaxial(1.0, Vec3{0, 0, 1});
  SphereMesh mesh = SphereMesh::icosphere(5);
  std::vector<double> f1 = well_distance_field(uni, 1, mesh);
  std::vector<double> f2 = well_distance_field(uni, 2, mesh);

  CHECK(std::abs(mesh.interpolate(f1, uni.wells[0])) <= 0.01);
  CHECK(std::abs(mesh.interpolate(f2, uni.wells[1])) <= 0.01);

  // equator: f1 = int_0^{pi/2} sin = 1
  for (int k = 0; k < 12; ++k) {
    const double a = 2.0 * M_PI * k / 12.0;
    const Vec3 z{std::cos(a), std::sin(a), 0.0};
    CHECK(mesh.interpolate(f1, z) == doctest::Approx(1.0).epsilon(0.01));
  }

  // 1-Lipschitz w.r.t. the weighted metric: |f(a)-f(b)| <= d(a,b) up to the
  // scheme's own per-edge quadrature error, which is O(h^3)
  const double lip_tol = 3.0 * std::pow(mesh.mean_edge_length(), 3);
  for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
    const int a = mesh.edges[e][0], b = mesh.edges[e][1];
    const double w = arc_cost_oracle(uni, mesh.vertices[a], mesh.vertices[b]);
    CHECK(std::abs(f1[a] - f1[b]) <= w + lip_tol);
  }

  // triangle inequality against the pair metric, sampled
  SphereMesh coarse = SphereMesh::icosphere(3);
  std::vector<double> g1 = well_distance_field(uni, 1, coarse);
  auto rg = testutil::rng(77);
  std::uniform_int_distribution<int> pick(0, int(coarse.vertices.size()) - 1);
  for (int t = 0; t < 12; ++t) {
    const int a = pick(rg), b = pick(rg);
    const double dab =
        geodesic_distance(uni, coarse.vertices[a], coarse.vertices[b], 3);
    CHECK(g1[a] <= dab + g1[b] + 0.02 * (1.0 + dab + g1[b]));
  }

  CHECK_THROWS(well_distance_field(uni, 0, coarse));
  CHECK_THROWS(well_distance_field(uni, 3, coarse));
}

TEST_CASE("optimal transition profiles") {
  AnisotropySpec uni = make_uniaxial(4.0, Vec3{1, 0, 0});
  const double d = geodesic_distance(uni, uni.wells[0], uni.wells[1], 5);
  CHECK(d == doctest::Approx(4.0).epsilon(0.01));

  const double eps = 0.1, beta = 0.5;
  TransitionProfile p = optimal_profile(uni, 1, 2, eps, beta, 201);
  CHECK(p.n == 201);
  REQUIRE(p.points.size() == 201);
  CHECK(norm(p.points.front() - uni.wells[0]) <= 1e-12);
  CHECK(norm(p.points.back() - uni.wells[1]) <= 1e-12);
  const double layer = kProfileTheta * std::pow(eps, beta);
  CHECK(p.param.front() == doctest::Approx(-layer).epsilon(1e-14));
  CHECK(p.param.back() == doctest::Approx(layer).epsilon(1e-14));
  for (int k = 0; k < p.n; ++k) {
    CHECK(std::abs(norm(p.points[k]) - 1.0) <= 1e-12);
    if (k > 0)
      CHECK(p.param[k] > p.param[k - 1]);
  }
  CHECK(p.cost >= 0.0);
  // Young's inequality: per-area cost >= 2 d, equality at equipartition
  CHECK(p.cost >= 2.0 * d - 0.02 * 2.0 * d);
  CHECK(p.cost <= 2.0 * d * 1.03);

  // the layer construction is self-similar in s / eps^beta, so the cost is
  // independent of eps up to rounding
  TransitionProfile q = optimal_profile(uni, 1, 2, 0.02, beta, 201);
  CHECK(std::abs(q.cost - p.cost) <= 1e-9 * p.cost);

  CHECK_THROWS(optimal_profile(uni, 1, 1, eps, beta, 201));
  CHECK_THROWS(optimal_profile(uni, 0, 2, eps, beta, 201));
  CHECK_THROWS(optimal_profile(uni, 1, 2, 0.0, beta, 201));
  CHECK_THROWS(optimal_profile(uni, 1, 2, eps, 0.0, 201));
  CHECK_THROWS(optimal_profile(uni, 1, 2, eps, 1.0, 201));
  CHECK_THROWS(optimal_profile(uni, 1, 2, eps, beta, 8));
}

TEST_CASE("profiles refuse densities vanishing inside the path") {
  // Phi = z1^2 (1 - z1^2)^2 vanishes at the wells +-e1 and on the whole
  // equator z1 = 0, which every connecting path must cross.
  auto phi = [](const Vec3 &z) {
    const double w = 1.0 - z.x * z.x;
    return z.x * z.x * w * w;
  };
  auto grad = [](const Vec3 &z) {
    const double w = 1.0 - z.x * z.x;
    return Vec3{2.0 * z.x * w * (1.0 - 3.0 * z.x * z.x), 0.0, 0.0};
  };
  AnisotropySpec spec =
      make_custom({Vec3{1, 0, 0}, Vec3{-1, 0, 0}}, phi, grad);

  // the metric itself is fine: meridian cost = 2 int_0^{pi/2} cos sin^2 = 2/3
  const double d = geodesic_distance(spec, spec.wells[0], spec.wells[1], 4);
  CHECK(d == doctest::Approx(2.0 / 3.0).epsilon(0.02));

  CHECK_THROWS_AS(optimal_profile(spec, 1, 2, 0.1, 0.5, 201),
                  std::runtime_error);
}

TEST_CASE("profile cost against the piecewise-linear oracle: c0 = 2") {
  AnisotropySpec uni = make_uniaxial(1.0, Vec3{0, 0, 1});
  const double d = geodesic_distance(uni, uni.wells[0], uni.wells[1], 5);
  CHECK(d == doctest::Approx(2.0).epsilon(0.01));

  const double oracle = profile_cost_oracle(uni, 1, 2, 0.1, 0.5, 201);
  TransitionProfile p = optimal_profile(uni, 1, 2, 0.1, 0.5, 201);
  CHECK(std::abs(oracle - p.cost) <= 0.03 * p.cost);

  const double c0 = oracle / d;
  CHECK(c0 == doctest::Approx(2.0).epsilon(0.02));

  // oracle shares the eps self-similarity
  const double oracle2 = profile_cost_oracle(uni, 1, 2, 0.01, 0.5, 201);
  CHECK(std::abs(oracle2 - oracle) <= 1e-9 * oracle);
}
