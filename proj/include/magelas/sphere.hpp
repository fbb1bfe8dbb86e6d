// Geodesic distances on S^2 in the conformal metric sqrt(Phi(z)) |dz|,
// surface-tension tables between anisotropy wells, well-distance fields, and
// the 1D optimal transition profiles the recovery construction is built from.
//
// Estimator layout, shared by everything here:
//  - icosahedral subdivision meshes carry the graph computations;
//  - graph shortest paths are polished by projected-gradient relaxation of
//    the discrete action and finally capped by the single great-circle-arc
//    quadrature, which is always an admissible competitor;
//  - the public distance at refinement `level` is the running minimum over
//    levels 2..level, hence nonincreasing in `level` by construction.
#pragma once

#include <array>
#include <vector>

#include "magelas/anisotropy.hpp"
#include "magelas/mat3.hpp"

namespace magelas {

struct SphereMesh {
  int level = 0;
  std::vector<Vec3> vertices; // unit norm
  std::vector<std::array<int, 2>> edges; // unique, first < second
  std::vector<double> edge_lengths;      // Euclidean chord lengths
  std::vector<std::array<int, 3>> faces;
  std::vector<std::vector<std::pair<int, double>>> neighbors; // (vertex, len)
  std::vector<std::vector<int>> vertex_faces; // faces incident to a vertex

  // Icosahedron refined `level` times (level L: 10*4^L+2 vertices).
  static SphereMesh icosphere(int level);

  void validate() const; // unit vertices, connected edge graph

  int nearest_vertex(const Vec3 &z) const;
  // Face whose spherical triangle contains direction z, with the normalized
  // barycentric weights of z in that face.
  int locate_face(const Vec3 &z, Vec3 *weights = nullptr) const;
  // Barycentric interpolation of per-vertex data at an arbitrary direction.
  double interpolate(const std::vector<double> &vertex_values,
                     const Vec3 &z) const;

  double mean_edge_length() const;
};

// Quadrature of the action along the single great-circle arc from z0 to z1
// (an admissible path, so always an upper bound for the geodesic distance).
// For antipodal endpoints the arc through a fixed deterministic waypoint is
// used; for uniaxial densities all such arcs cost the same.
double great_circle_cost(const AnisotropySpec &spec, const Vec3 &z0,
                         const Vec3 &z1);

// Geodesic well-to-well metric d(z0, z1) = inf over paths of the action
// integral. Graph shortest path on the icosphere at levels 2..level, each
// polished by projected-gradient path relaxation, running minimum over the
// levels, capped by great_circle_cost. Endpoints are canonicalized
// (lexicographic order) before computing, so d(z0,z1) == d(z1,z0) exactly.
// level < 2 is refused.
double geodesic_distance(const AnisotropySpec &spec, const Vec3 &z0,
                         const Vec3 &z1, int level);

// M x M table of pairwise well distances: symmetric, zero diagonal, entry
// (r,c) = geodesic_distance between wells r and c (storage order; labels in
// LabelField are 1-based, so label l maps to row l-1).
std::vector<std::vector<double>> surface_tension_table(const AnisotropySpec &spec,
                                                       int level);

// Distance from well b_i (1-based index, per the label convention) to every
// mesh vertex: single-source Dijkstra seeded through the faces around b_i,
// then label-correcting triangle-update sweeps that let fronts cross faces
// instead of hugging edges (removes the graph-metric anisotropy bias).
std::vector<double> well_distance_field(const AnisotropySpec &spec, int well,
                                        const SphereMesh &mesh);

// One-dimensional transition layer between wells i and j (1-based):
// the geodesic path reparametrized by the equipartition rule
// |p'(s)| = eps^-beta sqrt(Phi(p(s))), sampled at n equispaced stations of
// the signed layer coordinate s in [-THETA eps^beta, THETA eps^beta].
// Across the outer 5% of the layer on each side the profile is blended onto
// the exact well, reached at the layer edge (the exact equipartition profile
// only gets there as s -> +-inf).
struct TransitionProfile {
  int n = 0;
  std::vector<Vec3> points;  // profile samples on S^2
  std::vector<double> param; // signed layer coordinate s per sample
  double cost = 0.0;         // per-area diffuse cost along the profile
  double eps = 0.0;
  double beta = 0.0;
};

// Layer half-width multiplier: the layer spans THETA * eps^beta to each side
// of the interface.
inline constexpr double kProfileTheta = 4.0;
// Fraction of the layer (per side) over which the profile is blended onto
// the exact well.
inline constexpr double kProfileSnap = 0.05;

// Throws when the anisotropy vanishes on the interior of the transition path
// (the equipartition speed 1/sqrt(Phi) is then nonintegrable and no single
// layer can connect the wells).
TransitionProfile optimal_profile(const AnisotropySpec &spec, int i, int j,
                                  double eps, double beta, int n);

// Independent brute-force minimization of the same per-area diffuse cost
// over piecewise-linear profiles pinned at the wells: adaptive projected
// gradient descent from a uniformly parametrized great-circle initial path.
// Used to measure the profile cost constant c0 (expected 2 from the Young
// equality case).
double profile_cost_oracle(const AnisotropySpec &spec, int i, int j,
                           double eps, double beta, int n);

} // namespace magelas
