// Cell-centered cuboid grids, the field containers, and the discrete
// calculus the energies are built from.
//
// Conventions, used everywhere downstream:
//  - cells are addressed (i, j, k) with k fastest; centers sit at
//    origin + (idx + 1/2) * spacing per axis;
//  - gradients are centered in the interior and one-sided second order
//    (-3 f0 + 4 f1 - f2)/(2h) on the boundary slabs;
//  - integrals are midpoint sums with compensated (Kahan) summation over a
//    fixed traversal order, chunked so results are bit-identical for any
//    worker-thread count.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "magelas/mat3.hpp"

namespace magelas {

// Worker threads used by the chunked reductions; purely a speed knob, the
// chunk layout (and hence every last bit of the results) does not depend
// on it.
void set_thread_count(int threads);
int thread_count();

struct Grid {
  std::array<int, 3> n{{0, 0, 0}}; // cells per axis, each >= 4
  Vec3 origin{0, 0, 0};
  Vec3 spacing{0, 0, 0};

  static Grid unit_cube(int cells_per_axis);
  static Grid box(const Vec3 &lo, const Vec3 &hi, std::array<int, 3> cells);

  std::size_t size() const {
    return std::size_t(n[0]) * std::size_t(n[1]) * std::size_t(n[2]);
  }
  std::size_t index(int i, int j, int k) const {
    return (std::size_t(i) * n[1] + j) * n[2] + k;
  }
  Vec3 center(int i, int j, int k) const {
    return {origin.x + (i + 0.5) * spacing.x, origin.y + (j + 0.5) * spacing.y,
            origin.z + (k + 0.5) * spacing.z};
  }
  double cell_volume() const { return spacing.x * spacing.y * spacing.z; }
  bool same_layout(const Grid &o) const;
  void validate() const;
};

template <class T> struct Field {
  Grid grid;
  std::vector<T> data;

  Field() = default;
  explicit Field(const Grid &g, T fill = T{}) : grid(g), data(g.size(), fill) {}

  T &operator()(int i, int j, int k) { return data[grid.index(i, j, k)]; }
  const T &operator()(int i, int j, int k) const {
    return data[grid.index(i, j, k)];
  }
  T &operator[](std::size_t i) { return data[i]; }
  const T &operator[](std::size_t i) const { return data[i]; }
};

using ScalarField = Field<double>;
using VectorField = Field<Vec3>;
using MatrixField = Field<Mat3>;
using LabelField = Field<int>; // phase labels, 1-based

// Compensated serial summation in index order.
double kahan_sum(const double *v, std::size_t n);

// Deterministic chunked reduction of fn(cell_index) over all cells:
// fixed-size chunks are Kahan-summed (possibly on worker threads) and then
// combined serially in chunk order.
double deterministic_cell_sum(const Grid &g,
                              const std::function<double(std::size_t)> &fn);

// Midpoint-rule integral: deterministic sum of cell values * cell volume.
double integrate(const ScalarField &f);

// Discrete gradients. Vector fields produce G with G(r,c) = d u_r / d x_c.
VectorField gradient(const ScalarField &f);
MatrixField gradient(const VectorField &u);
MatrixField symmetric_gradient(const VectorField &u);

// Total face area between the (unordered) label pair {i, j}; exact for
// axis-aligned interfaces, a factor sqrt(2) high for 45-degree planes.
double interface_area(const LabelField &labels, int i, int j);

// Deformation y = id + eps * u with the injectivity certificate
// eps <= 1/(2L), L = max cell operator norm of Du, floored at 1.
struct Deformation {
  VectorField y;            // deformed positions at cell centers
  MatrixField grad_u;       // Du, shared with the energy evaluations
  double eps = 0.0;
  double lipschitz = 1.0;   // L
  bool certified = false;
};
Deformation build_deformation(const VectorField &u, double eps);

// det(I + eps G) = 1 + eps P1 + eps^2 P2 + eps^3 P3, exact coefficients.
struct DetExpansion {
  double p1 = 0.0, p2 = 0.0, p3 = 0.0;
  double value(double eps) const {
    return 1.0 + eps * (p1 + eps * (p2 + eps * p3));
  }
};
DetExpansion determinant_expansion(const Mat3 &g);

// Distance to the nearest interface face of a multi-label field (chamfer
// two-pass over the 26-neighborhood; exact for axis-aligned interfaces) plus
// the label on the far side of that nearest interface.
struct InterfaceDistance {
  ScalarField distance;   // unsigned, to the nearest differing-label face
  LabelField partner;     // label across that interface
};
InterfaceDistance interface_distance(const LabelField &labels);

// Dirichlet data on a subset of the box faces.
struct BoundarySpec {
  // Face order: x-, x+, y-, y+, z-, z+.
  std::array<bool, 6> faces{{false, false, false, false, false, false}};
  Mat3 affine = Mat3::zero(); // datum d(x) = affine * x
  bool any() const {
    for (bool b : faces)
      if (b)
        return true;
    return false;
  }
  Vec3 datum(const Vec3 &x) const { return affine * x; }
};

// True when cell (i,j,k) lies in the one-cell slab of a selected face.
bool on_dirichlet_boundary(const Grid &g, const BoundarySpec &bc, int i, int j,
                           int k);

} // namespace magelas
