// Free-space stray-field solver.  The magnetization datum zeta induces a
// scalar potential v with div(-Dv + zeta) = 0 on all of R^3; we evaluate the
// Newtonian-kernel convolution for v by FFTs on a zero-padded grid (Hockney
// scheme), take h = -gradient(v), and report the magnetostatic energy
// integral of |h|^2 together with its weak-form cross check.
//
// The convolution kernel is integrated in closed form over each cell, and the
// spectrum is corrected for the cell-assignment window and for the
// centered-difference gradient read, so resolved modes of the field match the
// continuum solution.
#pragma once

#include "magelas/grid.hpp"

namespace magelas {

// One solve at a time per instance; distinct instances may solve
// concurrently (FFT planning is serialized internally).
struct StrayProblem {
  Grid inner;       // physical box the magnetization lives in
  Grid padded;      // `padding` times the cells per axis, same spacing,
                    // centered on the inner box
  int padding = 2;
  VectorField zeta; // magnetization datum, supported inside the padded box
  ScalarField v;    // scalar potential, zero mean (filled by solve)
  VectorField h;    // stray field h = -gradient(v) (filled by solve)
  bool solved = false;
};

// padding >= 2 so the near exterior field is representable; the FFT grid is
// twice the padded grid again, which makes the discrete convolution
// alias-free at every padded cell.
StrayProblem make_stray_problem(const Grid &inner, int padding = 2);

// Padding used by the energy evaluators, whose data fill the whole inner
// box: 4x when every axis count is even, else 5x (an odd margin cannot be
// centered, and padding 5 always leaves the even margin 2n).
int deep_padding(const Grid &inner);

// Identity deformation: zeta = chi_Omega m, copied into the center block of
// the padded grid (m lives on problem.inner).
VectorField magnetization_datum(const VectorField &m, const StrayProblem &p);

// Certified deformation y = id + eps u: each reference cell deposits the
// value m / det F at the padded cell containing y(center), so that
// zeta(y(x)) det F(x) = m(x) holds piecewise.  Refuses uncertified
// deformations; throws std::domain_error when an image point leaves the
// padded box.
VectorField magnetization_datum(const Deformation &y, const VectorField &m,
                                const StrayProblem &p);

// Fill p.v (zero-mean potential) and p.h = -gradient(v).
void solve_stray_field(StrayProblem &p);

// Magnetostatic energy: integral of |h|^2 over the padded grid, cross-checked
// against the weak-form identity  integral |h|^2 = -integral zeta . h
// (multiply div(-Dv + zeta) = 0 by v and integrate by parts).  Disagreement
// beyond 10% throws std::runtime_error: the solve is under-resolved or the
// (h, zeta) pair is mismatched.
double stray_energy(const VectorField &h, const VectorField &zeta);

// |E - I| / max(|E|, |I|) with E, I the two sides of the identity above;
// 0 when both vanish.
double stray_identity_residual(const VectorField &h, const VectorField &zeta);

// Uniformly magnetized ball: each cell gets m times the fraction of
// subsamples^3 midpoint probes that fall inside the ball.  The default is the
// sharp indicator mask (one probe at the cell center); larger counts give an
// antialiased datum.  The classical oracle is h = -m/3 in the interior.
VectorField uniform_ball_magnetization(const Grid &g, const Vec3 &center,
                                       double radius, const Vec3 &m,
                                       int subsamples = 1);

} // namespace magelas
