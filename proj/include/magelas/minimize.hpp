// Minimizers: the linearized elastic equilibrium with magnetization
// eigenstrain, greedy alternating minimization of the sharp-interface total
// energy, and projected gradient descent on the diffuse total.
#pragma once

#include <vector>

#include "magelas/energy.hpp"
#include "magelas/grid.hpp"

namespace magelas {

// Adjoint of the discrete gradient(VectorField): the unique map with
// <gradient(u), T> = <u, gradient_adjoint(T)> cellwise (no volume factor),
// mirroring the centered/one-sided stencils entry by entry. Public because
// every energy gradient below is assembled through it.
VectorField gradient_adjoint(const MatrixField &t);

// Displacement minimizing the quadratic form
//   E(u) = 1/2 integral Q_W(sym Du - Lambda(b_m))
// subject to u = d on the one-cell slabs of the selected Dirichlet faces,
// by conjugate gradients on the reduced system (matrix-free application of
// grad^T C_W sym grad, deterministic reductions). Q_W is only positive
// semidefinite, so a Tikhonov shift of 1e-10 guards the reduced system's
// possible kernel; uniqueness otherwise comes from the boundary condition.
// Stops when the residual has dropped by `tol` relative to its initial
// value; throws std::runtime_error when the iteration cap is exceeded, with
// the reached residual in the message. When `energy_trace` is given it
// receives E(u_k) per iteration (nonincreasing: CG is monotone in energy on
// a convex quadratic).
VectorField solve_elastic_equilibrium(const LabelField &m,
                                      const BoundarySpec &bc,
                                      const AnisotropySpec &spec,
                                      const MaterialLaw &law, double tol,
                                      std::vector<double> *energy_trace = nullptr);

struct AlternatingReport {
  int rounds = 0;        // kept (equilibrium + sweep) rounds
  long flips = 0;        // accepted label flips, total
  bool converged = false; // a sweep produced no flips (fixed point reached)
  std::vector<double> energies; // total G after each kept round
};

// Alternating minimization of G(u, m) = E + lambda H - F: each round solves
// the elastic equilibrium for the current labels (init supplies the starting
// labels; the displacement is re-solved each round, so init.u is unused),
// then runs
// one iterated-conditional-modes sweep (red cells then black cells, each in
// fixed lexicographic order) flipping a cell's label whenever the local
// change of elastic + interface + frozen-stray - Zeeman energy is negative. The stray
// field enters flips through its frozen first variation and is re-solved
// between rounds; G is re-evaluated after every round and the previous state
// is restored (and iteration stopped) if a round failed to decrease it, so
// the reported energies are nonincreasing. Greedy and local by design: a
// single-cell flip against a flat interface raises the interface term, so
// planar walls can be local minima even when a constant state is globally
// better.
LimitState minimize_limit_alternating(const LimitState &init,
                                      const BoundarySpec &bc,
                                      const MaterialLaw &law,
                                      const AnisotropySpec &spec,
                                      const std::vector<std::vector<double>> &sigma,
                                      double lambda, const AppliedField &f,
                                      int sweeps,
                                      AlternatingReport *report = nullptr);

// Ambient-space gradient of the diffuse total G_eps at `state`, written into
// grad_u / grad_mu (either may be null). All elastic, anisotropy, exchange,
// and Zeeman sensitivities are analytic (including the geometric ones
// through F, det F, F^-1, and the deformed positions; the applied field is
// differentiated by central differences per cell). When lambda > 0 the
// stray term contributes its frozen-field first variation with respect to
// mu (-2 lambda h at the image cell, scaled by 1/det F); its geometric
// sensitivities are dropped, which only affects the search direction, never
// the monotonicity of the descent below (acceptance is by full
// re-evaluation).
void diffuse_total_gradient(const DiffuseState &state, const MaterialLaw &law,
                            const AnisotropySpec &spec, double lambda,
                            const AppliedField &f, VectorField *grad_u,
                            VectorField *grad_mu);

struct DescentReport {
  std::vector<double> energies; // G_eps of the init and every accepted step
  int accepted = 0;
  int certificate_rejections = 0; // trial steps refused for eps > 1/(2L)
};

// Projected gradient descent on G_eps: u moves along -grad_u (cells on the
// Dirichlet slabs are kept at their initial values), mu moves along -grad_mu
// and is renormalized cellwise onto the sphere. Each step backtracks (halve
// until decrease), rejecting any trial whose deformation loses the
// injectivity certificate; the iteration stops early when no decrease is
// found at any step size. The returned state is certified and its energy
// trace is strictly decreasing.
DiffuseState minimize_diffuse_descent(const DiffuseState &init,
                                      const MaterialLaw &law,
                                      const AnisotropySpec &spec,
                                      double lambda, const AppliedField &f,
                                      int steps, double step_size,
                                      const BoundarySpec &bc = {},
                                      DescentReport *report = nullptr);

} // namespace magelas
