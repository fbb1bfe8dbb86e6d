// Every functional of the model family: the scaled elastic and magnetic
// energies of a diffuse state, their sharp-interface limits, the
// least-upper-bound interface estimator, the Zeeman term, and the assembled
// totals (stray-field part delegated to the free-space solver).
//
// Deformed-configuration integrals are evaluated in reference coordinates
// through the change-of-variables identities (F = I + eps Du per cell):
//   anisotropy   eps^-beta  int Phi(F^T mu) det F dx,
//   exchange     eps^+beta  int |Dmu F^-1|^2 det F dx,
//   Zeeman       int f(y(x)) . mu(x) det F dx,
// which avoids constructing y^-1 on the grid.
#pragma once

#include <functional>
#include <vector>

#include "magelas/anisotropy.hpp"
#include "magelas/grid.hpp"
#include "magelas/material.hpp"
#include "magelas/sphere.hpp"
#include "magelas/stray.hpp"

namespace magelas {

// A deformation/magnetization pair at scale eps, in reference coordinates:
// y = id + eps u and mu = m o y (per-cell unit vectors).
struct DiffuseState {
  VectorField u;
  VectorField mu;
  double eps = 0.0;
  double beta = 0.5;
};

// Upper end of the admissible exponent window, min(2(q-1)/q, 1).
double beta_limit(const MaterialLaw &law);

// Validates the fields once at construction: matching grids, |mu| = 1 per
// cell within 1e-9, u finite, eps > 0 with admissible scaled strains, and
// 0 < beta < min(2(q-1)/q, 1) for the active law.
DiffuseState make_diffuse_state(VectorField u, VectorField mu, double eps,
                                double beta, const MaterialLaw &law);

// Sharp-interface pair: displacement plus per-cell well labels (1-based).
struct LimitState {
  VectorField u;
  LabelField m;
};

// Validates matching grids, finite u, and labels in 1..wells.
LimitState make_limit_state(VectorField u, LabelField m,
                            const AnisotropySpec &spec);

// One cell of the scaled elastic integrand, W(Lambda_eps^{-1}(mu) F).
// Exposed for the descent gradients and the frame-indifference checks.
double elastic_cell_density(const Vec3 &mu, const Mat3 &f, double eps,
                            const MaterialLaw &law);

// (1/eps^2) int W(Lambda_eps^{-1}(mu)(I + eps Du)) dx.  Returns +infinity
// when any cell is orientation-reversing (the orientation sentinel of W).
// Refuses states whose injectivity certificate does not hold.  The second
// overload reuses a deformation built by the caller.
double elastic_diffuse(const DiffuseState &state, const MaterialLaw &law);
double elastic_diffuse(const DiffuseState &state, const MaterialLaw &law,
                       const Deformation &def);

// eps^-beta int Phi(F^T mu) det F + eps^beta int |Dmu F^-1|^2 det F.
double magnetic_diffuse(const DiffuseState &state, const AnisotropySpec &spec);
double magnetic_diffuse(const DiffuseState &state, const AnisotropySpec &spec,
                        const Deformation &def);

// (1/2) int Q_W(sym Du - Lambda(b_m)) dx with the closed-form Q_W.
double elastic_limit(const LimitState &state, const MaterialLaw &law,
                     const AnisotropySpec &spec);

// (1/2) sum_{i != j} sigma[i][j] * area of the {i,j} interface.  sigma must
// be symmetric with zero diagonal (one row per label).
double magnetic_limit(const LabelField &m,
                      const std::vector<std::vector<double>> &sigma);

// int max_i |D(f_i o mu)| dx, where f_i is the distance-to-well-i field on
// the sphere mesh, barycentrically interpolated at mu.  A lower-bound
// companion of (1/2) magnetic_diffuse by Young's inequality.
double lub_estimator(const VectorField &mu, const AnisotropySpec &spec,
                     const SphereMesh &mesh);

// int f . m over the masked region (all fields Eulerian, mask weights in
// [0,1]).
double zeeman_energy(const VectorField &m, const ScalarField &mask,
                     const VectorField &f);

// Applied field as a function of position; an empty function means f == 0.
using AppliedField = std::function<Vec3(const Vec3 &)>;

// The four parts of a total energy, kept separate for reporting:
// total = elastic + magnetic + lambda * stray - zeeman.
struct EnergyBreakdown {
  double elastic = 0.0;
  double magnetic = 0.0;
  double stray = 0.0;
  double zeeman = 0.0;
  double lambda = 0.0;
  double total() const { return elastic + magnetic + lambda * stray - zeeman; }
};

// G_eps: scaled elastic + scaled magnetic + lambda * stray energy of the
// deformed magnetization datum - Zeeman term.  lambda >= 0; the stray solve
// (padding 2) is skipped when lambda == 0.
EnergyBreakdown diffuse_breakdown(const DiffuseState &state,
                                  const MaterialLaw &law,
                                  const AnisotropySpec &spec, double lambda,
                                  const AppliedField &f);
double total_diffuse(const DiffuseState &state, const MaterialLaw &law,
                     const AnisotropySpec &spec, double lambda,
                     const AppliedField &f);

// G: limit elastic + interface energy + lambda * stray energy at identity
// deformation - Zeeman term, with the supplied well tension table.
EnergyBreakdown limit_breakdown(const LimitState &state, const MaterialLaw &law,
                                const AnisotropySpec &spec,
                                const std::vector<std::vector<double>> &sigma,
                                double lambda, const AppliedField &f);
double total_limit(const LimitState &state, const MaterialLaw &law,
                   const AnisotropySpec &spec,
                   const std::vector<std::vector<double>> &sigma, double lambda,
                   const AppliedField &f);

} // namespace magelas
