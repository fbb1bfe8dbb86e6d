// Stored elastic energy density and the spontaneous-strain family.
//
// The default density is
//   W(A) = c_w * ( g_p(dist(A; SO(3))) + h_q(det A) ),   det A > 0,
// with the convex growth functions
//   g_p(t) = t^2/2                 for 0 <= t <= 1,
//   g_p(t) = t^p/p + 1/2 - 1/p     for t > 1       (p > 2),
//   h_q(t) = t^q/q + 1/t - (q+1)/q for t > 0       (q > 1),
// and W = +infinity when det A <= 0 (orientation sentinel).
//
// The spontaneous strain of a magnetization direction z (unit) is
//   Lambda(z)       = a z(x)z + b (I - z(x)z),
//   Lambda_eps(z)   = I + eps * Lambda(z),
//   Lambda_eps^{-1} = (1/(1+eps a)) z(x)z + (1/(1+eps b)) (I - z(x)z),
// admissible while 1 + eps a > 0 and 1 + eps b > 0.
//
// The small-strain quadratic form of the default density has the closed form
//   Q_W(B) = c_w * ( |sym B|^2 + (q+1) (tr B)^2 ),
// which extract_elastic_form recovers numerically from any density by
// Richardson-refined second differences.
#pragma once

#include <functional>
#include <limits>

#include "magelas/mat3.hpp"

namespace magelas {

struct MaterialLaw {
  double p = 4.0;   // growth exponent of g_p, must be > 2
  double q = 2.0;   // growth exponent of h_q, must be > 1
  double c_w = 1.0; // overall stiffness scale, must be > 0
  double a = 0.3;   // spontaneous stretch along the magnetization
  double b = -0.1;  // spontaneous stretch transverse to it

  void validate() const;
};

// Growth functions and their first derivatives.
double g_growth(double t, double p);
double g_growth_deriv(double t, double p);
double h_growth(double t, double q);
double h_growth_deriv(double t, double q);

// Frobenius distance of A to SO(3): singular values with a det-corrected
// sign on the smallest one when det A < 0.
double dist_SO3(const Mat3 &a);

// Default stored energy; +infinity for det A <= 0.
double stored_energy(const Mat3 &a, const MaterialLaw &law);

// dW/dA of the default density at A (requires det A > 0 and finite W).
Mat3 stored_energy_gradient(const Mat3 &a, const MaterialLaw &law);

// Spontaneous strains. z must be a unit vector (checked to 1e-9).
Mat3 spontaneous_strain(const Vec3 &z, const MaterialLaw &law);
Mat3 scaled_strain(const Vec3 &z, double eps, const MaterialLaw &law);
Mat3 scaled_strain_inverse(const Vec3 &z, double eps, const MaterialLaw &law);

// True when both principal factors 1 + eps a and 1 + eps b are positive.
bool strain_admissible(double eps, const MaterialLaw &law);

// d/dz_k of Lambda_eps^{-1}(z), needed by the energy gradient.
Mat3 scaled_strain_inverse_deriv(const Vec3 &z, double eps,
                                 const MaterialLaw &law, int k);

// Closed-form quadratic limit form of the default density.
double quadratic_form(const Mat3 &b, const MaterialLaw &law);

// The associated linear stress map C_W with Q_W(B) = C_W(B) : B, i.e.
// C_W(B) = c_w * ( sym B + (q+1) (tr B) I ).
Mat3 elastic_tensor_apply(const Mat3 &b, const MaterialLaw &law);

// Numerical extraction of Q_W from an arbitrary density by centered second
// differences at I with one Richardson refinement:
//   D(h) = (W(I + hB) + W(I - hB) - 2 W(I)) / h^2,
//   Q    = (4 D(h/2) - D(h)) / 3.
// Throws std::domain_error if the density evaluates nonfinite.
double extract_elastic_form(const std::function<double(const Mat3 &)> &density,
                            const Mat3 &b, double h = 1e-4);

} // namespace magelas
