#include "magelas/material.hpp"

#include <cmath>
#include <stdexcept>

namespace magelas {

void MaterialLaw::validate() const {
  if (!(p > 2.0))
    throw std::invalid_argument("MaterialLaw: p must be > 2");
  if (!(q > 1.0))
    throw std::invalid_argument("MaterialLaw: q must be > 1");
  if (!(c_w > 0.0))
    throw std::invalid_argument("MaterialLaw: c_w must be > 0");
  if (!std::isfinite(a) || !std::isfinite(b))
    throw std::invalid_argument("MaterialLaw: a, b must be finite");
}

double g_growth(double t, double p) {
  if (t < 0.0)
    throw std::domain_error("g_growth: t must be >= 0");
  if (t <= 1.0)
    return 0.5 * t * t;
  return std::pow(t, p) / p + 0.5 - 1.0 / p;
}

double g_growth_deriv(double t, double p) {
  if (t < 0.0)
    throw std::domain_error("g_growth_deriv: t must be >= 0");
  if (t <= 1.0)
    return t;
  return std::pow(t, p - 1.0);
}

double h_growth(double t, double q) {
  if (!(t > 0.0))
    throw std::domain_error("h_growth: t must be > 0");
  return std::pow(t, q) / q + 1.0 / t - (q + 1.0) / q;
}

double h_growth_deriv(double t, double q) {
  if (!(t > 0.0))
    throw std::domain_error("h_growth_deriv: t must be > 0");
  return std::pow(t, q - 1.0) - 1.0 / (t * t);
}

double dist_SO3(const Mat3 &a) {
  Vec3 lam;
  Mat3 v;
  jacobi_eigen_sym(transpose(a) * a, lam, v);
  // Ascending eigenvalues of A^T A; singular values are their square roots.
  double s0 = std::sqrt(std::max(lam[0], 0.0));
  const double s1 = std::sqrt(std::max(lam[1], 0.0));
  const double s2 = std::sqrt(std::max(lam[2], 0.0));
  // det A = +-(s0 s1 s2); a negative determinant flips the smallest one.
  if (det(a) < 0.0)
    s0 = -s0;
  const double d0 = s0 - 1.0, d1 = s1 - 1.0, d2 = s2 - 1.0;
  return std::sqrt(d0 * d0 + d1 * d1 + d2 * d2);
}

double stored_energy(const Mat3 &a, const MaterialLaw &law) {
  const double d = det(a);
  if (d <= 0.0)
    return std::numeric_limits<double>::infinity();
  return law.c_w * (g_growth(dist_SO3(a), law.p) + h_growth(d, law.q));
}

Mat3 stored_energy_gradient(const Mat3 &a, const MaterialLaw &law) {
  const double d = det(a);
  if (!(d > 0.0))
    throw std::domain_error("stored_energy_gradient: det(A) must be positive");
  const double t = dist_SO3(a);
  // d(dist)/dA = (A - R(A))/dist; with g' = t on [0,1] the ratio g'(t)/t is
  // exactly 1 there, so the gradient stays well defined as t -> 0.
  const Mat3 excess = a - polar_rotation(a);
  const double gfac = (t <= 1.0) ? 1.0 : std::pow(t, law.p - 2.0);
  const Mat3 gterm = excess * gfac;
  const Mat3 hterm = cofactor(a) * h_growth_deriv(d, law.q);
  return (gterm + hterm) * law.c_w;
}

namespace {
void check_unit(const Vec3 &z, const char *who) {
  if (std::abs(dot(z, z) - 1.0) > 2e-9)
    throw std::invalid_argument(std::string(who) + ": z must be a unit vector");
}
} // namespace

Mat3 spontaneous_strain(const Vec3 &z, const MaterialLaw &law) {
  check_unit(z, "spontaneous_strain");
  const Mat3 zz = outer(z, z);
  return zz * law.a + (Mat3::identity() - zz) * law.b;
}

bool strain_admissible(double eps, const MaterialLaw &law) {
  return (1.0 + eps * law.a > 0.0) && (1.0 + eps * law.b > 0.0);
}

Mat3 scaled_strain(const Vec3 &z, double eps, const MaterialLaw &law) {
  check_unit(z, "scaled_strain");
  if (!strain_admissible(eps, law))
    throw std::domain_error(
        "scaled_strain: 1+eps*a and 1+eps*b must stay positive");
  return Mat3::identity() + spontaneous_strain(z, law) * eps;
}

Mat3 scaled_strain_inverse(const Vec3 &z, double eps, const MaterialLaw &law) {
  check_unit(z, "scaled_strain_inverse");
  if (!strain_admissible(eps, law))
    throw std::domain_error(
        "scaled_strain_inverse: 1+eps*a and 1+eps*b must stay positive");
  const Mat3 zz = outer(z, z);
  const double ca = 1.0 / (1.0 + eps * law.a);
  const double cb = 1.0 / (1.0 + eps * law.b);
  return zz * ca + (Mat3::identity() - zz) * cb;
}

Mat3 scaled_strain_inverse_deriv(const Vec3 &z, double eps,
                                 const MaterialLaw &law, int k) {
  check_unit(z, "scaled_strain_inverse_deriv");
  const double ca = 1.0 / (1.0 + eps * law.a);
  const double cb = 1.0 / (1.0 + eps * law.b);
  Vec3 ek;
  ek[k] = 1.0;
  const Mat3 s = outer(ek, z) + outer(z, ek);
  return s * (ca - cb);
}

double quadratic_form(const Mat3 &b, const MaterialLaw &law) {
  const Mat3 s = sym(b);
  const double tr = trace(b);
  return law.c_w * (ddot(s, s) + (law.q + 1.0) * tr * tr);
}

Mat3 elastic_tensor_apply(const Mat3 &b, const MaterialLaw &law) {
  return (sym(b) + Mat3::identity() * ((law.q + 1.0) * trace(b))) * law.c_w;
}

double extract_elastic_form(const std::function<double(const Mat3 &)> &density,
                            const Mat3 &b, double h) {
  const Mat3 id = Mat3::identity();
  const auto second_diff = [&](double step) {
    const double wp = density(id + b * step);
    const double wm = density(id - b * step);
    const double w0 = density(id);
    if (!std::isfinite(wp) || !std::isfinite(wm) || !std::isfinite(w0))
      throw std::domain_error(
          "extract_elastic_form: density evaluated nonfinite near I");
    // W(I + hB) = 1/2 h^2 Q_W(B) + o(h^2), so the symmetric second
    // difference divided by h^2 recovers Q_W(B) directly.
    return (wp + wm - 2.0 * w0) / (step * step);
  };
  const double coarse = second_diff(h);
  const double fine = second_diff(0.5 * h);
  return (4.0 * fine - coarse) / 3.0;
}

} // namespace magelas
