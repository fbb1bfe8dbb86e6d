#include "magelas/anisotropy.hpp"

#include <cmath>
#include <stdexcept>

namespace magelas {

void AnisotropySpec::validate() const {
  if (wells.size() < 2)
    throw std::invalid_argument("AnisotropySpec: need at least two wells");
  if (!phi || !grad_phi)
    throw std::invalid_argument("AnisotropySpec: density callbacks missing");
  for (const Vec3 &w : wells) {
    if (std::abs(dot(w, w) - 1.0) > 1e-9)
      throw std::invalid_argument("AnisotropySpec: wells must be unit vectors");
    if (std::abs(phi(w)) > 1e-10)
      throw std::invalid_argument("AnisotropySpec: density must vanish at wells");
  }
  // Nonnegativity spot check on a deterministic Fibonacci sphere sample.
  const int n = 512;
  for (int k = 0; k < n; ++k) {
    const double zc = 1.0 - 2.0 * (k + 0.5) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - zc * zc));
    const double th = 2.399963229728653 * k; // golden angle
    const Vec3 z{r * std::cos(th), r * std::sin(th), zc};
    if (phi(z) < -1e-12)
      throw std::invalid_argument("AnisotropySpec: density negative on S^2");
  }
}

AnisotropySpec make_uniaxial(double kappa, const Vec3 &axis) {
  if (!(kappa >= 0.0))
    throw std::invalid_argument("make_uniaxial: kappa must be >= 0");
  const Vec3 a = normalized(axis);
  AnisotropySpec s;
  s.kind = AnisotropySpec::Kind::uniaxial;
  s.wells = {a, -a};
  // kappa |z - (a.z) a|^2: equals kappa (1 - (a.z)^2) on S^2 but stays
  // nonnegative for the non-unit arguments of the anisotropy pullback.
  s.phi = [kappa, a](const Vec3 &z) {
    const double c = dot(a, z);
    return kappa * (dot(z, z) - c * c);
  };
  s.grad_phi = [kappa, a](const Vec3 &z) {
    return (z - a * dot(a, z)) * (2.0 * kappa);
  };
  s.validate();
  return s;
}

AnisotropySpec make_cubic(double kappa1, double kappa2, const Mat3 &axes_cols) {
  if (!(kappa1 >= 0.0) || !(kappa2 >= 0.0))
    throw std::invalid_argument("make_cubic: kappas must be >= 0");
  std::array<Vec3, 3> a;
  for (int k = 0; k < 3; ++k)
    a[k] = normalized(Vec3{axes_cols(0, k), axes_cols(1, k), axes_cols(2, k)});
  // The axes must be mutually orthogonal for the wells to be the only zeros.
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      if (std::abs(dot(a[i], a[j])) > 1e-9)
        throw std::invalid_argument("make_cubic: axes must be orthonormal");

  AnisotropySpec s;
  s.kind = AnisotropySpec::Kind::cubic;
  s.wells = {a[0], -a[0], a[1], -a[1], a[2], -a[2]};
  s.phi = [kappa1, kappa2, a](const Vec3 &z) {
    const double c0 = dot(a[0], z), c1 = dot(a[1], z), c2 = dot(a[2], z);
    const double s0 = c0 * c0, s1 = c1 * c1, s2 = c2 * c2;
    return kappa1 * (s0 * s1 + s0 * s2 + s1 * s2) + kappa2 * s0 * s1 * s2;
  };
  s.grad_phi = [kappa1, kappa2, a](const Vec3 &z) {
    const double c0 = dot(a[0], z), c1 = dot(a[1], z), c2 = dot(a[2], z);
    const double s0 = c0 * c0, s1 = c1 * c1, s2 = c2 * c2;
    Vec3 g{0, 0, 0};
    g += a[0] * (2.0 * c0 * (kappa1 * (s1 + s2) + kappa2 * s1 * s2));
    g += a[1] * (2.0 * c1 * (kappa1 * (s0 + s2) + kappa2 * s0 * s2));
    g += a[2] * (2.0 * c2 * (kappa1 * (s0 + s1) + kappa2 * s0 * s1));
    return g;
  };
  s.validate();
  return s;
}

AnisotropySpec make_cubic(double kappa1, double kappa2) {
  return make_cubic(kappa1, kappa2, Mat3::identity());
}

AnisotropySpec make_custom(std::vector<Vec3> wells,
                           std::function<double(const Vec3 &)> phi,
                           std::function<Vec3(const Vec3 &)> grad_phi) {
  AnisotropySpec s;
  s.kind = AnisotropySpec::Kind::custom;
  s.wells = std::move(wells);
  s.phi = std::move(phi);
  s.grad_phi = std::move(grad_phi);
  s.validate();
  return s;
}

} // namespace magelas
