// Magnetic anisotropy densities on the unit sphere and their well sets.
//
// Uniaxial: Phi(z) = kappa (1 - (axis . z)^2),           wells { +axis, -axis }.
// Cubic:    Phi(z) = k1 * sum_{i<j} (z.a_i)^2 (z.a_j)^2
//                  + k2 * (z.a_1)^2 (z.a_2)^2 (z.a_3)^2,  wells { +-a_1, +-a_2, +-a_3 }.
// Custom:   any nonnegative density given programmatically together with its
//           wells (used by tests; not constructible from JSON configs).
#pragma once

#include <functional>
#include <vector>

#include "magelas/mat3.hpp"

namespace magelas {

struct AnisotropySpec {
  enum class Kind { uniaxial, cubic, custom };

  Kind kind = Kind::uniaxial;
  std::vector<Vec3> wells;            // unit vectors, M >= 2
  std::function<double(const Vec3 &)> phi;      // density on S^2
  std::function<Vec3(const Vec3 &)> grad_phi;   // ambient-space gradient

  // Construction-time checks: M >= 2, unit wells, Phi(b_i) = 0 to 1e-10, and
  // Phi >= 0 spot-checked on a sphere sample.
  void validate() const;
};

AnisotropySpec make_uniaxial(double kappa, const Vec3 &axis);
AnisotropySpec make_cubic(double kappa1, double kappa2, const Mat3 &axes_cols);

// Cubic with the coordinate axes.
AnisotropySpec make_cubic(double kappa1, double kappa2);

AnisotropySpec make_custom(std::vector<Vec3> wells,
                           std::function<double(const Vec3 &)> phi,
                           std::function<Vec3(const Vec3 &)> grad_phi);

} // namespace magelas
