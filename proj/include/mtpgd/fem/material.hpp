// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include "mtpgd/common.hpp"

namespace mtpgd::fem {

// Linear isotropic elasticity + J2 plasticity with linear isotropic
// hardening. Units: MPa for moduli and stresses (consistent with mm / N).
struct Material {
  double young_modulus = 0.0;      // E
  double poisson_ratio = 0.0;      // nu
  double yield_stress_initial = 0.0;  // sigma_y0
  double hardening_modulus = 0.0;  // H

  void validate() const {
    if (!(young_modulus > 0.0))
      throw ConfigError("material: E must be > 0");
    if (!(poisson_ratio >= 0.0 && poisson_ratio < 0.5))
      throw ConfigError("material: nu must be in [0, 0.5)");
    if (!(yield_stress_initial > 0.0))
      throw ConfigError("material: sigma_y0 must be > 0");
    if (!(hardening_modulus >= 0.0))
      throw ConfigError("material: H must be >= 0");
  }

  double shear_modulus() const {
    return young_modulus / (2.0 * (1.0 + poisson_ratio));
  }
  double lame_lambda() const {
    return young_modulus * poisson_ratio /
           ((1.0 + poisson_ratio) * (1.0 - 2.0 * poisson_ratio));
  }

  // Plane-strain constitutive matrix for the engineering Voigt vector
  // (e11, e22, gamma12).
  Eigen::Matrix3d d_matrix() const {
    const double e = young_modulus, nu = poisson_ratio;
    const double c = e / ((1.0 + nu) * (1.0 - 2.0 * nu));
    Eigen::Matrix3d d;
    d << c * (1.0 - nu), c * nu, 0.0,
         c * nu, c * (1.0 - nu), 0.0,
         0.0, 0.0, c * (1.0 - 2.0 * nu) / 2.0;
    return d;
  }
};

}  // namespace mtpgd::fem
