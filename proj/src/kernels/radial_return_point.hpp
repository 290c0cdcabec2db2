// SPDX-License-Identifier: Apache-2.0
//
// Canonical single-point radial return shared by the scalar backend and the
// remainder loops of the vector backends. Keeping the sequence in one place
// guarantees all backends execute literally the same operations; the vector
// lanes replay it 4-wide with correctly rounded ops only.
#pragma once

#include <cmath>
#include <cstddef>

#include "mtpgd/kernels/kernels.hpp"

namespace mtpgd::kernels::detail {

inline constexpr double kThird = 1.0 / 3.0;

inline void radial_return_point(const PlasticConstants& c, std::size_t i,
                                const double* e11, const double* e22,
                                const double* e12, double* p11, double* p22,
                                double* p33, double* p12, double* ebar,
                                double* s11, double* s22, double* s33,
                                double* s12) {
  // elastic trial strain; total out-of-plane strain is zero (plane strain)
  const double ee11 = e11[i] - p11[i];
  const double ee22 = e22[i] - p22[i];
  const double ee33 = -p33[i];
  const double ee12 = e12[i] - p12[i];
  const double tr = (ee11 + ee22) + ee33;
  const double lt = c.lame_lambda * tr;
  const double t11 = lt + c.two_g * ee11;
  const double t22 = lt + c.two_g * ee22;
  const double t33 = lt + c.two_g * ee33;
  const double t12 = c.two_g * ee12;
  const double mean = ((t11 + t22) + t33) * kThird;
  const double d11 = t11 - mean;
  const double d22 = t22 - mean;
  const double d33 = t33 - mean;
  const double d12 = t12;
  const double j2 = ((d11 * d11 + d22 * d22) + d33 * d33) + (d12 * d12) * 2.0;
  const double q = std::sqrt(j2 * 1.5);
  const double f = q - (c.sigma_y0 + c.hardening * ebar[i]);
  if (f > 0.0) {
    // f > 0 implies q > sigma_y0 > 0, so the division is safe
    const double dg = f / c.denom;
    const double coef = (dg * 1.5) / q;
    p11[i] = p11[i] + coef * d11;
    p22[i] = p22[i] + coef * d22;
    p33[i] = p33[i] + coef * d33;
    p12[i] = p12[i] + coef * d12;
    ebar[i] = ebar[i] + dg;
    const double sf = c.two_g * coef;
    s11[i] = t11 - sf * d11;
    s22[i] = t22 - sf * d22;
    s33[i] = t33 - sf * d33;
    s12[i] = t12 - sf * d12;
  } else {
    s11[i] = t11;
    s22[i] = t22;
    s33[i] = t33;
    s12[i] = t12;
  }
}

}  // namespace mtpgd::kernels::detail
