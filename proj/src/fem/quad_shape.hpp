// SPDX-License-Identifier: Apache-2.0
//
// Bilinear quad shape functions and 2x2 Gauss quadrature, shared by mesh
// validation and assembly.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>

namespace mtpgd::fem::detail {

inline constexpr double kGauss = 0.5773502691896257;  // 1/sqrt(3)

// Quadrature point q = 0..3 in (xi, eta): (-g,-g), (+g,-g), (-g,+g), (+g,+g).
inline std::array<double, 2> gauss_point(int q) {
  const double xi = (q % 2 == 0) ? -kGauss : kGauss;
  const double eta = (q / 2 == 0) ? -kGauss : kGauss;
  return {xi, eta};
}

// Corner order: (-1,-1), (1,-1), (1,1), (-1,1) — counter-clockwise.
inline Eigen::Vector4d shape_values(double xi, double eta) {
  Eigen::Vector4d n;
  n << 0.25 * (1 - xi) * (1 - eta), 0.25 * (1 + xi) * (1 - eta),
      0.25 * (1 + xi) * (1 + eta), 0.25 * (1 - xi) * (1 + eta);
  return n;
}

// Rows: shape function a; columns: d/dxi, d/deta.
inline Eigen::Matrix<double, 4, 2> shape_gradients(double xi, double eta) {
  Eigen::Matrix<double, 4, 2> dn;
  dn << -0.25 * (1 - eta), -0.25 * (1 - xi),
         0.25 * (1 - eta), -0.25 * (1 + xi),
         0.25 * (1 + eta),  0.25 * (1 + xi),
        -0.25 * (1 + eta),  0.25 * (1 - xi);
  return dn;
}

// Jacobian of the isoparametric map at (xi, eta) for element corner
// coordinates xe (4x2).
inline Eigen::Matrix2d jacobian(const Eigen::Matrix<double, 4, 2>& xe,
                                double xi, double eta) {
  return shape_gradients(xi, eta).transpose() * xe;
}

// Physical-space shape gradients (4x2, rows = functions, cols = d/dx, d/dy)
// and detJ at a quadrature point.
inline double physical_gradients(const Eigen::Matrix<double, 4, 2>& xe,
                                 double xi, double eta,
                                 Eigen::Matrix<double, 4, 2>& dndx) {
  const Eigen::Matrix<double, 4, 2> dn = shape_gradients(xi, eta);
  const Eigen::Matrix2d j = dn.transpose() * xe;
  const double det = j.determinant();
  dndx = dn * j.inverse().transpose();
  return det;
}

}  // namespace mtpgd::fem::detail
