// SPDX-License-Identifier: Apache-2.0
#include "mtpgd/fem/assembly.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "mtpgd/common.hpp"
#include "quad_shape.hpp"

namespace mtpgd::fem {

namespace {

// Engineering-Voigt strain-displacement matrix (3x8) at one quadrature
// point. Returns detJ; throws GeometricError on singular maps.
double b_matrix(const Eigen::Matrix<double, 4, 2>& xe, int q, std::size_t e,
                Eigen::Matrix<double, 3, 8>& b) {
  const auto [xi, eta] = detail::gauss_point(q);
  Eigen::Matrix<double, 4, 2> dndx;
  const double det = detail::physical_gradients(xe, xi, eta, dndx);
  if (!(det > 0.0))
    throw GeometricError("assembly: non-positive Jacobian in element " +
                         std::to_string(e));
  b.setZero();
  for (int a = 0; a < 4; ++a) {
    b(0, 2 * a) = dndx(a, 0);
    b(1, 2 * a + 1) = dndx(a, 1);
    b(2, 2 * a) = dndx(a, 1);
    b(2, 2 * a + 1) = dndx(a, 0);
  }
  return det;
}

Eigen::Matrix<double, 4, 2> element_coords(const Mesh& mesh, std::size_t e) {
  Eigen::Matrix<double, 4, 2> xe;
  for (int a = 0; a < 4; ++a) {
    const int n = mesh.elements[e][a];
    xe.row(a) << mesh.nodes[n][0], mesh.nodes[n][1];
  }
  return xe;
}

}  // namespace

Eigen::SparseMatrix<double> assemble_stiffness(const Mesh& mesh,
                                               const Material& material) {
  material.validate();
  const Eigen::Matrix3d d = material.d_matrix();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mesh.elements.size() * 64);
  Eigen::Matrix<double, 3, 8> b;
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    const auto xe = element_coords(mesh, e);
    Eigen::Matrix<double, 8, 8> ke = Eigen::Matrix<double, 8, 8>::Zero();
    for (int q = 0; q < 4; ++q) {
      const double det = b_matrix(xe, q, e, b);
      ke.noalias() += det * (b.transpose() * (d * b));
    }
    // mirror the upper triangle so K is exactly symmetric
    for (int i = 0; i < 8; ++i)
      for (int j = i + 1; j < 8; ++j) ke(j, i) = ke(i, j);
    for (int a = 0; a < 4; ++a)
      for (int ca = 0; ca < 2; ++ca)
        for (int bn = 0; bn < 4; ++bn)
          for (int cb = 0; cb < 2; ++cb)
            trips.emplace_back(2 * mesh.elements[e][a] + ca,
                               2 * mesh.elements[e][bn] + cb,
                               ke(2 * a + ca, 2 * bn + cb));
  }
  Eigen::SparseMatrix<double> k(mesh.n_dofs(), mesh.n_dofs());
  k.setFromTriplets(trips.begin(), trips.end());
  return k;
}

Eigen::VectorXd assemble_plastic_force(const Mesh& mesh,
                                       const Material& material,
                                       std::span<const double> p11,
                                       std::span<const double> p22,
                                       std::span<const double> p12) {
  const std::size_t ng = static_cast<std::size_t>(mesh.n_gauss_points());
  if (p11.size() != ng || p22.size() != ng || p12.size() != ng)
    throw ShapeError("assemble_plastic_force: quadrature layout mismatch");
  const double two_g = 2.0 * material.shear_modulus();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(mesh.n_dofs());
  Eigen::Matrix<double, 3, 8> b;
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    const auto xe = element_coords(mesh, e);
    Eigen::Matrix<double, 8, 1> fe = Eigen::Matrix<double, 8, 1>::Zero();
    for (int q = 0; q < 4; ++q) {
      const double det = b_matrix(xe, q, e, b);
      const std::size_t g = 4 * e + q;
      // deviatoric completion makes C : eps_p = 2G eps_p in-plane; the work
      // conjugate of (e11, e22, gamma12) is (s11, s22, s12)
      Eigen::Vector3d sp(two_g * p11[g], two_g * p22[g], two_g * p12[g]);
      fe.noalias() += det * (b.transpose() * sp);
    }
    for (int a = 0; a < 4; ++a)
      for (int c = 0; c < 2; ++c)
        f[2 * mesh.elements[e][a] + c] += fe[2 * a + c];
  }
  return f;
}

Eigen::VectorXd assemble_traction(const Mesh& mesh) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(mesh.n_dofs());
  for (const auto& ne : mesh.neumann) {
    const double dx = mesh.nodes[ne.n1][0] - mesh.nodes[ne.n0][0];
    const double dy = mesh.nodes[ne.n1][1] - mesh.nodes[ne.n0][1];
    const double len = std::sqrt(dx * dx + dy * dy);
    for (int c = 0; c < 2; ++c) {
      f[2 * ne.n0 + c] += 0.5 * len * ne.traction[c];
      f[2 * ne.n1 + c] += 0.5 * len * ne.traction[c];
    }
  }
  return f;
}

Eigen::VectorXd assemble_body_force(const Mesh& mesh, double fx, double fy) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(mesh.n_dofs());
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    const auto xe = element_coords(mesh, e);
    for (int q = 0; q < 4; ++q) {
      const auto [xi, eta] = detail::gauss_point(q);
      const double det = detail::jacobian(xe, xi, eta).determinant();
      if (!(det > 0.0))
        throw GeometricError("assembly: non-positive Jacobian in element " +
                             std::to_string(e));
      const Eigen::Vector4d n = detail::shape_values(xi, eta);
      for (int a = 0; a < 4; ++a) {
        f[2 * mesh.elements[e][a]] += det * n[a] * fx;
        f[2 * mesh.elements[e][a] + 1] += det * n[a] * fy;
      }
    }
  }
  return f;
}

StrainField evaluate_strain(const Mesh& mesh, const Eigen::VectorXd& u) {
  if (u.size() != mesh.n_dofs())
    throw ShapeError("evaluate_strain: displacement size mismatch");
  StrainField s;
  s.resize(mesh.n_gauss_points());
  Eigen::Matrix<double, 3, 8> b;
  Eigen::Matrix<double, 8, 1> ue;
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    const auto xe = element_coords(mesh, e);
    for (int a = 0; a < 4; ++a) {
      ue[2 * a] = u[2 * mesh.elements[e][a]];
      ue[2 * a + 1] = u[2 * mesh.elements[e][a] + 1];
    }
    for (int q = 0; q < 4; ++q) {
      b_matrix(xe, q, e, b);
      const Eigen::Vector3d eps = b * ue;
      const std::size_t g = 4 * e + q;
      s.e11[g] = eps[0];
      s.e22[g] = eps[1];
      s.g12[g] = eps[2];
    }
  }
  return s;
}

std::vector<double> quadrature_weights(const Mesh& mesh) {
  std::vector<double> w(mesh.n_gauss_points());
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    const auto xe = element_coords(mesh, e);
    for (int q = 0; q < 4; ++q) {
      const auto [xi, eta] = detail::gauss_point(q);
      w[4 * e + q] = detail::jacobian(xe, xi, eta).determinant();
    }
  }
  return w;
}

std::vector<double> von_mises_stress(const Mesh& mesh, const Material& material,
                                     const Eigen::VectorXd& u) {
  const StrainField s = evaluate_strain(mesh, u);
  const Eigen::Matrix3d d = material.d_matrix();
  std::vector<double> vm(s.size());
  for (std::size_t g = 0; g < s.size(); ++g) {
    const Eigen::Vector3d sig =
        d * Eigen::Vector3d(s.e11[g], s.e22[g], s.g12[g]);
    const double s11 = sig[0], s22 = sig[1], s12 = sig[2];
    const double s33 = material.poisson_ratio * (s11 + s22);
    vm[g] = std::sqrt(s11 * s11 + s22 * s22 + s33 * s33 - s11 * s22 -
                      s11 * s33 - s22 * s33 + 3.0 * s12 * s12);
  }
  return vm;
}

std::vector<std::array<double, 2>> gauss_point_coordinates(const Mesh& mesh) {
  std::vector<std::array<double, 2>> pts(mesh.n_gauss_points());
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    const auto xe = element_coords(mesh, e);
    for (int q = 0; q < 4; ++q) {
      const auto [xi, eta] = detail::gauss_point(q);
      const Eigen::Vector4d n = detail::shape_values(xi, eta);
      const Eigen::RowVector2d p = n.transpose() * xe;
      pts[4 * e + q] = {p[0], p[1]};
    }
  }
  return pts;
}

}  // namespace mtpgd::fem
